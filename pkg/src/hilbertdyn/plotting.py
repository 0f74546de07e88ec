"""Figures written next to the CSV/JSON artifacts (Agg backend, deterministic PNG metadata)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import boundary_grid  # noqa: E402

_META = {"Software": None}


def _outline(ax, body):
    if body.dim == 2:
        B = boundary_grid(body, 720)
        B = np.vstack([B, B[:1]])
        ax.plot(B[:, 0], B[:, 1], color="0.4", lw=0.8)
        ax.set_aspect("equal")
    elif body.dim == 1:
        lo, hi = body.bounding_box()
        ax.plot([lo[0], hi[0]], [0, 0], color="0.4", lw=0.8)


def _xy(P):
    P = np.atleast_2d(P)
    if P.shape[1] == 1:
        return P[:, 0], np.zeros(len(P))
    return P[:, 0], P[:, 1]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)


def plot_orbit(metric, trace, path):
    fig, (ax, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    _outline(ax, metric.body)
    x, y = _xy(metric.to_body(trace.points))
    ax.plot(x, y, ".-", ms=2, lw=0.5)
    ax.plot(x[:1], y[:1], "go", ms=5, label="start")
    ax.plot(x[-1:], y[-1:], "rx", ms=6, label="last")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("orbit (body coordinates)")
    ax2.plot(trace.times, trace.d_to_start, lw=1)
    ax2.set_xlabel("time")
    ax2.set_ylabel("distance to start")
    if trace.times[-1] > 10:
        ax2.set_xscale("symlog")
    _save(fig, path)


def plot_attractor(metric, estimate, seeds, path):
    fig, ax = plt.subplots(figsize=(5, 5))
    _outline(ax, metric.body)
    sx, sy = _xy(metric.to_body(seeds))
    ax.plot(sx, sy, ".", color="0.6", ms=3, label="seeds")
    if estimate.omega_points:
        ox, oy = _xy(metric.to_body(estimate.points()))
        ax.plot(ox, oy, "bo", ms=5, label="omega clusters")
    if estimate.dw_point is not None:
        dx, dy = _xy(metric.to_body(estimate.dw_point[None, :]))
        ax.plot(dx, dy, "r*", ms=12, label="Denjoy-Wolff estimate")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(f"attractor ({estimate.boundedness.value})")
    _save(fig, path)


def plot_sup_curve(times, curve, path, tol=None):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(np.maximum(times, times[1] if len(times) > 1 else 1.0), curve, lw=1)
    if tol is not None:
        ax.axhline(tol, color="r", ls="--", lw=0.8)
    ax.set_xlabel("time")
    ax.set_ylabel("sup distance to the limit point")
    _save(fig, path)


def plot_horoball(metric, pts, lo, member, spec, path):
    fig, ax = plt.subplots(figsize=(5, 5))
    _outline(ax, metric.body)
    x, y = _xy(pts)
    sc = ax.scatter(x, y, c=np.clip(lo, -10, 10), s=6, cmap="viridis")
    mx, my = _xy(pts[member]) if np.any(member) else (np.empty(0), np.empty(0))
    ax.plot(mx, my, "k.", ms=1.5)
    c = metric.to_body(spec.center[None, :])[0]
    p = metric.to_body(spec.pole[None, :])[0]
    ax.plot(*_xy(c[None, :]), "r*", ms=10)
    ax.plot(*_xy(p[None, :]), "ks", ms=5)
    fig.colorbar(sc, ax=ax, label="horofunction (lower estimate)")
    ax.set_title(f"{spec.kind.value} horoball, r = {spec.radius:g}")
    _save(fig, path)
