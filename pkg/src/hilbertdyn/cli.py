"""Command-line entry point.

Exit status: 0 success / all checks pass, 1 check violation, 2 inconclusive,
64 malformed config or input, 70 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, csv_text, dumps, fmt_float, load_config, task_rng, write_atomic
from .dynamics import (
    SHIPPED_GENERATORS,
    SHIPPED_MAPS,
    AffineContraction,
    Boundedness,
    BoundednessParams,
    Composition,
    MatrixSemigroup,
    ProjectiveLinear,
    RadialStretch,
    RotationSemigroup,
    SemigroupSpec,
    attractor,
    bounded_seed_set,
    classify_boundedness,
    denjoy_wolff,
    identity_map,
    iterate,
    omega_from_trace,
    semigroup_attractor,
    semigroup_orbit,
)
from .errors import ConfigError, HilbertDynError, PrecisionWarning, RegimeError
from .geometry import body_from_dict
from .horoballs import ApproachPolicy, HoroballSpec, horoball_grid
from .metrics import MetricInstance, MetricKind

# bad points, bodies or values are reported like a malformed config (the input-side library
# errors all derive from ValueError); the remaining library errors are numeric failures
INPUT_ERRORS = (ValueError, TypeError)

EXIT_OK, EXIT_VIOLATION, EXIT_INCONCLUSIVE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 64, 70

EPILOG = """\
CSV outputs (floats at 17 significant digits):
  orbit      step, time, x1..xn, d_to_start, step_d   (step_d empty on the last row)
  semigroup  step, time, x1..xn, d_to_start, step_d   (dense-time orbit of the first seed)
             and sup_curve.csv: time, sup_dist
  attractor  cluster, x1..xn, multiplicity, n_seeds
  horoball   x1..xn, horofunction_lo, horofunction_hi, member (0/1)
Coordinates are state coordinates: probability vectors for projective maps and
matrix semigroups, body coordinates otherwise.
"""

BODY_SHORTHANDS = {
    "interval": {"type": "interval"},
    "square": {"type": "box", "lo": [-1, -1], "hi": [1, 1]},
    "disc": {"type": "disc"},
    "bidisc": {"type": "polydisc", "k": 2},
}


# ---------------------------------------------------------------------------
# Building objects from config
# ---------------------------------------------------------------------------


def parse_body(spec):
    if isinstance(spec, str):
        if spec in BODY_SHORTHANDS:
            spec = BODY_SHORTHANDS[spec]
        elif spec.startswith("simplex:"):
            spec = {"type": "simplex", "dimension": int(spec.split(":", 1)[1])}
        else:
            spec = json.loads(spec)
    if not isinstance(spec, dict):
        raise ConfigError("body must be an object or a shorthand name")
    return body_from_dict(spec)


def _with_tols(spec, cfg):
    if isinstance(spec, dict):
        spec = dict(spec)
        spec.setdefault("boundary_tol", cfg["boundary_tol"])
        if spec.get("type") in ("hpolytope",):
            spec.setdefault("face_tol", cfg["face_tol"])
    return spec


def build_body(cfg: ExperimentConfig):
    return parse_body(_with_tols(cfg["body"], cfg))


def build_metric(cfg: ExperimentConfig, body, default: MetricInstance | None = None) -> MetricInstance:
    m = cfg["metric"] or {}
    kind = m.get("kind")
    if kind is None:
        if default is not None:
            return default
        kind = {"polydisc": "polydisc"}.get(body.to_dict()["type"], "hilbert")
    return MetricInstance(body, MetricKind(kind), float(m.get("kappa", 0.0)))


def build_map(spec, body=None):
    """Map from a config entry: a shipped name, or an object with a ``type``."""
    if isinstance(spec, str):
        if spec not in SHIPPED_MAPS:
            raise ConfigError(f"unknown shipped map {spec!r}; choose from {', '.join(SHIPPED_MAPS)}")
        return ProjectiveLinear(SHIPPED_MAPS[spec])
    if not isinstance(spec, dict):
        raise ConfigError("map must be a name or an object")
    kind = spec.get("type", "projective-linear")
    if "body" in spec:
        body = parse_body(spec["body"])
    if kind == "projective-linear":
        return ProjectiveLinear(spec["A"], claimed_nonexpansive=bool(spec.get("claimed_nonexpansive", True)))
    if kind == "shipped":
        return build_map(spec["name"])
    if body is None:
        raise ConfigError(f"map type {kind!r} needs a body")
    if kind == "affine":
        return AffineContraction(spec["M"], spec["c"], body)
    if kind == "identity":
        return identity_map(body)
    if kind == "radial-stretch":
        return RadialStretch(body, float(spec.get("power", 0.97)))
    if kind == "composition":
        return Composition([build_map(s, body) for s in spec["maps"]])
    raise ConfigError(f"unknown map type {kind!r}")


def build_semigroup(spec) -> SemigroupSpec:
    if isinstance(spec, str):
        if spec not in SHIPPED_GENERATORS:
            raise ConfigError(f"unknown shipped generator {spec!r}; choose from {', '.join(SHIPPED_GENERATORS)}")
        return MatrixSemigroup(SHIPPED_GENERATORS[spec])
    if isinstance(spec, list):
        return MatrixSemigroup(spec)
    if isinstance(spec, dict):
        kind = spec.get("type", "matrix")
        if kind == "matrix":
            return MatrixSemigroup(spec["A"])
        if kind == "rotation":
            return RotationSemigroup(float(spec.get("omega", 2 * math.pi)))
    raise ConfigError("generator must be a shipped name, a matrix, or an object with a type")


def build_params(cfg) -> BoundednessParams:
    return BoundednessParams(int(cfg["window"]), float(cfg["r_bound"]), float(cfg["r_esc"]),
                             float(cfg["slope_esc"]), float(cfg["slope_flat"]))


def build_seeds(cfg, metric, task: int = 0) -> np.ndarray:
    s = cfg["seeds"]
    if isinstance(s, list):
        return np.asarray(s, dtype=float)
    if "points" in s:
        return np.asarray(s["points"], dtype=float)
    rng = task_rng(int(cfg["master_seed"]), task)
    return bounded_seed_set(metric, int(s.get("count", 100)), float(s.get("radius", 1.0)), rng)


def _start(cfg, metric, task=0):
    if cfg["x"] is not None:
        return np.asarray(cfg["x"], dtype=float)
    return build_seeds(cfg, metric, task)[0]


def _parse_point(text):
    return np.array([float(v) for v in text.replace(";", ",").split(",") if v.strip()])


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


class Output:
    def __init__(self, out_dir, fmt):
        self.dir = Path(out_dir) if out_dir else None
        self.fmt = fmt

    def file(self, name, text):
        if self.dir is not None:
            write_atomic(self.dir / name, text)

    def figure(self, name, fn, *args, **kw):
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
            from . import plotting

            getattr(plotting, fn)(*args, self.dir / name, **kw)


def _trace_csv(trace) -> str:
    n = trace.points.shape[1]
    header = ["step", "time"] + [f"x{i + 1}" for i in range(n)] + ["d_to_start", "step_d"]
    rows = []
    for k in range(len(trace)):
        sd = fmt_float(trace.step_d[k]) if k < len(trace.step_d) else ""
        rows.append([str(k), fmt_float(trace.times[k])] + [fmt_float(v) for v in trace.points[k]]
                    + [fmt_float(trace.d_to_start[k]), sd])
    return csv_text(header, rows)


def _emit(out: Output, record: dict, csv: str | None, stem: str, default_fmt="json"):
    text = dumps(record, indent=2) + "\n"
    out.file(f"{stem}.json", text)
    if csv is not None:
        out.file(f"{stem}.csv", csv)
    fmt = out.fmt or default_fmt
    sys.stdout.write(csv if fmt == "csv" and csv is not None else text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_dist(args, cfg, out):
    body = parse_body(_with_tols(args.body, cfg)) if args.body else build_body(cfg)
    metric = build_metric(cfg, body)
    x = _parse_point(args.x) if args.x else np.asarray(cfg["x"], dtype=float)
    y = _parse_point(args.y) if args.y else np.asarray(cfg["y"], dtype=float)
    d = metric.distance(x, y)
    record = {"distance": d, "metric": metric.describe(), "x": x, "y": y, "config_digest": cfg.digest}
    out.file("dist.json", dumps(record, indent=2) + "\n")
    if (out.fmt or "text") == "json":
        sys.stdout.write(dumps(record, indent=2) + "\n")
    elif out.fmt == "csv":
        sys.stdout.write(csv_text(["distance"], [[d]]))
    else:
        sys.stdout.write(fmt_float(d) + "\n")
    return EXIT_OK


def _map_and_metric(cfg):
    if cfg["map"] is None:
        raise ConfigError("config needs a 'map' entry")
    body = build_body(cfg) if "body" in cfg.user else None
    try:
        mp = build_map(cfg["map"], body)
    except (HilbertDynError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid map: {exc}") from exc
    metric = build_metric(cfg, mp.body, mp.default_metric()) if "metric" in cfg.user else mp.default_metric()
    return mp, metric


def cmd_orbit(args, cfg, out):
    mp, metric = _map_and_metric(cfg)
    x0 = _start(cfg, metric)
    trace = iterate(mp, x0, int(cfg["n_steps"]), metric)
    params = build_params(cfg)
    try:
        kind = classify_boundedness(metric, trace, params)
    except ValueError:
        kind = Boundedness.UNDECIDED
    omega = omega_from_trace(trace, cfg["tail_fraction"], cfg["cluster_radius"], metric)
    record = {
        "boundedness": kind,
        "truncated": trace.truncated,
        "length": len(trace),
        "start": x0,
        "last": trace.points[-1],
        "omega_clusters": [{"point": c.point, "multiplicity": c.multiplicity} for c in omega],
        "map": mp.describe(),
        "metric": metric.describe(),
        "config_digest": cfg.digest,
    }
    _emit(out, record, _trace_csv(trace), "orbit", default_fmt="csv")
    out.figure("orbit.png", "plot_orbit", metric, trace)
    return EXIT_OK


def cmd_attractor(args, cfg, out):
    mp, metric = _map_and_metric(cfg)
    seeds = build_seeds(cfg, metric)
    est = attractor(mp, seeds, int(cfg["n_steps"]), tail_fraction=cfg["tail_fraction"],
                    cluster_radius=cfg["cluster_radius"], metric=metric, params=build_params(cfg))
    record = est.to_dict()
    record.update({"n_seeds": len(seeds), "map": mp.describe(), "metric": metric.describe(), "config_digest": cfg.digest})
    n = metric.point_dim
    rows = [[str(i)] + [fmt_float(v) for v in c.point] + [str(c.multiplicity), str(len(c.seeds))]
            for i, c in enumerate(est.omega_points)]
    csv = csv_text(["cluster"] + [f"x{i + 1}" for i in range(n)] + ["multiplicity", "n_seeds"], rows)
    _emit(out, record, csv, "attractor")
    out.figure("attractor.png", "plot_attractor", metric, est, seeds)
    return EXIT_OK


def cmd_semigroup(args, cfg, out):
    if cfg["generator"] is None:
        raise ConfigError("config needs a 'generator' entry")
    try:
        sg = build_semigroup(cfg["generator"])
    except (HilbertDynError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid generator: {exc}") from exc
    metric = sg.default_metric()
    seeds = build_seeds(cfg, metric)
    t0, horizon = float(cfg["t0"]), float(cfg["horizon"])
    params = build_params(cfg)
    res = semigroup_attractor(sg, t0, seeds, horizon, tail_fraction=cfg["tail_fraction"],
                              cluster_radius=cfg["cluster_radius"], metric=metric, params=params)
    grid = np.arange(0.0, horizon + 0.5 * cfg["t_step"], float(cfg["t_step"]))
    trace = semigroup_orbit(sg, seeds[0], grid, metric)
    record = {
        "t0": t0,
        "horizon": horizon,
        "skeleton": res.skeleton.to_dict(),
        "dense": res.dense.to_dict(),
        "hausdorff": res.hausdorff,
        "generator": sg.describe(),
        "metric": metric.describe(),
        "config_digest": cfg.digest,
    }
    dw = None
    try:
        dw = denjoy_wolff(metric, sg, seeds, seeds, t_grid=grid, tail_fraction=cfg["tail_fraction"],
                          cluster_radius=cfg["cluster_radius"], params=params)
        record["denjoy_wolff"] = {"xi": dw.xi, "final_sup": float(dw.sup_dist_curve[-1])}
    except RegimeError as exc:
        record["denjoy_wolff"] = {"not_applicable": str(exc)}
    _emit(out, record, _trace_csv(trace), "semigroup")
    if dw is not None:
        out.file("sup_curve.csv", csv_text(["time", "sup_dist"], [[t, v] for t, v in zip(dw.times, dw.sup_dist_curve)]))
        out.figure("sup_curve.png", "plot_sup_curve", dw.times, dw.sup_dist_curve, tol=cfg["tol_dw"])
    out.figure("semigroup.png", "plot_orbit", metric, trace)
    return EXIT_OK


def cmd_horoball(args, cfg, out):
    body = build_body(cfg)
    metric = build_metric(cfg, body)
    h = cfg["horoball"]
    if h.get("center") is None:
        raise ConfigError("horoball needs a 'center' on the boundary")
    pole = h["pole"] if h.get("pole") is not None else metric.from_body(body.interior_point[None, :])[0]
    spec = HoroballSpec(pole, h["center"], float(h["radius"]), h.get("kind", "big"))
    a = cfg["approach"]
    policy = ApproachPolicy(float(a["lam"]), int(a["steps"]), int(a["tail"]))
    pts, lo, hi, member = horoball_grid(metric, spec, int(h.get("grid", 41)), policy)
    header = [f"x{i + 1}" for i in range(body.dim)] + ["horofunction_lo", "horofunction_hi", "member"]
    rows = [[fmt_float(v) for v in p] + [fmt_float(l_), fmt_float(h_), str(int(m))] for p, l_, h_, m in zip(pts, lo, hi, member)]
    csv = csv_text(header, rows)
    record = {"pole": spec.pole, "center": spec.center, "radius": spec.radius, "kind": spec.kind,
              "n_points": len(pts), "n_members": int(np.sum(member)), "metric": metric.describe(),
              "config_digest": cfg.digest}
    _emit(out, record, csv, "horoball", default_fmt="csv")
    out.figure("horoball.png", "plot_horoball", metric, pts, lo, member, spec)
    return EXIT_OK


def cmd_verify(args, cfg, out):
    from .verify import run_suite, suite_names

    if args.suite not in suite_names():
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(suite_names())}")
    rep = run_suite(args.suite, cfg, int(cfg["master_seed"]))
    text = dumps(rep.to_dict(), indent=2) + "\n"
    out.file(f"verify-{args.suite}.json", text)
    sys.stdout.write(text)
    return rep.exit_code


COMMANDS = {
    "dist": cmd_dist,
    "orbit": cmd_orbit,
    "attractor": cmd_attractor,
    "semigroup": cmd_semigroup,
    "horoball": cmd_horoball,
    "verify": cmd_verify,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--seed", type=int, help="master seed (u64); overrides the config")
    common.add_argument("--out", help="directory for CSV/JSON/PNG artifacts")
    common.add_argument("--format", choices=["json", "csv"], help="what to print on standard output")

    ap = argparse.ArgumentParser(prog="hilbertdyn", description="Hilbert-metric geometry and nonexpansive dynamics lab.",
                                 epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("dist", parents=[common], help="distance between two points",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--body", help="JSON body, or interval | square | disc | bidisc | simplex:N")
    p.add_argument("--x", help="comma-separated coordinates")
    p.add_argument("--y", help="comma-separated coordinates")
    for name, text in [("orbit", "iterate a map and print the orbit CSV"),
                       ("attractor", "omega-limit clusters and Denjoy-Wolff estimate over many seeds"),
                       ("semigroup", "skeleton vs dense-time attractor of a matrix semigroup"),
                       ("horoball", "horofunction grid CSV")]:
        sub.add_parser(name, parents=[common], help=text, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p = sub.add_parser("verify", parents=[common], help="run a named property suite")
    p.add_argument("suite", help="suite name, or 'all'")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        over = {}
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            over["master_seed"] = args.seed
        if args.out:
            over["out"] = args.out
        if over:
            cfg = cfg.with_overrides(**over)
        out = Output(cfg["out"], args.format)
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PrecisionWarning)
            return COMMANDS[args.command](args, cfg, out)
    except (ConfigError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: malformed config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except INPUT_ERRORS as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HilbertDynError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
