"""Matrix exponential by scaling and squaring of the Taylor series."""
from __future__ import annotations

import math

import numpy as np

TAYLOR_TOL = 1e-12


def _taylor(B, tol):
    n = B.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, 60):
        term = term @ B / k
        out = out + term
        if np.max(np.abs(term)) <= tol * np.max(np.abs(out)) * 1e-4:
            break
    return out


def expm(A, tol: float = TAYLOR_TOL) -> np.ndarray:
    """exp(A) to relative accuracy ``tol``.

    The matrix is scaled by 2**-s so that its 1-norm is at most 1/2, the
    Taylor series is summed until the next term is negligible, and the
    result is squared s times.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    norm = np.max(np.sum(np.abs(A), axis=0)) if A.size else 0.0
    s = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    E = _taylor(A / 2.0**s, tol)
    for _ in range(s):
        E = E @ E
    return E


def projective_expm(A, t: float, tol: float = TAYLOR_TOL) -> tuple[np.ndarray, float]:
    """exp(tA) as (E, log_scale) with exp(tA) = exp(log_scale) * E.

    For a Metzler A (nonnegative off-diagonal) the diagonal shift
    A - mu*I is entrywise nonnegative, so every Taylor term is nonnegative and
    nothing cancels.  E is renormalised after each squaring, which keeps
    long times (t ~ 1e3 with positive spectrum) finite.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    mu = float(np.min(np.diag(A)))
    B = t * (A - mu * np.eye(A.shape[0]))
    norm = np.max(np.sum(np.abs(B), axis=0))
    s = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    E = _taylor(B / 2.0**s, tol)
    log_scale = 0.0
    for _ in range(s):
        # M = exp(log_scale) * E  =>  M^2 = exp(2 log_scale) * E^2
        E = E @ E
        c = float(np.max(np.abs(E)))
        E = E / c
        log_scale = 2.0 * log_scale + math.log(c)
    return E, log_scale + t * mu
