"""Small scalar solvers and a symmetric eigenvalue routine.

Everything here works on problems of a handful of unknowns, so the routines
favour transparency over speed.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import NoSolutionError, NumericError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def bisect(fn: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-6,
           max_iter: int = 200) -> float:
    """Find a sign change of ``fn`` on ``[lo, hi]`` by plain bisection.

    Returns the midpoint of the final bracket, whose width is below ``xtol``.
    Raises :class:`NoSolutionError` when ``fn(lo)`` and ``fn(hi)`` share a sign.
    """
    f_lo = fn(lo)
    f_hi = fn(hi)
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise NumericError(f"non-finite bracket values f({lo})={f_lo}, f({hi})={f_hi}")
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoSolutionError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < xtol:
            break
    return 0.5 * (lo + hi)


def golden_section_minimize(fn: Callable[[float], float], a: float, b: float,
                            tol: float = 1e-5) -> float:
    """Golden-section search for the minimum of a unimodal function on ``[a, b]``.

    The number of function evaluations is fixed in advance from ``tol``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc = fn(c)
    yd = fn(d)
    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI_SQ * h
            yc = fn(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = fn(d)
    if yc < yd:
        return 0.5 * (a + d)
    return 0.5 * (c + b)


def is_unimodal(values) -> bool:
    """True when a sampled sequence decreases then increases (ties allowed)."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return True
    i = int(np.argmin(v))
    left = np.diff(v[: i + 1])
    right = np.diff(v[i:])
    return bool(np.all(left <= 0) and np.all(right >= 0))


def jacobi_eigvalsh(matrix, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a small real symmetric matrix by cyclic Jacobi rotations.

    Returns the eigenvalues in ascending order. A pivot is skipped once
    ``|a_pq| <= tol * sqrt(|a_pp a_qq|)``, which keeps small eigenvalues of
    graded matrices accurate in a relative sense; iteration ends after a sweep
    with no rotations.
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                app, aqq = a[p, p], a[q, q]
                if abs(apq) <= tol * math.sqrt(abs(app * aqq)) or apq == 0.0:
                    continue
                rotated = True
                theta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
        if not rotated:
            break
    return np.sort(np.diag(a))
