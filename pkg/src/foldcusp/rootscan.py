"""Bracketing root scans for scalar functions on an interval."""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq, minimize_scalar


def scan_roots(fun, lo: float, hi: float, n_cells: int = 2048, touch_tol: float = 1e-9, xtol: float = 1e-13):
    """All roots of a vectorised ``fun`` on ``[lo, hi]``.

    Sign changes on a uniform grid are refined with Brent's method.  Roots of
    even multiplicity (no sign change) are caught as local minima of ``|fun|``
    whose refined value is below ``touch_tol``.
    """
    xs = np.linspace(lo, hi, n_cells + 1)
    vs = np.asarray(fun(xs), float)
    roots = list(xs[vs == 0.0])
    sv = np.sign(vs)
    idx = np.nonzero(sv[:-1] * sv[1:] < 0)[0]
    scalar = lambda t: float(fun(np.asarray(t)))
    for i in idx:
        roots.append(brentq(scalar, xs[i], xs[i + 1], xtol=xtol, rtol=1e-15, maxiter=200))
    av = np.abs(vs)
    mid, left, right = av[1:-1], av[:-2], av[2:]
    # strict on one side so that flat stretches do not count as minima
    interior = np.nonzero((mid <= left) & (mid <= right) & ((mid < left) | (mid < right)) & (vs[1:-1] != 0.0))[0] + 1
    for i in interior:
        if sv[i - 1] * sv[i + 1] <= 0 and (sv[i - 1] != sv[i] or sv[i + 1] != sv[i]):
            continue  # already bracketed
        res = minimize_scalar(lambda t: abs(scalar(t)), bounds=(xs[i - 1], xs[i + 1]), method="bounded", options={"xatol": 1e-13})
        if res.fun < touch_tol:
            roots.append(float(res.x))
    if not roots:
        return np.array([])
    roots = np.sort(np.array(roots, float))
    keep = [roots[0]]
    for r in roots[1:]:
        if r - keep[-1] > 1e-9 * max(1.0, abs(r)):
            keep.append(r)
    return np.array(keep)
