"""Dynamics on the switching line: regions, sliding field, tangencies, pseudo-equilibria.

Everything here evaluates on the switching line ``y = 0`` of a
:class:`~foldcusp.families.FilippovSystem`; abscissas are plain floats or
arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .planefield import lie_derivative
from .rootscan import scan_roots

__all__ = [
    "SigmaPointClass",
    "TangencyKind",
    "PseudoKind",
    "Tangency",
    "PseudoEquilibrium",
    "DirectionValue",
    "SlidingSingularError",
    "lie_on_sigma",
    "classify_sigma_point",
    "classify_sigma",
    "sliding_field",
    "direction_function",
    "find_tangencies",
    "find_pseudo_equilibria",
    "count_identity_check",
    "region_layout",
    "coincidence_tol",
    "STANDARD_CUSP_DISCREPANCY",
]

SIGN_TOL = 1e-9
GRID_CELLS = 2048


class SigmaPointClass(str, Enum):
    Crossing = "Crossing"
    Sliding = "Sliding"
    Escaping = "Escaping"
    TangentialSingularity = "TangentialSingularity"
    PseudoEquilibrium = "PseudoEquilibrium"
    BoundaryPoint = "BoundaryPoint"


class TangencyKind(str, Enum):
    FoldVisible = "FoldVisible"
    FoldInvisible = "FoldInvisible"
    CuspKind1 = "CuspKind1"
    CuspKind2 = "CuspKind2"
    FoldCusp = "FoldCusp"
    Degenerate = "Degenerate"


class PseudoKind(str, Enum):
    SigmaSaddle = "SigmaSaddle"
    SigmaAttractor = "SigmaAttractor"
    SigmaRepeller = "SigmaRepeller"
    Virtual = "Virtual"
    BoundaryPoint = "BoundaryPoint"
    Degenerate = "Degenerate"


class SlidingSingularError(ZeroDivisionError):
    """``X.f = Y.f`` at the point: the segment joining X and Y is parallel to the line."""


# The standard form with rho = (1, -1, -1, -1) is named a kind-1 cusp in the
# literature although its third Lie derivative is negative.
STANDARD_CUSP_DISCREPANCY = {
    "rho": (1, -1, -1, -1),
    "named_kind": "CuspKind1",
    "computed_Y3f": -2.0,
    "computed_kind": "CuspKind2",
}


def coincidence_tol(window: float) -> float:
    """Two distinguished abscissas are equal when closer than this."""
    return 1e-7 * (1.0 + window)


def lie_on_sigma(Z, x, which: str, k: int = 1):
    x = np.asarray(x, float)
    return lie_derivative(Z.component(which), Z.f, (x, np.zeros_like(x)), k)


def _components(Z, x):
    x = np.asarray(x, float)
    y = np.zeros_like(x)
    return Z.X.value(x, y), Z.Y.value(x, y)


@dataclass(frozen=True)
class DirectionValue:
    """``H = numerator / denominator``; ``defined`` is False where the denominator vanishes."""

    H: float
    numerator: float
    denominator: float
    defined: bool


def _num_den(Z, x):
    Xv, Yv = _components(Z, x)
    Xf = lie_on_sigma(Z, x, "X")
    Yf = lie_on_sigma(Z, x, "Y")
    return Yf * Xv[0] - Xf * Yv[0], Yf - Xf, Xf, Yf


def direction_function(Z, x, tol: float = 1e-14):
    """Direction function ``H`` at ``x`` (scalar) with numerator and denominator.

    For arrays of abscissas a tuple of arrays ``(H, numerator, denominator)``
    is returned, with ``H = nan`` where it is not defined.
    """
    num, den, _, _ = _num_den(Z, x)
    if np.ndim(num) == 0:
        num, den = float(num), float(den)
        if abs(den) <= tol:
            return DirectionValue(float("nan"), num, den, False)
        return DirectionValue(num / den, num, den, True)
    with np.errstate(divide="ignore", invalid="ignore"):
        H = np.where(np.abs(den) > tol, num / den, np.nan)
    return H, num, den


def sliding_field(Z, x):
    """Filippov convex combination ``(Y.f X - X.f Y) / (Y.f - X.f)`` at ``(x, 0)``."""
    Xv, Yv = _components(Z, x)
    Xf = float(lie_on_sigma(Z, x, "X"))
    Yf = float(lie_on_sigma(Z, x, "Y"))
    den = Yf - Xf
    if abs(den) <= 1e-14 * max(1.0, abs(Xf), abs(Yf)):
        raise SlidingSingularError(f"X.f = Y.f = {Xf:.6g} at x = {float(x):.6g}: convex combination misses the line")
    return np.array([(Yf * Xv[0] - Xf * Yv[0]) / den, (Yf * Xv[1] - Xf * Yv[1]) / den])


def _sign_class(Xf, Yf):
    if Xf * Yf > 0:
        return SigmaPointClass.Crossing
    if Xf < 0 < Yf:
        return SigmaPointClass.Sliding
    return SigmaPointClass.Escaping


def classify_sigma_point(Z, x: float, tol: float = SIGN_TOL) -> SigmaPointClass:
    """Class of the point ``(x, 0)`` by the sign table of the first Lie derivatives."""
    Xf = float(lie_on_sigma(Z, x, "X"))
    Yf = float(lie_on_sigma(Z, x, "Y"))
    small_x, small_y = abs(Xf) < tol, abs(Yf) < tol
    if small_x and small_y:
        return SigmaPointClass.BoundaryPoint
    if small_x or small_y:
        # one field tangent: the sliding limit is the other field's first component
        limit = sliding_field(Z, x)[0]
        return SigmaPointClass.TangentialSingularity if abs(limit) > tol else SigmaPointClass.BoundaryPoint
    cls = _sign_class(Xf, Yf)
    if cls is not SigmaPointClass.Crossing:
        num = float(Yf * _components(Z, x)[0][0] - Xf * _components(Z, x)[1][0])
        if abs(num) < tol:
            return SigmaPointClass.PseudoEquilibrium
    return cls


def classify_sigma(Z, xs, tol: float = SIGN_TOL):
    """Vectorised region classes (Crossing / Sliding / Escaping / TangentialSingularity) as strings."""
    xs = np.asarray(xs, float)
    Xf = lie_on_sigma(Z, xs, "X")
    Yf = lie_on_sigma(Z, xs, "Y")
    out = np.where(Xf * Yf > 0, SigmaPointClass.Crossing.value, np.where(Xf < Yf, SigmaPointClass.Sliding.value, SigmaPointClass.Escaping.value))
    out = np.where((np.abs(Xf) < tol) | (np.abs(Yf) < tol), SigmaPointClass.TangentialSingularity.value, out)
    return out


@dataclass(frozen=True)
class Tangency:
    """A zero of ``W.f`` on the line.

    ``kind`` follows the sign rule on ``W^2.f`` / ``W^3.f``.  ``visible`` is the
    geometric notion: the orbit through the fold stays in the field's own
    half-plane (``X^2.f > 0`` for the upper field, ``Y^2.f < 0`` for the
    lower one).  ``base_kind`` keeps the fold/cusp type when ``kind`` is
    ``FoldCusp``.
    """

    owner: str
    location: float
    kind: TangencyKind
    base_kind: TangencyKind
    lie2: float
    lie3: float
    visible: Optional[bool]


def _classify_tangency(Z, owner, x, tol=SIGN_TOL):
    l2 = float(lie_on_sigma(Z, x, owner, 2))
    l3 = float(lie_on_sigma(Z, x, owner, 3))
    if abs(l2) >= tol:
        kind = TangencyKind.FoldVisible if l2 > 0 else TangencyKind.FoldInvisible
        visible = l2 > 0 if owner == "X" else l2 < 0
    elif abs(l3) >= tol:
        kind = TangencyKind.CuspKind1 if l3 > 0 else TangencyKind.CuspKind2
        visible = None
    else:
        kind = TangencyKind.Degenerate
        visible = None
    return Tangency(owner, float(x), kind, kind, l2, l3, visible)


def find_tangencies(Z, window: Optional[float] = None, n_cells: int = GRID_CELLS):
    """All tangency points of X and Y on ``[-window, window]``, sorted by abscissa."""
    r = Z.window if window is None else window
    found = []
    for owner in ("X", "Y"):
        roots = scan_roots(lambda x, o=owner: lie_on_sigma(Z, x, o), -r, r, n_cells)
        found.extend(_classify_tangency(Z, owner, x) for x in roots)
    tol = coincidence_tol(r)
    folds = (TangencyKind.FoldVisible, TangencyKind.FoldInvisible)
    cusps = (TangencyKind.CuspKind1, TangencyKind.CuspKind2)
    out = []
    for t in found:
        partner = [
            u for u in found
            if u.owner != t.owner and abs(u.location - t.location) < tol
            and ((t.base_kind in folds and u.base_kind in cusps) or (t.base_kind in cusps and u.base_kind in folds))
        ]
        if partner:
            t = Tangency(t.owner, t.location, TangencyKind.FoldCusp, t.base_kind, t.lie2, t.lie3, t.visible)
        out.append(t)
    return sorted(out, key=lambda t: (t.location, t.owner))


@dataclass(frozen=True)
class PseudoEquilibrium:
    location: float
    kind: PseudoKind
    region: str
    reason: str = ""


def _stability_from_H(Z, x0, r):
    """+1 for a repeller of the sliding flow (H from - to +), -1 for an attractor, 0 otherwise."""
    for d in (1e-6, 1e-5, 1e-4):
        delta = d * max(1.0, r)
        H, _, _ = direction_function(Z, np.array([x0 - delta, x0 + delta]))
        if np.all(np.isfinite(H)) and H[0] != 0 and H[1] != 0:
            if H[0] < 0 < H[1]:
                return 1
            if H[0] > 0 > H[1]:
                return -1
            return 0
    return 0


def find_pseudo_equilibria(Z, window: Optional[float] = None, n_cells: int = GRID_CELLS):
    """Inventory of pseudo-equilibria (real and virtual) on ``[-window, window]``.

    Real ones are zeros of the numerator of ``H`` inside the sliding or
    escaping region, typed by the sign change of ``H``.  Virtual ones are the
    numerator zeros in the crossing region (there ``X`` and ``Y`` are
    collinear) and the zeros of the denominator (``X.f = Y.f``).
    """
    r = Z.window if window is None else window
    num = lambda x: _num_den(Z, x)[0]
    den = lambda x: _num_den(Z, x)[1]
    nroots = scan_roots(num, -r, r, n_cells)
    droots = scan_roots(den, -r, r, n_cells)
    tol = coincidence_tol(r)
    out = []
    for x0 in nroots:
        if droots.size and np.min(np.abs(droots - x0)) < tol:
            continue  # handled with the denominator zeros
        Xf = float(lie_on_sigma(Z, x0, "X"))
        Yf = float(lie_on_sigma(Z, x0, "Y"))
        if abs(Xf) < SIGN_TOL or abs(Yf) < SIGN_TOL:
            out.append(PseudoEquilibrium(float(x0), PseudoKind.BoundaryPoint, "boundary", "on a tangency"))
            continue
        region = _sign_class(Xf, Yf)
        if region is SigmaPointClass.Crossing:
            out.append(PseudoEquilibrium(float(x0), PseudoKind.Virtual, region.value, "collinear"))
            continue
        st = _stability_from_H(Z, x0, r)
        if st == 0:
            kind = PseudoKind.Degenerate
        elif region is SigmaPointClass.Escaping:
            kind = PseudoKind.SigmaRepeller if st > 0 else PseudoKind.SigmaSaddle
        else:
            kind = PseudoKind.SigmaSaddle if st > 0 else PseudoKind.SigmaAttractor
        out.append(PseudoEquilibrium(float(x0), kind, region.value))
    for x0 in droots:
        Xf = float(lie_on_sigma(Z, x0, "X"))
        if abs(Xf) < SIGN_TOL:
            out.append(PseudoEquilibrium(float(x0), PseudoKind.BoundaryPoint, "boundary", "both fields tangent"))
        else:
            out.append(PseudoEquilibrium(float(x0), PseudoKind.Virtual, SigmaPointClass.Crossing.value, "no-intersection"))
    return sorted(out, key=lambda p: p.location)


def count_identity_check(Z, window: Optional[float] = None, n_cells: int = GRID_CELLS):
    """``(n1, n2, v1, v2, holds)`` for the counting identity ``n1 + n2 = v1 + v2``.

    n1: pseudo-equilibria, n2: virtual ones, v1: zeros of ``H`` (numerator
    zeros where the denominator does not vanish), v2: points where the
    segment joining X and Y misses the line (denominator zeros).
    """
    r = Z.window if window is None else window
    inv = find_pseudo_equilibria(Z, r, n_cells)
    n2 = sum(p.kind is PseudoKind.Virtual for p in inv)
    n1 = len(inv) - n2
    nroots = scan_roots(lambda x: _num_den(Z, x)[0], -r, r, n_cells)
    droots = scan_roots(lambda x: _num_den(Z, x)[1], -r, r, n_cells)
    tol = coincidence_tol(r)
    v1 = int(sum(not (droots.size and np.min(np.abs(droots - x)) < tol) for x in nroots))
    v2 = int(droots.size)
    return n1, n2, v1, v2, n1 + n2 == v1 + v2


def region_layout(Z, window: Optional[float] = None, tangencies=None):
    """Ordered ``(lo, hi, class)`` intervals of the line between tangency points."""
    r = Z.window if window is None else window
    tang = find_tangencies(Z, r) if tangencies is None else tangencies
    tol = coincidence_tol(r)
    cuts = [-r]
    for x in sorted(t.location for t in tang if -r + tol < t.location < r - tol):
        if x - cuts[-1] > tol:
            cuts.append(x)
    cuts.append(r)
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (lo + hi)
        cls = str(classify_sigma(Z, np.array([mid]))[0])
        if out and out[-1][2] == cls:
            out[-1] = (out[-1][0], hi, cls)
        else:
            out.append((lo, hi, cls))
    return out
