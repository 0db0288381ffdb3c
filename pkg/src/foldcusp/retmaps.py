"""Return maps on the switching line and canard-cycle detection.

For the invisible family the half-return maps are explicit: the upper field
reflects about its fold, ``rho_X(x) = 2 lam - x``, and the lower field
returns along level sets of the potential, ``F(rho_Y(x)) = F(x)``.  The
first-return map is ``psi(x) = 2 lam - rho_Y(x)`` on ``(sqrt(beta), c)`` with
``c = 3 sqrt(beta) + mu``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, List, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .families import FoldCuspParams, bump_construct, potential_F
from .planefield import PRECISE, OrbitArc, flow_to_section
from .switching import (
    SigmaPointClass,
    classify_sigma,
    coincidence_tol,
    direction_function,
    find_tangencies,
)

__all__ = [
    "DomainError",
    "Stability",
    "CycleKind",
    "SectionMap",
    "FixedPointRecord",
    "CanardCycle",
    "LowerReturn",
    "lower_return",
    "fold_transition_xi",
    "fold_transition_xi_inverse",
    "fold_transition_xi_inverse_derivative",
    "rho_X",
    "rho_X_flow",
    "rho_Y",
    "first_return_psi",
    "psi_map",
    "psi_flow",
    "fixed_points",
    "detect_canard_cycles",
    "kind_three_geometry",
]

MULTIPLIER_BAND = 1e-4
CLOSURE_TOL = 1e-7


class DomainError(ValueError):
    """Argument outside the domain of a section map."""


class Stability(str, Enum):
    Attracting = "Attracting"
    Repelling = "Repelling"
    NonHyperbolic = "NonHyperbolic"
    TwoSided = "TwoSided"


class CycleKind(str, Enum):
    I = "I"
    II = "II"
    III = "III"


# ---------------------------------------------------------------- fold transition

def fold_transition_xi(xbar, delta: float):
    """Transition ``sqrt(xbar**2 - 2 delta)`` from the section ``y = delta`` to the line."""
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    xbar = np.asarray(xbar, float)
    lo = math.sqrt(2.0 * delta)
    if np.any(xbar < lo * (1 - 1e-15)):
        raise DomainError(f"xbar must be at least sqrt(2 delta) = {lo:.6g}")
    out = np.sqrt(np.maximum(xbar * xbar - 2.0 * delta, 0.0))
    return out if out.ndim else float(out)


def fold_transition_xi_inverse(x, delta: float):
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    x = np.asarray(x, float)
    out = np.sqrt(x * x + 2.0 * delta)
    return out if out.ndim else float(out)


def fold_transition_xi_inverse_derivative(x, delta: float):
    x = np.asarray(x, float)
    out = x / np.sqrt(x * x + 2.0 * delta)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- half-return maps

def rho_X(lam: float, x):
    """Return of the upper field ``(1, lam - x)``: reflection about ``x = lam``."""
    x = np.asarray(x, float)
    out = 2.0 * lam - x
    return out if out.ndim else float(out)


def rho_X_flow(Z, x: float, window: Optional[float] = None) -> Optional[float]:
    """First return of the upper field of ``Z`` from ``(x, 0)``, by integration."""
    res = flow_to_section(Z.X, (x, 0.0), Z.f, 1, window=Z.window if window is None else window, tag="X", **PRECISE)
    return None if res.hit is None else float(res.hit[0])


class LowerReturn:
    """Half-return map of the lower field of the invisible family.

    ``rho_Y(x)`` is the solution in ``(-sqrt(beta), sqrt(beta))`` of
    ``F(xi) = F(x)``, found by vectorised bisection to ``1e-12``.
    """

    def __init__(self, beta: float, mu: float, bump=None):
        if beta <= 0:
            raise DomainError("the lower return map needs beta > 0")
        self.beta = beta
        self.mu = mu
        self.bump = bump_construct(beta, mu) if bump is None else bump
        self.s = math.sqrt(beta)
        self.a = -self.s
        self.b = self.s
        self.c = 3.0 * self.s + mu
        self.domain = (self.b, self.c)

    def F(self, x, nu: int = 0):
        return potential_F(self.beta, self.bump, x, nu)

    def _check(self, x, strict=True):
        lo, hi = self.domain
        if strict:
            bad = (x <= lo) | (x >= hi)
        else:
            bad = (x < lo) | (x > hi)
        if np.any(bad):
            raise DomainError(f"x must lie in ({lo:.6g}, {hi:.6g})")

    def __call__(self, x, closed: bool = False):
        x = np.asarray(x, float)
        self._check(x, strict=not closed)
        level = self.F(x)
        lo = np.full(x.shape, self.a)
        hi = np.full(x.shape, self.b)
        # F decreases on (a, b): keep F(lo) >= level >= F(hi)
        while True:
            mid = 0.5 * (lo + hi)
            above = self.F(mid) > level
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.all(hi - lo <= 1e-12 * max(1.0, self.s) * 0.5):
                break
        out = 0.5 * (lo + hi)
        # at the closed ends the level equation has a double root; pin it
        out = np.where(x == self.c, self.a, np.where(x == self.b, self.b, out))
        return out if out.ndim else float(out)

    def derivative(self, x, rho=None):
        x = np.asarray(x, float)
        rho = self(x) if rho is None else rho
        return self.F(x, 1) / self.F(rho, 1)

    def second_derivative(self, x, rho=None, drho=None):
        x = np.asarray(x, float)
        rho = self(x) if rho is None else rho
        drho = self.derivative(x, rho) if drho is None else drho
        return (self.F(x, 2) - self.F(rho, 2) * drho**2) / self.F(rho, 1)


@lru_cache(maxsize=256)
def lower_return(beta: float, mu: float) -> LowerReturn:
    return LowerReturn(beta, mu)


def rho_Y(params: FoldCuspParams, x, bump=None):
    if params.beta <= 0:
        raise DomainError("the lower return map needs beta > 0")
    lr = lower_return(params.beta, params.mu) if bump is None else LowerReturn(params.beta, params.mu, bump)
    return lr(x)


def first_return_psi(params: FoldCuspParams, x, bump=None):
    """``psi(x) = 2 lam - rho_Y(x)``."""
    return rho_X(params.lam, rho_Y(params, x, bump))


# ---------------------------------------------------------------- section maps

@dataclass
class SectionMap:
    domain: tuple
    eval: Callable
    provenance: str = "ClosedForm"
    derivative: Optional[Callable] = None
    vectorized: bool = True

    def __call__(self, x):
        return self.eval(x)

    def is_monotone(self, n: int = 512) -> bool:
        lo, hi = self.domain
        xs = np.linspace(lo, hi, n + 2)[1:-1]
        vs = self.eval(xs) if self.vectorized else np.array([self.eval(v) for v in xs])
        return bool(np.all(np.diff(vs) > 0) or np.all(np.diff(vs) < 0))


def psi_map(params: FoldCuspParams, bump=None) -> SectionMap:
    lr = lower_return(params.beta, params.mu) if bump is None else LowerReturn(params.beta, params.mu, bump)
    lam = params.lam
    return SectionMap(
        lr.domain,
        lambda x: rho_X(lam, lr(x)),
        "ClosedForm",
        derivative=lambda x: -lr.derivative(x),
    )


def psi_flow(Z, x: float) -> Optional[float]:
    """First return by integrating the lower field then the upper field."""
    r = Z.window
    res = flow_to_section(Z.Y, (x, 0.0), Z.f, 1, window=r, tag="Y", **PRECISE)
    if res.hit is None:
        return None
    res2 = flow_to_section(Z.X, res.hit, Z.f, 1, window=r, tag="X", **PRECISE)
    return None if res2.hit is None else float(res2.hit[0])


@dataclass(frozen=True)
class FixedPointRecord:
    location: float
    multiplier: float
    stability: Stability
    endpoint: bool = False


def _stability_of(mult: float, band: float = MULTIPLIER_BAND) -> Stability:
    if abs(abs(mult) - 1.0) < band:
        return Stability.NonHyperbolic
    return Stability.Attracting if abs(mult) < 1.0 else Stability.Repelling


def fixed_points(smap: SectionMap, n_grid: int = 4096, touch_tol: float = 1e-8, h: float = 1e-6) -> List[FixedPointRecord]:
    """Fixed points of a monotone section map, interior ones first.

    Roots of ``psi(x) - x`` are bracketed on ``n_grid`` samples and polished
    with Brent's method to ``1e-11``; tangential roots are found at local
    extrema of ``psi(x) - x``.  Multipliers use a central difference with
    step ``h``.  Roots at the domain ends come back with ``endpoint=True``.
    """
    lo, hi = smap.domain
    span = hi - lo
    eps = 1e-9 * max(1.0, span)
    xs = np.linspace(lo + eps, hi - eps, n_grid)
    ev = smap.eval if smap.vectorized else np.vectorize(smap.eval)
    g = np.asarray(ev(xs), float) - xs
    gs = lambda t: float(ev(np.asarray(t))) - t
    roots = []
    sg = np.sign(g)
    for i in np.nonzero(sg[:-1] * sg[1:] < 0)[0]:
        roots.append(brentq(gs, xs[i], xs[i + 1], xtol=1e-13, rtol=1e-15))
    roots.extend(xs[g == 0.0])
    ag = np.abs(g)
    for i in np.nonzero((ag[1:-1] <= ag[:-2]) & (ag[1:-1] <= ag[2:]))[0] + 1:
        if sg[i - 1] != sg[i + 1] or g[i] == 0.0:
            continue
        res = minimize_scalar(lambda t: abs(gs(t)), bounds=(xs[i - 1], xs[i + 1]), method="bounded", options={"xatol": 1e-12})
        if res.fun < touch_tol:
            roots.append(float(res.x))
    roots = sorted(roots)
    merged = []
    for r in roots:
        if not merged or r - merged[-1] > 1e-9 * max(1.0, span):
            merged.append(r)
    out = []
    end_tol = 1e-7 * max(1.0, span)
    for r in merged:
        endpoint = r - lo < end_tol or hi - r < end_tol
        hh = min(h, 0.5 * (r - lo), 0.5 * (hi - r))
        if hh <= 0:
            mult = float("nan")
        else:
            mult = (gs(r + hh) + (r + hh) - gs(r - hh) - (r - hh)) / (2 * hh)
        out.append(FixedPointRecord(float(r), float(mult), _stability_of(mult) if np.isfinite(mult) else Stability.NonHyperbolic, endpoint))
    for side, x_end in ((0, lo), (1, hi)):
        try:
            val = float(ev(np.asarray(x_end)))
        except DomainError:
            continue
        if abs(val - x_end) < 1e-9 * max(1.0, span) and not any(abs(p.location - x_end) < end_tol for p in out):
            out.append(FixedPointRecord(float(x_end), float("nan"), Stability.NonHyperbolic, True))
    return sorted(out, key=lambda p: (p.endpoint, p.location))


# ---------------------------------------------------------------- canard cycles

@dataclass
class CanardCycle:
    """Closed concatenation of orbit arcs; ``hyperbolic`` is ``None`` when undecided."""

    kind: CycleKind
    hyperbolic: Optional[bool]
    stability: Stability
    arcs: List[OrbitArc] = field(default_factory=list)
    anchor: Optional[float] = None
    multiplier: Optional[float] = None
    sigma_points: tuple = ()
    closure_error: Optional[float] = None
    note: str = ""

    @property
    def closed(self) -> bool:
        return self.closure_error is not None and self.closure_error < CLOSURE_TOL


def _closure_error(arcs):
    gaps = []
    for a1, a2 in zip(arcs, arcs[1:] + arcs[:1]):
        gaps.append(float(np.max(np.abs(a1.end - a2.start))))
    return max(gaps)


def _sliding_arc(Z, x_from: float, x_to: float, n: int = 200) -> OrbitArc:
    xs = np.linspace(x_from, x_to, n)
    H, _, _ = direction_function(Z, xs)
    speed = np.abs(H)
    dt = np.abs(np.diff(xs)) * 0.5 * (1.0 / speed[1:] + 1.0 / speed[:-1])
    t = np.concatenate([[0.0], np.cumsum(dt)])
    return OrbitArc(t, np.column_stack([xs, np.zeros_like(xs)]), "Sliding", 1)


def _touches_both(Z, x: float, r: float) -> bool:
    d = 10 * coincidence_tol(r)
    cls = set(classify_sigma(Z, np.array([x - d, x + d])).tolist())
    return SigmaPointClass.Sliding.value in cls and SigmaPointClass.Escaping.value in cls


def _segment_slides(Z, q: float, s: float, n: int = 257) -> Optional[str]:
    """Region name if the sliding flow carries ``q`` to ``s`` through one region, else None."""
    xs = np.linspace(q, s, n)[1:-1]
    cls = classify_sigma(Z, xs)
    if not (np.all(cls == cls[0]) and cls[0] in (SigmaPointClass.Sliding.value, SigmaPointClass.Escaping.value)):
        return None
    H, _, _ = direction_function(Z, xs)
    want = np.sign(s - q)
    if np.all(np.isfinite(H)) and np.all(np.sign(H) == want):
        return str(cls[0])
    return None


def kind_three_geometry(params: FoldCuspParams, window: Optional[float] = None, Z=None, bump=None):
    """Closed-form kind-III test for the invisible family.

    Returns ``None`` or a dict with the landing point ``s = 2 lam - c`` of the
    backward upper orbit through ``c`` and the region of the sliding segment
    ``(s, a)`` (``None`` for the degenerate loop ``s = a``).
    """
    lam, beta, mu = params.as_tuple()
    if beta <= 0:
        return None
    from .families import default_window, make_invisible_family

    r = default_window(lam, beta, mu) if window is None else window
    tol = coincidence_tol(r)
    s_b = math.sqrt(beta)
    a, c = -s_b, 3 * s_b + mu
    s = 2 * lam - c
    if not lam < c - tol or s > a + tol or lam < a - tol:
        return None
    if abs(s - a) <= tol:
        return {"a": a, "c": c, "s": a, "region": None, "loop": True}
    if Z is None:
        Z = make_invisible_family(params, bump=bump, window=r, validate=False)
    region = _segment_slides(Z, a, s)
    if region is None:
        return None
    return {"a": a, "c": c, "s": s, "region": region, "loop": False}


def _kind_three_cycle(Z, q, c_prime, s, region, r, owner="Y", realize=True):
    loop = region is None
    if loop:
        hyperbolic, stability = False, Stability.Repelling
        note = "fold-to-fold loop without sliding segment"
    else:
        stability = Stability.Repelling if region == SigmaPointClass.Escaping.value else Stability.Attracting
        hyperbolic = not any(_touches_both(Z, x, r) for x in (q, s, c_prime))
        note = ""
    cyc = CanardCycle(CycleKind.III, hyperbolic, stability, anchor=q, sigma_points=(s, c_prime, q), note=note)
    if realize:
        other = "X" if owner == "Y" else "Y"
        back = flow_to_section(Z.component(owner), (q, 0.0), Z.f, -1, window=r, tag=owner, **PRECISE)
        up = flow_to_section(Z.component(other), (s, 0.0), Z.f, 1, window=r, tag=other, **PRECISE)
        if back.hit is None or up.hit is None:
            cyc.hyperbolic = None
            cyc.note = "arc realisation failed"
            return cyc
        arcs = [up.arc, back.arc.reversed()]
        if not loop:
            arcs.append(_sliding_arc(Z, q, s))
        cyc.arcs = arcs
        cyc.closure_error = _closure_error(arcs)
        if cyc.closure_error >= CLOSURE_TOL:
            cyc.hyperbolic = None
            cyc.note = f"closure {cyc.closure_error:.3g} above tolerance"
    return cyc


def _kind_one_cycles(Z, params, realize=True):
    out = []
    lr = LowerReturn(params.beta, params.mu, Z.bump) if Z.bump is not None else lower_return(params.beta, params.mu)
    smap = psi_map(params, lr.bump)
    for fp in fixed_points(smap):
        if fp.endpoint:
            continue
        if fp.stability is Stability.NonHyperbolic:
            g = smap.eval(np.array([fp.location - 1e-3 * lr.s, fp.location + 1e-3 * lr.s])) - np.array([fp.location - 1e-3 * lr.s, fp.location + 1e-3 * lr.s])
            stab = Stability.TwoSided if np.sign(g[0]) == np.sign(g[1]) else Stability.NonHyperbolic
            hyp = False
        else:
            stab, hyp = fp.stability, True
        cyc = CanardCycle(CycleKind.I, hyp, stab, anchor=fp.location, multiplier=fp.multiplier, sigma_points=(fp.location, float(lr(fp.location))))
        if realize:
            down = flow_to_section(Z.Y, (fp.location, 0.0), Z.f, 1, window=Z.window, tag="Y", **PRECISE)
            if down.hit is not None:
                up = flow_to_section(Z.X, down.hit, Z.f, 1, window=Z.window, tag="X", **PRECISE)
                if up.hit is not None:
                    cyc.arcs = [down.arc, up.arc]
                    cyc.closure_error = _closure_error(cyc.arcs)
            if not cyc.closed:
                cyc.hyperbolic = None
                cyc.note = "arc realisation did not close"
        out.append(cyc)
    return out


def _sigma_invariant(Z, r) -> bool:
    xs = np.linspace(-r, r, 257)
    from .switching import lie_on_sigma

    return bool(np.all(np.abs(lie_on_sigma(Z, xs, "X")) < 1e-12) and np.all(np.abs(lie_on_sigma(Z, xs, "Y")) < 1e-12))


def _generic_kind_three(Z, r, realize=True):
    out = []
    tol = coincidence_tol(r)
    for t in find_tangencies(Z, r):
        if not t.visible:
            continue
        q = t.location
        W = Z.component(t.owner)
        V = Z.component("X" if t.owner == "Y" else "Y")
        back = flow_to_section(W, (q, 0.0), Z.f, -1, window=r, **PRECISE)
        if back.hit is None:
            continue
        cp = float(back.hit[0])
        if str(classify_sigma(Z, np.array([cp]))[0]) != SigmaPointClass.Crossing.value:
            continue
        back2 = flow_to_section(V, back.hit, Z.f, -1, window=r, **PRECISE)
        if back2.hit is None:
            continue
        s = float(back2.hit[0])
        if abs(s - q) <= tol:
            out.append(_kind_three_cycle(Z, q, cp, q, None, r, t.owner, realize))
            continue
        region = _segment_slides(Z, q, s)
        if region is not None:
            out.append(_kind_three_cycle(Z, q, cp, s, region, r, t.owner, realize))
    return out


def detect_canard_cycles(Z, window: Optional[float] = None, realize: bool = True, method: str = "auto") -> List[CanardCycle]:
    """Canard cycles of ``Z`` inside the window.

    Kind I comes from interior fixed points of the first-return map, kind III
    from visible folds whose backward orbit closes up through a sliding or
    escaping segment (or directly, as a fold-to-fold loop).  Kind II needs the
    whole line invariant and is reported only in that case.  ``method`` picks
    the closed-form geometry of the invisible family (``"closed"``), the
    flow-based fold search (``"flow"``) or the former when available
    (``"auto"``).
    """
    r = Z.window if window is None else window
    cycles: List[CanardCycle] = []
    if _sigma_invariant(Z, r):
        cycles.append(CanardCycle(CycleKind.II, None, Stability.NonHyperbolic, note="the switching line is invariant"))
        return cycles
    params = Z.params
    invisible = Z.family == "invisible" and params is not None
    if invisible and params.beta <= 0:
        return cycles
    if invisible:
        cycles.extend(_kind_one_cycles(Z, params, realize))
    if invisible and method in ("auto", "closed"):
        geo = kind_three_geometry(params, r, Z)
        if geo is not None:
            cycles.append(_kind_three_cycle(Z, geo["a"], geo["c"], geo["s"], geo["region"], r, "Y", realize))
    else:
        cycles.extend(_generic_kind_three(Z, r, realize))
    return cycles
