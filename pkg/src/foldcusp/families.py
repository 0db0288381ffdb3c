"""Concrete piecewise-smooth systems and the bump correction.

The invisible family is

    X = (1, lambda - x)                       (y >= 0)
    Y = (-1, -x**2 + beta - dB/dx(x))          (y <= 0)

and its lower field is the gradient picture of the potential
``F(x) = x**3/3 - beta*x + B(x) + c0`` with ``c0 = -2 beta**1.5 / 3``:
Y-orbits through ``(x1, 0)`` are the graphs ``y = F(x) - F(x1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import PPoly

from .planefield import HORIZONTAL, SmoothField, SwitchingFunction, constant_first_field

__all__ = [
    "ParameterError",
    "BumpConstructionError",
    "FoldCuspParams",
    "BumpFunction",
    "FilippovSystem",
    "bump_construct",
    "bump_printed",
    "printed_bump_function",
    "validate_bump",
    "potential_F",
    "default_window",
    "make_invisible_family",
    "make_visible_family",
    "standard_form",
    "gst_slice",
    "STANDARD_FORM_LABELS",
    "MU_FRACTION",
    "GST_MU_FRACTION",
    "BETA_FLOOR",
]

LAMBDA0 = 2.0
BETA0 = 2.0
MU_FRACTION = 0.5
# beta = mu**2 puts the slice at |mu| = sqrt(beta); the constructed bump holds to 1.8 sqrt(beta) for mu < 0
GST_MU_FRACTION = 1.5
# below this the bump's knot data (of size beta**1.5) underflow
BETA_FLOOR = 1e-150


class ParameterError(ValueError):
    """Parameters outside the admissible box."""


class BumpConstructionError(RuntimeError):
    """The constructed bump violates its property contract."""

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


@dataclass(frozen=True)
class FoldCuspParams:
    lam: float
    beta: float
    mu: float = 0.0

    @property
    def sqrt_beta(self) -> float:
        return math.sqrt(self.beta) if self.beta > 0 else 0.0

    def mu_bound(self, mu_fraction: float = MU_FRACTION) -> float:
        return mu_fraction * self.sqrt_beta

    def validate(self, lam0: float = LAMBDA0, beta0: float = BETA0, mu_fraction: float = MU_FRACTION) -> "FoldCuspParams":
        for name, v in (("lambda", self.lam), ("beta", self.beta), ("mu", self.mu)):
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v!r}")
        if abs(self.lam) > lam0:
            raise ParameterError(f"|lambda| must not exceed {lam0}, got {self.lam}")
        if abs(self.beta) > beta0:
            raise ParameterError(f"|beta| must not exceed {beta0}, got {self.beta}")
        if self.beta > 0 and abs(self.mu) >= self.mu_bound(mu_fraction):
            raise ParameterError(
                f"|mu| must stay below {mu_fraction}*sqrt(beta) = {self.mu_bound(mu_fraction):.6g}, got {self.mu}"
            )
        return self

    def as_tuple(self):
        return (self.lam, self.beta, self.mu)


def default_window(lam: float, beta: float, mu: float = 0.0) -> float:
    """Half-width ``r`` of the analysis square ``[-r, r]^2``."""
    return max(1.0, 5.0 * (math.sqrt(max(beta, 0.0)) + abs(mu) + abs(lam)))


class BumpFunction:
    """Compactly supported piecewise polynomial ``B(x)``.

    ``pieces`` holds one :class:`numpy.polynomial.Polynomial` per interval of
    ``knots``; the function vanishes identically outside ``[knots[0], knots[-1]]``.
    On a knot the right-hand piece is used.
    """

    def __init__(self, knots, pieces, source: str, beta: float, mu: float):
        self.knots = np.asarray(knots, float)
        self.pieces = list(pieces)
        self.source = source
        self.beta = beta
        self.mu = mu
        if len(self.pieces):
            coeffs = []
            for x0, poly in zip(self.knots[:-1], self.pieces):
                local = poly(Polynomial([x0, 1.0]))
                c = np.zeros(6)
                c[: len(local.coef)] = local.coef
                coeffs.append(c[::-1])
            self._pp = PPoly(np.array(coeffs).T, self.knots, extrapolate=False)
        else:
            self._pp = None

    @classmethod
    def zero(cls, beta: float = 0.0, mu: float = 0.0, source: str = "Constructed") -> "BumpFunction":
        return cls([], [], source, beta, mu)

    @property
    def is_zero(self) -> bool:
        return self._pp is None

    @property
    def support(self):
        if self.is_zero:
            return None
        return (float(self.knots[0]), float(self.knots[-1]))

    def __call__(self, x, nu: int = 0):
        x = np.asarray(x, float)
        if self._pp is None:
            return np.zeros_like(x) + 0.0
        pp = self._pp if nu == 0 else self._pp.derivative(nu)
        out = pp(x)
        if out.ndim:
            out[np.isnan(out)] = 0.0
            # closed right end: evaluate the last piece at the final knot
            end = x == self.knots[-1]
            if np.any(end):
                out[end] = self.pieces[-1].deriv(nu)(self.knots[-1]) if nu else self.pieces[-1](self.knots[-1])
        else:
            if np.isnan(out):
                out = np.asarray(0.0)
            if x == self.knots[-1]:
                poly = self.pieces[-1].deriv(nu) if nu else self.pieces[-1]
                out = np.asarray(poly(self.knots[-1]))
        return out if out.ndim else float(out)

    def one_sided(self, x: float, nu: int, side: int) -> float:
        """Derivative of order ``nu`` at ``x`` using the piece to the left (side=-1) or right (+1)."""
        if self.is_zero:
            return 0.0
        k = self.knots
        if side < 0:
            idx = int(np.searchsorted(k, x, side="left")) - 1
        else:
            idx = int(np.searchsorted(k, x, side="right")) - 1
        if idx < 0 or idx >= len(self.pieces):
            return 0.0
        poly = self.pieces[idx].deriv(nu) if nu else self.pieces[idx]
        return float(poly(x))

    def __repr__(self):
        return f"BumpFunction(source={self.source!r}, beta={self.beta}, mu={self.mu}, knots={self.knots.tolist()})"


def _hermite_cubic(x0, x1, p0, p1, m0, m1) -> Polynomial:
    h = x1 - x0
    t = Polynomial([-x0 / h, 1.0 / h])
    h00 = 2 * t**3 - 3 * t**2 + 1
    h10 = t**3 - 2 * t**2 + t
    h01 = -2 * t**3 + 3 * t**2
    h11 = t**3 - t**2
    return p0 * h00 + h * m0 * h10 + p1 * h01 + h * m1 * h11


def _base_potential(beta: float) -> Polynomial:
    return Polynomial([-2.0 * beta**1.5 / 3.0, -beta, 0.0, 1.0 / 3.0])


def bump_construct(beta: float, mu: float = 0.0, verify: bool = True) -> BumpFunction:
    """Build the default C^1 bump for ``(beta, mu)``.

    The potential ``F`` is prescribed as a cubic Hermite spline on the knots
    ``-sqrt(beta), sqrt(beta), 3 sqrt(beta) + mu, 4 sqrt(beta)`` and the bump
    is ``F`` minus the unperturbed cubic.  Knot data: ``F`` keeps the
    unperturbed value and zero slope at both folds, vanishes at
    ``c = 3 sqrt(beta) + mu`` with slope
    ``max(2 beta**1.5 / h, 4 beta**1.5 / h - sqrt(beta) h / 2)``, ``h = c - sqrt(beta)``,
    there, and rejoins the cubic with matching slope at ``4 sqrt(beta)``.
    The second branch keeps ``F''(sqrt(beta)+)`` below ``2 sqrt(beta)`` when
    ``c`` moves towards ``sqrt(beta)``; both agree at ``mu = 0``.
    """
    if beta <= 0:
        return BumpFunction.zero(beta, mu)
    if beta < BETA_FLOOR:
        raise BumpConstructionError(f"beta = {beta:g} is below the construction floor {BETA_FLOOR:g}")
    s = math.sqrt(beta)
    c = 3.0 * s + mu
    if not (s < c < 4.0 * s):
        raise BumpConstructionError(f"recollision point 3*sqrt(beta)+mu = {c} must lie in (sqrt(beta), 4*sqrt(beta))")
    F0 = _base_potential(beta)
    dF0 = F0.deriv()
    knots = [-s, s, c, 4.0 * s]
    values = [0.0, float(F0(s)), 0.0, float(F0(4 * s))]
    h = c - s
    slopes = [0.0, 0.0, max(2.0 * beta**1.5 / h, 4.0 * beta**1.5 / h - 0.5 * s * h), float(dF0(4 * s))]
    pieces = []
    for i in range(3):
        Fi = _hermite_cubic(knots[i], knots[i + 1], values[i], values[i + 1], slopes[i], slopes[i + 1])
        pieces.append((Fi - F0).trim(1e-15 * max(1.0, beta**1.5)))
    bump = BumpFunction(knots, pieces, "Constructed", beta, mu)
    if verify:
        report = validate_bump(bump, beta, mu)
        failed = [k for k in ("P1", "P2", "P3", "P4", "P5", "P6") if not report[k]["passed"]]
        if failed:
            key = failed[0]
            raise BumpConstructionError(
                f"constructed bump violates {', '.join(failed)}: {report[key]['detail']}",
                report[key].get("abscissa"),
            )
    return bump


def _printed_f(beta: float, mu: float) -> float:
    s = math.sqrt(beta)
    # printed bracket lacks operators between its first two products; read them as multiplied
    inner = (
        -8.0 * beta * (128.0 + 3.0 * beta) * mu * s * (256.0 + 63.0 * beta) * mu
        - (-64.0 + 45.0 * beta) * mu**2
        - beta**-0.5 * (80.0 + 3.0 * beta) * mu**3
        + beta**-1.0 * (-16.0 + 9.0 * beta) * mu**4
    )
    return mu / 48.0 * inner


def _printed_pieces(beta: float, mu: float):
    s = math.sqrt(beta)
    x = Polynomial([0.0, 1.0])
    B1 = (-3.0 / (128.0 * beta)) * (x**2 * (208.0 + 3.0 * beta) - 4.0 * x * s * (176.0 + 15.0 * beta) + beta * (688.0 + 93.0 * beta))
    B2 = (-1.0 / (48.0 * beta)) * ((x - 4.0 * s) ** 3 * ((x**2 + beta) * (-16.0 + 9.0 * beta) - 2.0 * x * s * (16.0 + 15.0 * beta)))
    fv = _printed_f(beta, mu)
    return B1 + fv, B2 + fv


def bump_printed(beta: float, mu: float, x, piece: Optional[int] = None):
    """Literal evaluation of the printed two-piece bump formula.

    ``piece`` forces the first (1) or second (2) polynomial regardless of
    ``x``; by default the printed interval rule is applied.
    """
    if beta <= 0:
        return np.zeros_like(np.asarray(x, float)) + 0.0
    p1, p2 = _printed_pieces(beta, mu)
    x = np.asarray(x, float)
    if piece == 1:
        return p1(x)
    if piece == 2:
        return p2(x)
    s = math.sqrt(beta)
    out = np.where(x <= s, p1(x), p2(x))
    out = np.where((x < -s) | (x > 4 * s), 0.0, out)
    return out if out.ndim else float(out)


def printed_bump_function(beta: float, mu: float = 0.0) -> BumpFunction:
    if beta <= 0:
        return BumpFunction.zero(beta, mu, source="PaperPrinted")
    s = math.sqrt(beta)
    p1, p2 = _printed_pieces(beta, mu)
    return BumpFunction([-s, s, 4 * s], [p1, p2], "PaperPrinted", beta, mu)


def potential_F(beta: float, bump: BumpFunction, x, nu: int = 0):
    """Potential ``F`` (nu=0) or its derivatives; ``F' = x**2 - beta + B'``."""
    F0 = _base_potential(beta) if beta > 0 else Polynomial([0.0, -beta, 0.0, 1.0 / 3.0])
    poly = F0.deriv(nu) if nu else F0
    return poly(np.asarray(x, float)) + bump(x, nu)


def _check(passed, residual, detail, abscissa=None):
    return {"passed": bool(passed), "residual": float(residual), "detail": detail, "abscissa": abscissa}


def validate_bump(bump: BumpFunction, beta: float, mu: float, n_grid: int = 1024) -> dict:
    """Measure the bump against properties P1-P6; returns a per-property report."""
    report = {"source": bump.source, "beta": beta, "mu": mu}
    if beta <= 0:
        ok = bump.is_zero
        for key in ("P1", "P2", "P3", "P4", "P5", "P6"):
            report[key] = _check(ok if key == "P1" else True, 0.0, "beta <= 0: bump must vanish")
        return report
    s = math.sqrt(beta)
    c = 3 * s + mu
    lo, hi = -s, 4 * s

    outside = np.concatenate([np.linspace(lo - 2 * s, lo, 64, endpoint=False), np.linspace(hi, hi + 2 * s, 64)[1:]])
    r1 = float(np.max(np.abs(bump(outside))))
    report["P1"] = _check(r1 == 0.0, r1, "B vanishes outside [-sqrt(beta), 4 sqrt(beta)]")

    # C^1: jumps of B and B' across every knot, plus the support-end conditions
    knots = sorted(set(np.round(np.append(bump.knots if not bump.is_zero else [], [lo, s, hi]), 14)))
    worst, where = 0.0, None
    for k in knots:
        for nu in (0, 1):
            jump = abs(bump.one_sided(k, nu, -1) - bump.one_sided(k, nu, +1))
            if jump > worst:
                worst, where = jump, float(k)
    scale = beta**1.5
    report["P2"] = _check(worst <= 1e-9 * max(1.0, scale), worst, "B and B' continuous at every junction", where)
    report["P2"]["junction_jumps"] = {
        f"{k:.6g}": [abs(bump.one_sided(k, nu, -1) - bump.one_sided(k, nu, +1)) for nu in (0, 1)] for k in knots
    }

    xs = np.linspace(lo, hi, n_grid + 2)[1:-1]
    xs = xs[np.abs(xs - s) > 1e-9 * s]
    dF = potential_F(beta, bump, xs, 1)
    bad_left = xs[(xs < s) & (dF >= 0)]
    bad_right = xs[(xs > s) & (dF <= 0)]
    slope_b = max(abs(bump.one_sided(s, 1, -1)), abs(bump.one_sided(s, 1, +1)))
    p3 = bad_left.size == 0 and bad_right.size == 0 and slope_b <= 1e-9 * max(1.0, beta)
    where3 = float(bad_left[0]) if bad_left.size else (float(bad_right[0]) if bad_right.size else None)
    report["P3"] = _check(p3, slope_b, "F' < 0 on (-sqrt(beta), sqrt(beta)), > 0 on (sqrt(beta), 4 sqrt(beta)), B'(sqrt(beta)) = 0", where3)

    r4 = abs(float(potential_F(beta, bump, c)))
    report["P4"] = _check(r4 < 1e-10 * max(1.0, scale), r4, "F(3 sqrt(beta) + mu) = 0", c)

    b2 = {
        "a+": bump.one_sided(-s, 2, +1),
        "b-": bump.one_sided(s, 2, -1),
        "b+": bump.one_sided(s, 2, +1),
    }
    r5 = max(abs(v) for v in b2.values())
    report["P5"] = _check(r5 < 2 * s, r5, "|B''| < 2 sqrt(beta) at both folds (fold types preserved)")
    report["P5"]["second_derivatives"] = b2

    F2m = 2 * s + b2["b-"]
    F2p = 2 * s + b2["b+"]
    report["P6"] = _check(F2p < F2m, F2m - F2p, "F''(sqrt(beta)+) < F''(sqrt(beta)-)", s)
    report["P6"]["F2_minus"] = F2m
    report["P6"]["F2_plus"] = F2p
    report["all_passed"] = all(report[k]["passed"] for k in ("P1", "P2", "P3", "P4", "P5", "P6"))
    return report


@dataclass
class FilippovSystem:
    """A pair of fields split by ``f``; ``X`` acts on ``f >= 0``, ``Y`` on ``f <= 0``."""

    X: SmoothField
    Y: SmoothField
    f: SwitchingFunction = HORIZONTAL
    family: str = "custom"
    params: Optional[FoldCuspParams] = None
    bump: Optional[BumpFunction] = None
    window: float = 1.0
    labels: dict = field(default_factory=dict)

    def component(self, tag: str) -> SmoothField:
        return self.X if tag == "X" else self.Y


def make_invisible_family(params: FoldCuspParams, bump: Optional[BumpFunction] = None, window: Optional[float] = None, validate: bool = True) -> FilippovSystem:
    """Unfolding of the invisible fold-cusp singularity."""
    if validate:
        params.validate()
    lam, beta, mu = params.as_tuple()
    if bump is None:
        bump = bump_construct(beta, mu)
    X = constant_first_field(
        1.0,
        lambda x: lam - x,
        lambda x: -np.ones_like(x),
        lambda x: np.zeros_like(x),
        name="X_lambda",
    )
    Y = constant_first_field(
        -1.0,
        lambda x: -x * x + beta - bump(x, 1),
        lambda x: -2.0 * x - bump(x, 2),
        lambda x: -2.0 - bump(x, 3),
        name="Y_beta_mu",
        kinks=() if bump.is_zero else bump.knots,
    )
    r = window if window is not None else default_window(lam, beta, mu)
    return FilippovSystem(X, Y, HORIZONTAL, "invisible", params, bump, r)


def make_visible_family(lam: float, beta: float, window: Optional[float] = None, validate: bool = True) -> FilippovSystem:
    """Unfolding of the visible fold-cusp singularity (no bump)."""
    params = FoldCuspParams(lam, beta, 0.0)
    if validate:
        params.validate()
    X = constant_first_field(1.0, lambda x: x - lam, lambda x: np.ones_like(x), lambda x: np.zeros_like(x), name="X_lambda")
    Y = constant_first_field(1.0, lambda x: -x * x + beta, lambda x: -2.0 * x, lambda x: -2.0 * np.ones_like(x), name="Y_beta")
    r = window if window is not None else default_window(lam, beta)
    return FilippovSystem(X, Y, HORIZONTAL, "visible", params, None, r)


# conventional names of the two distinguished standard forms
STANDARD_FORM_LABELS = {
    (1, -1, -1, -1): {"name": "Z0^{ivb,k1}", "X": "FoldInvisible", "Y": "CuspKind1"},
    (1, 1, 1, -1): {"name": "Z0^{vis,k2}", "X": "FoldVisible", "Y": "CuspKind2"},
}


def standard_form(rho, window: float = 1.0) -> FilippovSystem:
    """``X = (rho1, rho2 x)``, ``Y = (rho3, rho4 x**2)``."""
    rho = tuple(int(r) for r in rho)
    if len(rho) != 4 or any(r not in (-1, 1) for r in rho):
        raise ParameterError(f"standard form needs four entries in {{-1, +1}}, got {rho}")
    r1, r2, r3, r4 = rho
    X = constant_first_field(r1, lambda x: r2 * x, lambda x: r2 * np.ones_like(x), lambda x: np.zeros_like(x), name=f"X_{r1:+d}{r2:+d}")
    Y = constant_first_field(r3, lambda x: r4 * x * x, lambda x: 2.0 * r4 * x, lambda x: 2.0 * r4 * np.ones_like(x), name=f"Y_{r3:+d}{r4:+d}")
    labels = dict(STANDARD_FORM_LABELS.get(rho, {}))
    labels["rho"] = rho
    return FilippovSystem(X, Y, HORIZONTAL, "standard", None, None, window, labels)


def gst_slice(mu: float, lam: float = 0.0) -> FoldCuspParams:
    """Point on the two-parameter slice ``beta = mu**2``, ``mu <= 0``."""
    if mu > 0:
        raise ParameterError(f"the slice requires mu <= 0, got {mu}")
    return FoldCuspParams(lam, mu * mu, mu)
