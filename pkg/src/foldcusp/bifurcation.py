"""Parameter-space classification of the fold-cusp unfoldings.

A parameter point is labelled by where ``lam`` sits among the distinguished
values of its ``beta``-row.  For the invisible family with ``beta > 0`` these
are ``-sqrt(beta)``, ``0``, ``sqrt(beta)``, the loop value
``lam_loop = sqrt(beta) + mu/2`` (the upper orbit from ``a`` lands on ``c``),
``L1`` (collision of the two crossing cycles), ``lam_bc = 2 sqrt(beta) + mu/2``
(the upper orbit from ``b`` lands on ``c``) and ``c = 3 sqrt(beta) + mu``.
The sign of ``mu`` decides whether ``lam_loop`` falls left or right of the
two-fold value ``sqrt(beta)``; the three orderings give the label families
``_1`` (``mu = 0``), ``_2`` (``mu < 0``) and ``_3`` (``mu > 0``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np
from scipy.optimize import brentq

from .families import (
    FoldCuspParams,
    MU_FRACTION,
    ParameterError,
    default_window,
    make_invisible_family,
    make_visible_family,
)
from .planefield import PRECISE, flow_to_section
from .retmaps import (
    CycleKind,
    Stability,
    detect_canard_cycles,
    kind_three_geometry,
    lower_return,
    rho_X,
    rho_X_flow,
)
from .switching import (
    PseudoKind,
    coincidence_tol,
    find_pseudo_equilibria,
    region_layout,
)

__all__ = [
    "CaseLabel",
    "CaseResult",
    "SigmaSignature",
    "L1NotFoundError",
    "L1Solution",
    "find_L1",
    "find_L1_solution",
    "boundary_values",
    "classify_case",
    "signature",
    "equivalence_class",
    "all_labels",
    "expected_census",
    "census_codes",
    "measure_loop_lambda",
    "GridSpec",
    "BifDiagram",
    "sweep",
]

TAG_SUFFIX = {"T1": "1", "T2": "2", "T3": "3", "TB": "B"}


@dataclass(frozen=True, order=True)
class CaseLabel:
    tag: str
    index: int

    def __post_init__(self):
        top = {"T1": 17, "T2": 19, "T3": 19, "TB": 11}
        if self.tag not in top or not 1 <= self.index <= top[self.tag]:
            raise ValueError(f"no case {self.index} under {self.tag}")

    def __str__(self):
        return f"{self.index}_{TAG_SUFFIX[self.tag]}"

    @classmethod
    def parse(cls, text: str) -> "CaseLabel":
        idx, suf = str(text).split("_")
        tag = {v: k for k, v in TAG_SUFFIX.items()}[suf]
        return cls(tag, int(idx))


def all_labels(tag: str) -> List[CaseLabel]:
    top = {"T1": 17, "T2": 19, "T3": 19, "TB": 11}[tag]
    return [CaseLabel(tag, i) for i in range(1, top + 1)]


def equivalence_class(label) -> str:
    """Representative label of the phase-portrait class of ``label``.

    The ``_2`` and ``_3`` families share cases 1-9 and (shifted by two) the
    cases beyond 12 with the ``mu = 0`` family; 10-12 of each are new.  The
    visible family maps to itself.
    """
    if isinstance(label, str):
        label = CaseLabel.parse(label)
    if label.tag in ("T1", "TB"):
        return str(label)
    i = label.index
    if i <= 9:
        return str(CaseLabel("T1", i))
    if i <= 12:
        return str(label)
    return str(CaseLabel("T1", i - 2))


# ---------------------------------------------------------------- L1


class L1NotFoundError(RuntimeError):
    """The first-return map has no fold (saddle-node of cycles) on its domain."""


@dataclass(frozen=True)
class L1Solution:
    lam: float
    x: float
    residual_fixed: float
    residual_derivative: float
    iterations: int
    bracket: tuple


@lru_cache(maxsize=4096)
def find_L1_solution(beta: float, mu: float = 0.0, n_seed: int = 512) -> L1Solution:
    """Solve ``psi(x) = x``, ``psi'(x) = 1`` for ``(lam, x)`` by damped Newton.

    ``psi(x) - x = 2 lam - S(x)`` with ``S(x) = x + rho_Y(x)``, so the
    collision value is ``max S / 2``; the seed is the sampled maximiser.
    """
    if beta <= 0:
        raise L1NotFoundError("L1 needs beta > 0")
    lr = lower_return(beta, mu)
    lo, hi = lr.domain
    xs = np.linspace(lo, hi, n_seed + 2)[1:-1]
    S = xs + lr(xs)
    k = int(np.argmax(S))
    ends = (2 * lr.s, hi - lr.s)
    if S[k] <= max(ends) or k in (0, len(xs) - 1):
        raise L1NotFoundError(f"no interior maximum of x + rho_Y(x) for beta={beta}, mu={mu}")
    x = float(xs[k])
    lam = 0.5 * float(S[k])
    bracket = (float(xs[max(k - 1, 0)]), float(xs[min(k + 1, len(xs) - 1)]))
    it = 0
    for it in range(1, 60):
        rho = lr(x)
        d1 = float(lr.derivative(x, rho))
        d2 = float(lr.second_derivative(x, rho, d1))
        r1 = 2 * lam - rho - x
        r2 = -d1 - 1.0
        if abs(r1) < 1e-12 and abs(r2) < 1e-12:
            break
        # Jacobian of (r1, r2) with respect to (lam, x)
        J = np.array([[2.0, -d1 - 1.0], [0.0, -d2]])
        step = np.linalg.solve(J, [-r1, -r2])
        t = 1.0
        while t > 1e-4:
            xn = x + t * step[1]
            if lo < xn < hi:
                break
            t *= 0.5
        lam += t * step[0]
        x += t * step[1]
    rho = lr(x)
    d1 = float(lr.derivative(x, rho))
    return L1Solution(float(lam), float(x), float(2 * lam - rho - x), float(-d1 - 1.0), it, bracket)


def find_L1(beta: float, mu: float = 0.0) -> float:
    return find_L1_solution(float(beta), float(mu)).lam


# ---------------------------------------------------------------- boundaries and labels


def _tag_for(mu: float, branch: Optional[str]) -> str:
    if branch is not None:
        return {"0": "T1", "-": "T2", "+": "T3", "T1": "T1", "T2": "T2", "T3": "T3"}[branch]
    if mu == 0:
        return "T1"
    return "T2" if mu < 0 else "T3"


def boundary_values(beta: float, mu: float = 0.0, family: str = "invisible", tag: Optional[str] = None):
    """Ordered ``(name, value, case_index)`` triples of the ``lam``-boundaries for ``beta > 0``."""
    s = math.sqrt(beta)
    if family == "visible":
        return [("-2sqrt(beta)", -2 * s, 6), ("-sqrt(beta)", -s, 8), ("sqrt(beta)", s, 10)]
    tag = _tag_for(mu, None) if tag is None else tag
    L1 = find_L1(beta, mu)
    loop = s + 0.5 * mu
    bc = 2 * s + 0.5 * mu
    c = 3 * s + mu
    if tag == "T1":
        names = [("-sqrt(beta)", -s), ("0", 0.0), ("sqrt(beta)", s), ("L1", L1), ("lam_bc", bc), ("c", c)]
    elif tag == "T2":
        names = [("-sqrt(beta)", -s), ("0", 0.0), ("lam_loop", loop), ("sqrt(beta)", s), ("L1", L1), ("lam_bc", bc), ("c", c)]
    else:
        names = [("-sqrt(beta)", -s), ("0", 0.0), ("sqrt(beta)", s), ("lam_loop", loop), ("L1", L1), ("lam_bc", bc), ("c", c)]
    return [(n, v, 6 + 2 * i) for i, (n, v) in enumerate(names)]


@dataclass
class CaseResult:
    label: Optional[CaseLabel]
    unresolved: bool = False
    on_boundary: bool = False
    matched: tuple = ()
    window: float = 1.0

    @property
    def text(self) -> str:
        return "boundary-unresolved" if self.label is None else str(self.label)


def _locate(lam: float, bounds, tol: float):
    hits = [(n, idx) for n, v, idx in bounds if abs(lam - v) <= tol]
    if len(hits) > 1:
        return None, True, tuple(n for n, _ in hits)
    if hits:
        return hits[0][1], False, (hits[0][0],)
    below = sum(v < lam for _, v, _ in bounds)
    return 5 + 2 * below, False, ()


def classify_case(
    params,
    family: str = "invisible",
    window: Optional[float] = None,
    branch: Optional[str] = None,
    mu_fraction: float = MU_FRACTION,
) -> CaseResult:
    """Case label of a parameter point by ordered comparisons of ``lam``.

    ``branch`` ("0", "-", "+") forces the label family; it matters for
    ``beta <= 0``, where ``mu`` plays no role and all three families agree.
    ``mu_fraction`` widens the admissible ``|mu| / sqrt(beta)`` (the
    ``beta = mu**2`` slice needs ``GST_MU_FRACTION``).
    """
    if not isinstance(params, FoldCuspParams):
        params = FoldCuspParams(*params) if len(params) == 3 else FoldCuspParams(params[0], params[1], 0.0)
    # the ordering of lam against its boundaries is meaningful for any lam
    params.validate(lam0=math.inf, mu_fraction=mu_fraction)
    lam, beta, mu = params.as_tuple()
    r = default_window(lam, beta, mu) if window is None else window
    tol = coincidence_tol(r)
    tag = "TB" if family == "visible" else _tag_for(mu, branch)
    if math.sqrt(abs(beta)) > tol and beta < 0:
        return CaseResult(CaseLabel(tag, 1), window=r)
    if beta <= 0 or math.sqrt(beta) <= tol:
        if abs(lam) <= tol:
            return CaseResult(CaseLabel(tag, 3), on_boundary=True, matched=("lam=0",), window=r)
        return CaseResult(CaseLabel(tag, 2 if lam < 0 else 4), window=r)
    bounds = boundary_values(beta, mu, family, tag if family != "visible" else None)
    idx, unresolved, matched = _locate(lam, bounds, tol)
    if unresolved:
        return CaseResult(None, True, True, matched, r)
    return CaseResult(CaseLabel(tag, idx), False, bool(matched), matched, r)


# ---------------------------------------------------------------- cycle census


def census_codes(cycles) -> tuple:
    """Compact sorted description of a cycle list, e.g. ``("I+att", "I+rep")``."""
    out = []
    for cyc in cycles:
        if cyc.kind is CycleKind.II:
            out.append("II")
            continue
        if cyc.hyperbolic:
            out.append(f"{cyc.kind.value}+{'att' if cyc.stability is Stability.Attracting else 'rep'}")
        else:
            out.append(f"{cyc.kind.value}0")
    return tuple(sorted(out))


_EXPECTED = {
    "6_1": ("III0",),
    "7_1": ("III+rep",),
    "8_1": ("III+rep",),
    "9_1": ("III+rep",),
    "10_1": ("III0",),
    "11_1": ("I+att", "I+rep"),
    "12_1": ("I0",),
    "10_2": ("III0",),
    "11_2": ("I+rep",),
    "12_2": ("I+rep",),
    "10_3": ("III+rep",),
    "11_3": ("I+att", "III+rep"),
    "12_3": ("I+att", "III0"),
}


def expected_census(label) -> tuple:
    """Cycle census stated for a case (empty for cases without cycles)."""
    return tuple(sorted(_EXPECTED.get(equivalence_class(label), ())))


# ---------------------------------------------------------------- signature


@dataclass
class SigmaSignature:
    family: str
    params: FoldCuspParams
    beta_sign: str
    abscissas: Dict[str, float]
    order: List[str]
    coincidences: List[tuple]
    landing: Dict[str, float]
    regions: List[tuple]
    pseudo_equilibria: list
    cycles: list
    census: tuple
    two_fold: bool
    loops: Dict[str, bool]
    L1: Optional[float] = None
    window: float = 1.0

    def summary(self) -> dict:
        pe = [p for p in self.pseudo_equilibria if p.kind is not PseudoKind.Virtual]
        return {
            "beta_sign": self.beta_sign,
            "order": self.order,
            "regions": [c for _, _, c in self.regions],
            "pseudo_equilibria": sorted(p.kind.value for p in pe),
            "census": list(self.census),
            "two_fold": self.two_fold,
            "loops": dict(self.loops),
        }

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "lambda": self.params.lam,
            "beta": self.params.beta,
            "mu": self.params.mu,
            "window": self.window,
            "beta_sign": self.beta_sign,
            "abscissas": self.abscissas,
            "order": self.order,
            "coincidences": [list(c) for c in self.coincidences],
            "landing": self.landing,
            "regions": [[lo, hi, c] for lo, hi, c in self.regions],
            "pseudo_equilibria": [
                {"location": p.location, "kind": p.kind.value, "region": p.region, "reason": p.reason}
                for p in self.pseudo_equilibria
            ],
            "cycles": [
                {
                    "kind": c.kind.value,
                    "hyperbolic": c.hyperbolic,
                    "stability": c.stability.value,
                    "anchor": c.anchor,
                    "multiplier": c.multiplier,
                    "closure_error": c.closure_error,
                }
                for c in self.cycles
            ],
            "two_fold": self.two_fold,
            "loops": self.loops,
            "L1": self.L1,
        }


def signature(params, family: str = "invisible", window: Optional[float] = None, realize: bool = False, Z=None) -> SigmaSignature:
    """Topological fingerprint of a parameter point."""
    if not isinstance(params, FoldCuspParams):
        params = FoldCuspParams(*params) if len(params) == 3 else FoldCuspParams(params[0], params[1], 0.0)
    lam, beta, mu = params.as_tuple()
    r = default_window(lam, beta, mu) if window is None else window
    tol = coincidence_tol(r)
    if Z is None:
        if family == "visible":
            Z = make_visible_family(lam, beta, window=r, validate=False)
        else:
            Z = make_invisible_family(params, window=r, validate=False)
    beta_sign = "0" if math.sqrt(abs(beta)) <= tol else ("+" if beta > 0 else "-")
    ab = {"d": lam}
    landing = {}
    L1 = None
    if beta_sign == "+":
        s = math.sqrt(beta)
        ab["a"], ab["b"] = -s, s
        if family != "visible":
            ab["c"] = 3 * s + mu
            landing = {"rho_X(a)": rho_X(lam, -s), "rho_X(b)": rho_X(lam, s)}
            try:
                L1 = find_L1(beta, mu)
            except L1NotFoundError:
                L1 = None
    elif beta_sign == "0":
        ab["a"] = ab["b"] = 0.0
    order = sorted(ab, key=lambda k: (ab[k], k))
    names = list(ab)
    coinc = [(p, q) for i, p in enumerate(names) for q in names[i + 1:] if abs(ab[p] - ab[q]) <= tol]
    two_fold = beta_sign == "+" and abs(lam - ab["b"]) <= tol
    loops = {}
    if "c" in ab:
        c = ab["c"]
        loops = {
            "rho_X(a)=c": abs(landing["rho_X(a)"] - c) <= tol,
            "rho_X(b)=c": abs(landing["rho_X(b)"] - c) <= tol,
            "d=c": abs(lam - c) <= tol,
            "d=a": abs(lam - ab["a"]) <= tol,
        }
    regions = region_layout(Z, r)
    pe = find_pseudo_equilibria(Z, r)
    cycles = detect_canard_cycles(Z, r, realize=realize)
    return SigmaSignature(family, params, beta_sign, ab, order, coinc, landing, regions, pe, cycles, census_codes(cycles), two_fold, loops, L1, r)


def measure_loop_lambda(beta: float, mu: float = 0.0) -> float:
    """``lam`` at which the upper orbit from ``a`` lands on the recollision point.

    The recollision point is measured by integrating the lower field backward
    from ``a``, and the landing condition is solved by integrating the upper
    field; no closed form enters.
    """
    s = math.sqrt(beta)
    base = make_invisible_family(FoldCuspParams(0.0, beta, mu), validate=False)
    back = flow_to_section(base.Y, (-s, 0.0), base.f, -1, window=base.window, **PRECISE)
    if back.hit is None:
        raise RuntimeError("backward lower orbit from the fold did not return")
    c_meas = float(back.hit[0])

    def gap(lam):
        Z = make_invisible_family(FoldCuspParams(lam, beta, mu), bump=base.bump, validate=False)
        return rho_X_flow(Z, -s) - c_meas

    lo, hi = s + 0.5 * mu - 0.1 * s, s + 0.5 * mu + 0.1 * s
    return brentq(gap, lo, hi, xtol=1e-13)


# ---------------------------------------------------------------- sweeps


@dataclass
class GridSpec:
    lam_range: tuple = (-2.0, 2.0)
    beta_range: tuple = (-1.0, 1.0)
    n_lam: int = 200
    n_beta: int = 200
    mu: float = 0.0
    mu_scaled: bool = False
    family: str = "invisible"

    @property
    def branch(self) -> str:
        if self.family == "visible":
            return "B"
        return "0" if self.mu == 0 else ("-" if self.mu < 0 else "+")

    def mu_at(self, beta: float) -> float:
        return self.mu * math.sqrt(abs(beta)) if self.mu_scaled else self.mu


@dataclass
class BifDiagram:
    spec: GridSpec
    lam: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    labels: np.ndarray
    classes: np.ndarray
    n_pseudo: np.ndarray
    n_cycles: np.ndarray
    boundary_flag: np.ndarray
    census_mismatch: int = 0
    failures: list = field(default_factory=list)

    def distinct_labels(self) -> List[str]:
        return sorted(set(self.labels[self.boundary_flag != "unresolved"].ravel().tolist()) - {""})

    def distinct_classes(self) -> List[str]:
        return sorted(set(self.classes[self.boundary_flag != "unresolved"].ravel().tolist()) - {""})

    def region_counts(self) -> Dict[str, int]:
        vals, counts = np.unique(self.labels, return_counts=True)
        return {str(v): int(c) for v, c in zip(vals, counts)}

    def boundary_curves(self, n: int = 101) -> Dict[str, list]:
        """Polylines ``[(lam, beta), ...]`` of the boundary curves over the positive ``beta`` range."""
        lo, hi = self.spec.beta_range
        betas = np.linspace(max(lo, 0.0), hi, n)[1:]
        curves: Dict[str, list] = {}
        for b in betas:
            tag = None if self.spec.family == "visible" else _tag_for(self.spec.mu_at(b), self.spec.branch if self.spec.branch != "B" else None)
            try:
                bounds = boundary_values(float(b), self.spec.mu_at(b), self.spec.family, tag)
            except L1NotFoundError:
                continue
            for name, v, _ in bounds:
                curves.setdefault(name, []).append((float(v), float(b)))
        return curves

    def rows(self):
        for i in range(self.labels.shape[0]):
            for j in range(self.labels.shape[1]):
                yield (self.lam[i, j], self.beta[i, j], self.mu[i, j], self.labels[i, j], self.classes[i, j],
                       int(self.n_pseudo[i, j]), int(self.n_cycles[i, j]), self.boundary_flag[i, j])


def _snap(values: np.ndarray, targets) -> np.ndarray:
    """Move the nearest grid node onto each target value (each node at most once)."""
    out = values.copy()
    used = set()
    if len(values) < 2:
        return out
    h = values[1] - values[0]
    for t in targets:
        if not values[0] - 0.5 * h <= t <= values[-1] + 0.5 * h:
            continue
        k = int(np.argmin(np.abs(values - t)))
        if k in used:
            continue
        used.add(k)
        out[k] = t
    return out


class _RowCache:
    """Per-``(beta, mu)`` samples reused by every ``lam`` of a sweep row."""

    def __init__(self, beta, mu, family, r_max, n_x=4096):
        self.beta, self.mu, self.family = beta, mu, family
        self.xs = np.linspace(-r_max, r_max, n_x + 1)
        if family == "visible":
            self.yf = -self.xs**2 + beta
            self.S = None
            return
        Z0 = make_invisible_family(FoldCuspParams(0.0, beta, mu), validate=False, window=r_max)
        self.bump = Z0.bump
        self.yf = -self.xs**2 + beta - Z0.bump(self.xs, 1)
        self.S = None
        if beta > 0:
            lr = lower_return(beta, mu)
            self.domain = lr.domain
            span = lr.domain[1] - lr.domain[0]
            eps = 1e-9 * max(1.0, span)
            self.fx = np.linspace(lr.domain[0] + eps, lr.domain[1] - eps, 4096)
            self.S = self.fx + lr(self.fx)

    def n_pseudo(self, lam, r):
        xs = self.xs
        if self.family == "visible":
            return 0  # the direction function never vanishes
        xf = lam - xs
        num = self.yf + xf
        den = self.yf - xf
        m = np.abs(xs) <= r
        sgn = np.sign(num)
        idx = np.nonzero((sgn[:-1] * sgn[1:] < 0) & m[:-1] & m[1:])[0]
        count = 0
        for i in idx:
            xm = 0.5 * (xs[i] + xs[i + 1])
            xfm = lam - xm
            yfm = 0.5 * (self.yf[i] + self.yf[i + 1])
            if xfm * yfm < 0 and np.sign(den[i]) == np.sign(den[i + 1]):
                count += 1
        return count

    def n_kind_one(self, lam):
        if self.S is None:
            return 0
        g = 2 * lam - self.S
        sg = np.sign(g)
        n = int(np.count_nonzero(sg[:-1] * sg[1:] < 0))
        if n == 0 and np.min(np.abs(g)) < 1e-8:
            n = 1
        return n


def sweep(spec: GridSpec, window: Optional[float] = None, census_check: bool = True) -> BifDiagram:
    """Classify every node of a ``lam`` x ``beta`` grid.

    Grid nodes are moved onto the boundary curves of their row (and the row
    nearest ``beta = 0`` onto zero) so that boundary cases are sampled; the
    pseudo-equilibrium and cycle counts reuse per-row samples.
    """
    lam_base = np.linspace(*spec.lam_range, spec.n_lam)
    betas = _snap(np.linspace(*spec.beta_range, spec.n_beta), [0.0])
    shape = (spec.n_beta, spec.n_lam)
    L = np.zeros(shape)
    B = np.zeros(shape)
    M = np.zeros(shape)
    labels = np.full(shape, "", dtype=object)
    classes = np.full(shape, "", dtype=object)
    npe = np.zeros(shape, int)
    ncy = np.zeros(shape, int)
    flags = np.full(shape, "open", dtype=object)
    mismatch = 0
    failures = []
    branch = None if spec.family == "visible" else spec.branch
    lam_abs = max(abs(spec.lam_range[0]), abs(spec.lam_range[1]))
    for i, beta in enumerate(betas):
        beta = float(beta)
        mu = float(spec.mu_at(beta))
        if beta <= 0:
            mu = 0.0 if spec.mu_scaled else mu
        targets = [0.0]
        tag = None if spec.family == "visible" else _tag_for(mu, branch)
        if beta > 0:
            try:
                targets = [v for _, v, _ in boundary_values(beta, mu, spec.family, tag)]
            except L1NotFoundError as exc:
                failures.append((beta, mu, str(exc)))
                targets = []
        lams = _snap(lam_base, targets)
        r_max = default_window(lam_abs, beta, mu) if window is None else window
        cache = _RowCache(beta, mu, spec.family, r_max)
        for j, lam in enumerate(lams):
            lam = float(lam)
            L[i, j], B[i, j], M[i, j] = lam, beta, mu
            r = default_window(lam, beta, mu) if window is None else window
            try:
                res = classify_case(FoldCuspParams(lam, beta, mu), spec.family, r, branch)
            except (ParameterError, L1NotFoundError) as exc:
                failures.append((lam, beta, mu, str(exc)))
                flags[i, j] = "unresolved"
                continue
            if res.unresolved:
                flags[i, j] = "unresolved"
                continue
            labels[i, j] = str(res.label)
            classes[i, j] = equivalence_class(res.label)
            flags[i, j] = "boundary" if res.on_boundary else "open"
            npe[i, j] = cache.n_pseudo(lam, r)
            if spec.family == "visible" or beta <= 0:
                continue
            n1 = cache.n_kind_one(lam)
            geo = kind_three_geometry(FoldCuspParams(lam, beta, mu), r, bump=cache.bump)
            ncy[i, j] = n1 + (geo is not None)
            if census_check and not res.on_boundary:
                want = len(expected_census(res.label))
                if want != ncy[i, j]:
                    mismatch += 1
    return BifDiagram(spec, L, B, M, labels, classes, npe, ncy, flags, mismatch, failures)
