"""Smooth planar vector fields, Lie derivatives and section crossings.

A field is carried as three vectorised callables of ``(x, y)``: the value
(shape ``(2, ...)``), the Jacobian ``J[i, j] = d_j W_i`` (shape
``(2, 2, ...)``) and the second-derivative tensor ``D[i, j, k] = d_j d_k W_i``
(shape ``(2, 2, 2, ...)``).  Switching functions carry their gradient,
Hessian and third-derivative tensor the same way.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import DOP853, solve_ivp
from scipy.optimize import brentq, minimize_scalar

__all__ = [
    "SmoothField",
    "SwitchingFunction",
    "OrbitArc",
    "FlowResult",
    "IntegrationError",
    "HORIZONTAL",
    "constant_first_field",
    "polynomial_field",
    "lie_derivative",
    "flow_to_section",
    "flow_for_time",
    "PRECISE",
]

RTOL = 1e-9
ATOL = 1e-10
HIT_TOL = 1e-10
# tighter pair for closure-sensitive work (cycle realisation, landing points)
PRECISE = {"rtol": 1e-12, "atol": 1e-13}


class IntegrationError(RuntimeError):
    """Raised when the integrator cannot make progress (step-size underflow)."""


@dataclass(frozen=True)
class SmoothField:
    value: Callable
    jacobian: Callable
    hessian: Callable
    name: str = ""
    # abscissas where the field is only C^1 (integration steps stop there)
    kinks: tuple = ()

    def __call__(self, x, y):
        return self.value(x, y)

    def scaled(self, sign: float) -> "SmoothField":
        """The field multiplied by a constant (used for time reversal)."""
        if sign == 1:
            return self
        return SmoothField(
            lambda x, y: sign * self.value(x, y),
            lambda x, y: sign * self.jacobian(x, y),
            lambda x, y: sign * self.hessian(x, y),
            name=f"{sign:+g}*{self.name}",
            kinks=self.kinks,
        )


@dataclass(frozen=True)
class SwitchingFunction:
    value: Callable
    grad: Callable
    hess: Callable
    third: Callable
    name: str = "y"

    def __call__(self, x, y):
        return self.value(x, y)


def _zeros(shape, x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    return np.zeros(shape + x.shape)


HORIZONTAL = SwitchingFunction(
    value=lambda x, y: np.asarray(y, float) + 0.0 * np.asarray(x, float),
    grad=lambda x, y: np.stack(np.broadcast_arrays(0.0 * np.asarray(x, float), 1.0 + 0.0 * np.asarray(y, float))),
    hess=lambda x, y: _zeros((2, 2), x, y),
    third=lambda x, y: _zeros((2, 2, 2), x, y),
    name="y",
)


def constant_first_field(k: float, g, dg, d2g, name: str = "", kinks=()) -> SmoothField:
    """Field ``(k, g(x))`` whose second component depends on ``x`` only.

    ``g``, ``dg`` and ``d2g`` are the component and its first two
    derivatives; every field of the fold-cusp families has this shape.
    """

    def value(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.stack([np.full(x.shape, float(k)), g(x) + 0.0 * y])

    def jacobian(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = np.zeros((2, 2) + x.shape)
        out[1, 0] = dg(x)
        return out

    def hessian(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = np.zeros((2, 2, 2) + x.shape)
        out[1, 0, 0] = d2g(x)
        return out

    return SmoothField(value, jacobian, hessian, name=name, kinks=tuple(float(v) for v in kinks))


def polynomial_field(P, Q, name: str = "") -> SmoothField:
    """Field with polynomial components given as 2-D coefficient arrays.

    ``P[i, j]`` multiplies ``x**i * y**j`` (numpy ``polyval2d`` convention).
    """
    P = np.atleast_2d(np.asarray(P, float))
    Q = np.atleast_2d(np.asarray(Q, float))
    pp = np.polynomial.polynomial
    comps = [P, Q]
    d1 = [[pp.polyder(c, axis=a) for a in (0, 1)] for c in comps]
    d2 = [[[pp.polyder(dc, axis=b) for b in (0, 1)] for dc in row] for row in d1]

    def ev(c, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return pp.polyval2d(x, y, c) + 0.0 * x

    def value(x, y):
        return np.stack([ev(c, x, y) for c in comps])

    def jacobian(x, y):
        return np.stack([np.stack([ev(d, x, y) for d in row]) for row in d1])

    def hessian(x, y):
        return np.stack([np.stack([np.stack([ev(d, x, y) for d in r2]) for r2 in row]) for row in d2])

    return SmoothField(value, jacobian, hessian, name=name)


def lie_derivative(W: SmoothField, f: SwitchingFunction, p, k: int = 1):
    """Iterated Lie derivative ``W^k.f`` at ``p = (x, y)`` for k in {1, 2, 3}.

    Computed from the analytic partials of ``W`` and ``f``; arrays of points
    are accepted (``p`` may be a pair of arrays).
    """
    if k not in (1, 2, 3):
        raise ValueError(f"Lie derivative order must be 1, 2 or 3, got {k}")
    x, y = p
    w = W.value(x, y)
    g = f.grad(x, y)
    L1 = np.einsum("i...,i...->...", g, w)
    if k == 1:
        return L1
    J = W.jacobian(x, y)
    Hf = f.hess(x, y)
    grad_L1 = np.einsum("ki...,i...->k...", Hf, w) + np.einsum("i...,ik...->k...", g, J)
    L2 = np.einsum("k...,k...->...", grad_L1, w)
    if k == 2:
        return L2
    D = W.hessian(x, y)
    Tf = f.third(x, y)
    grad_L2 = (
        2.0 * np.einsum("ik...,ij...,j...->k...", J, Hf, w)
        + np.einsum("kij...,i...,j...->k...", Tf, w, w)
        + np.einsum("ki...,ij...,j...->k...", Hf, J, w)
        + np.einsum("i...,ijk...,j...->k...", g, D, w)
        + np.einsum("i...,ij...,jk...->k...", g, J, J)
    )
    return np.einsum("k...,k...->...", grad_L2, w)


@dataclass
class OrbitArc:
    """Sampled orbit arc; ``t`` is elapsed time along the flow (always increasing)."""

    t: np.ndarray
    points: np.ndarray
    field_tag: str
    direction: int = 1

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def reversed(self) -> "OrbitArc":
        t = self.t[-1] - self.t[::-1]
        return OrbitArc(t, self.points[::-1].copy(), self.field_tag, -self.direction)


@dataclass
class FlowResult:
    arc: OrbitArc
    hit: Optional[np.ndarray]
    time: float
    reason: str = "hit"

    @property
    def found(self) -> bool:
        return self.hit is not None


def _point_lie(W, f, p, k=1):
    return float(lie_derivative(W, f, (p[0], p[1]), k))


def _launch_side(W, f, p, sigma):
    """Sign with which ``f`` leaves its current value along ``sigma * W``."""
    for k in (1, 2, 3):
        v = _point_lie(W, f, p, k) * sigma**k
        if abs(v) > 1e-12:
            return float(np.sign(v)), k
    return 0.0, 0


def _taylor_step(W, p, h, sigma):
    """Second-order Taylor step along ``sigma * W`` (used at tangential launches)."""
    w = W.value(p[0], p[1])
    J = W.jacobian(p[0], p[1])
    return p + sigma * h * w + 0.5 * h * h * (J @ w)


def _grazing_crossing(f, dense, side, t_old, ts, fs):
    """Pair of crossings hidden between two samples of one step.

    An orbit that dips through the section and back within a sample spacing
    shows up as an interior local minimum of ``side * f``.  Returns the times
    ``(t_lo, t_min)`` bracketing the first crossing, or None.
    """
    tt = np.concatenate([[t_old], ts])
    vv = side * np.concatenate([[float(f(*dense(t_old)))], fs])
    for j in range(1, len(tt) - 1):
        if vv[j] <= vv[j - 1] and vv[j] <= vv[j + 1]:
            res = minimize_scalar(lambda t: side * float(f(*dense(t))), bounds=(tt[j - 1], tt[j + 1]), method="bounded", options={"xatol": 1e-14})
            if res.fun <= 0.0:
                return np.array([tt[j - 1], res.x])
    return None


def flow_to_section(
    W: SmoothField,
    p,
    f: SwitchingFunction = HORIZONTAL,
    direction: int = 1,
    *,
    window: float = np.inf,
    t_max: float = 200.0,
    rtol: float = RTOL,
    atol: float = ATOL,
    tag: str = "",
    launch_step: float = 1e-4,
) -> FlowResult:
    """Follow ``W`` from ``p`` until the first zero of ``f``.

    Steps with DOP853, brackets sign changes of ``f`` on the dense output,
    locates the root with Brent's method and polishes the point with Newton
    steps along the flow until ``|f| < 1e-10``.  A result with ``hit=None``
    means the orbit left the square ``[-window, window]^2`` or ran out of time.
    """
    sigma = 1 if direction >= 0 else -1
    p = np.asarray(p, dtype=float).copy()
    start = p.copy()

    def rhs(_t, q):
        return sigma * W.value(q[0], q[1])

    t_offset = 0.0
    samples_t = [0.0]
    samples_p = [start.copy()]
    f0 = float(f(p[0], p[1]))
    armed = True
    if abs(f0) < HIT_TOL:
        side, order = _launch_side(W, f, p, sigma)
        if side == 0.0:
            return FlowResult(OrbitArc(np.array(samples_t), np.array(samples_p), tag, sigma), None, 0.0, "degenerate")
        if order > 1:
            # tangential launch: curvature-informed first step off the section
            p = _taylor_step(W, p, launch_step, sigma)
            t_offset = launch_step
            samples_t.append(t_offset)
            samples_p.append(p.copy())
        else:
            armed = False
    else:
        side = float(np.sign(f0))

    solver = DOP853(rhs, t_offset, p, t_bound=t_max, rtol=rtol, atol=atol, max_step=max(window, 1.0) / 4 if np.isfinite(window) else np.inf)
    while solver.status == "running":
        t_old = solver.t
        y_old = solver.y.copy()
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"integration failed at t={solver.t:.6g}: {msg}")
        t_new = solver.t
        q = solver.y
        dense = solver.dense_output()
        restart = None
        crossed = [k for k in W.kinks if min(y_old[0], q[0]) < k < max(y_old[0], q[0]) and abs(k - y_old[0]) > 1e-12]
        if crossed:
            # the field is only C^1 across a kink: end the step there and restart
            k = min(crossed, key=lambda v: abs(v - y_old[0]))
            t_new = brentq(lambda t: float(dense(t)[0]) - k, t_old, t_new, xtol=1e-15)
            sub = solve_ivp(rhs, (t_old, t_new), y_old, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
            q = sub.y[:, -1].copy()
            dense = sub.sol
            restart = (t_new, q)
        ts = np.linspace(t_old, t_new, 9)[1:]
        qs = dense(ts)
        fs = f(qs[0], qs[1])
        if not armed:
            if np.any(np.abs(fs) > 1e3 * HIT_TOL):
                idx = int(np.argmax(np.abs(fs) > 1e3 * HIT_TOL))
                ts, qs, fs = ts[idx:], qs[:, idx:], fs[idx:]
                armed = True
            else:
                samples_t.append(t_new)
                samples_p.append(q.copy())
                if restart is not None:
                    solver = DOP853(rhs, restart[0], restart[1], t_bound=t_max, rtol=rtol, atol=atol, max_step=solver.max_step)
                continue
        bad = np.nonzero(side * fs <= 0.0)[0]
        if not bad.size:
            graze = _grazing_crossing(f, dense, side, t_old, ts, fs)
            if graze is not None:
                ts = graze
                bad = np.array([1])
        if bad.size:
            j = int(bad[0])
            t_hi = ts[j]
            t_lo = ts[j - 1] if j > 0 else t_old
            g = lambda t: float(f(*dense(t)))
            if g(t_hi) == 0.0:
                t_star = t_hi
            elif side * g(t_lo) > 0:
                t_star = brentq(g, t_lo, t_hi, xtol=1e-15, rtol=1e-15, maxiter=200)
            else:
                t_star = t_lo
            hit = np.asarray(dense(t_star), float)
            if t_star > t_old:
                # dense output is less accurate than the step itself: redo the partial step
                sub = solve_ivp(rhs, (t_old, t_star), y_old, method="DOP853", rtol=rtol, atol=atol)
                hit = sub.y[:, -1]
            for _ in range(4):
                fv = float(f(hit[0], hit[1]))
                if abs(fv) < 1e-14:
                    break
                lf = sigma * _point_lie(W, f, hit, 1)
                if abs(lf) < 1e-8:
                    break
                dt = -fv / lf
                hit = hit + sigma * dt * W.value(hit[0], hit[1])
                t_star += dt
            samples_t.append(t_star)
            samples_p.append(hit.copy())
            arc = OrbitArc(np.array(samples_t), np.array(samples_p), tag, sigma)
            return FlowResult(arc, hit, t_star, "hit")
        outside = np.nonzero(np.max(np.abs(qs), axis=0) > window)[0]
        if outside.size:
            j = int(outside[0])
            samples_t.append(ts[j])
            samples_p.append(qs[:, j].copy())
            arc = OrbitArc(np.array(samples_t), np.array(samples_p), tag, sigma)
            return FlowResult(arc, None, float(ts[j]), "window")
        samples_t.append(t_new)
        samples_p.append(q.copy())
        if restart is not None:
            solver = DOP853(rhs, restart[0], restart[1], t_bound=t_max, rtol=rtol, atol=atol, max_step=solver.max_step)
    arc = OrbitArc(np.array(samples_t), np.array(samples_p), tag, sigma)
    return FlowResult(arc, None, float(solver.t), "time")


def flow_for_time(W: SmoothField, p, t: float, direction: int = 1, rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """Point reached after flowing ``W`` for time ``t`` (no section handling)."""
    sigma = 1 if direction >= 0 else -1
    solver = DOP853(lambda _t, q: sigma * W.value(q[0], q[1]), 0.0, np.asarray(p, float), t_bound=t, rtol=rtol, atol=atol)
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(msg)
    return np.asarray(solver.y, float)
