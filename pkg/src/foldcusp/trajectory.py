"""Hybrid integration of a Filippov system: smooth arcs, crossings and sliding.

Off the line the active field is integrated up to the next hit.  On the line
the signs of ``X.f`` and ``Y.f`` (scaled by the time direction) decide
between crossing, sliding along the Filippov field, leaving tangentially
from a visible fold, or resting.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .planefield import OrbitArc, flow_to_section
from .switching import direction_function, lie_on_sigma

__all__ = ["EventKind", "TrajectoryEvent", "Trajectory", "TrajectoryError", "simulate"]

SIGN_TOL = 1e-9
MAX_EVENTS = 10_000


class EventKind(str, Enum):
    CrossUp = "CrossUp"
    CrossDown = "CrossDown"
    SlideEntry = "SlideEntry"
    SlideExit = "SlideExit"
    TangencyHit = "TangencyHit"
    PseudoEquilibriumConvergence = "PseudoEquilibriumConvergence"
    WindowExit = "WindowExit"
    RestPoint = "RestPoint"


@dataclass(frozen=True)
class TrajectoryEvent:
    kind: EventKind
    time: float
    point: tuple


@dataclass
class Trajectory:
    arcs: List[OrbitArc] = field(default_factory=list)
    events: List[TrajectoryEvent] = field(default_factory=list)
    direction: int = 1

    @property
    def end(self) -> np.ndarray:
        if self.arcs:
            return self.arcs[-1].end
        return np.asarray(self.events[-1].point) if self.events else np.array([np.nan, np.nan])

    @property
    def duration(self) -> float:
        return float(sum(a.duration for a in self.arcs))

    def kinds(self) -> List[EventKind]:
        return [e.kind for e in self.events]

    def sliding_arcs(self) -> List[OrbitArc]:
        return [a for a in self.arcs if a.field_tag == "Sliding"]


class TrajectoryError(RuntimeError):
    """Event bookkeeping failed; ``partial`` holds what was computed."""

    def __init__(self, message, partial: Trajectory):
        super().__init__(message)
        self.partial = partial


def _shift(arc: OrbitArc, t0: float) -> OrbitArc:
    return OrbitArc(arc.t - arc.t[0] + t0, arc.points, arc.field_tag, arc.direction)


def _visible(Z, owner: str, x: float) -> bool:
    l2 = float(lie_on_sigma(Z, x, owner, 2))
    return l2 > 0 if owner == "X" else l2 < 0


def _slide(Z, x0: float, sigma: int, t_left: float, r: float):
    """Integrate ``x' = sigma * H(x)`` on the line until a region edge, a zero of H or the window."""

    def rhs(_t, u):
        return [sigma * float(direction_function(Z, u[0]).H)]

    def x_tangent(_t, u):
        return float(lie_on_sigma(Z, u[0], "X"))

    def y_tangent(_t, u):
        return float(lie_on_sigma(Z, u[0], "Y"))

    def settled(_t, u):
        return abs(float(direction_function(Z, u[0]).H)) - 1e-8

    def edge(_t, u):
        return r - abs(u[0])

    names = ("X", "Y", "settled", "window")
    events = [x_tangent, y_tangent, settled, edge]
    # a tangency the slide starts on is a region edge it is leaving, not a stop
    keep = [k for k, e in enumerate(events) if k > 1 or abs(e(0.0, [x0])) >= SIGN_TOL]
    events = [events[k] for k in keep]
    for e in events:
        e.terminal = True
    sol = solve_ivp(rhs, (0.0, t_left), [x0], method="DOP853", events=events, rtol=1e-10, atol=1e-12, dense_output=True)
    t_end = sol.t[-1]
    ts = np.linspace(0.0, t_end, max(2, min(400, int(50 * max(t_end, 1.0)))))
    xs = sol.sol(ts)[0]
    reason = "time"
    for k, te in zip(keep, sol.t_events):
        if te.size:
            reason = names[k]
            break
    arc = OrbitArc(ts, np.column_stack([xs, np.zeros_like(xs)]), "Sliding", sigma)
    return arc, reason


def simulate(Z, p0, t_max: float = 50.0, direction: int = 1, window: Optional[float] = None) -> Trajectory:
    """Local trajectory of ``Z`` through ``p0`` for time ``t_max``.

    ``direction = -1`` integrates backward; on the line this means the
    sliding flow runs along ``-H``.  The trajectory stops at window exit,
    at pseudo-equilibria (approached to ``|H| < 1e-8``), at points where both
    fields are tangent and at tangency points from which no orbit leaves.
    """
    sigma = 1 if direction >= 0 else -1
    r = Z.window if window is None else window
    traj = Trajectory(direction=sigma)
    p = np.asarray(p0, float).copy()
    t = 0.0

    def emit(kind, point):
        traj.events.append(TrajectoryEvent(kind, t, (float(point[0]), float(point[1]))))
        if len(traj.events) > MAX_EVENTS:
            raise TrajectoryError(f"more than {MAX_EVENTS} events: chattering or tolerance failure", traj)

    def fly(tag, start):
        nonlocal t
        res = flow_to_section(Z.component(tag), start, Z.f, sigma, window=r, t_max=max(t_max - t, 0.0), tag=tag)
        traj.arcs.append(_shift(res.arc, t))
        t += res.arc.duration
        if res.hit is None:
            if res.reason == "window":
                emit(EventKind.WindowExit, res.arc.end)
            elif res.reason == "degenerate":
                emit(EventKind.RestPoint, start)
            return None
        return np.array([res.hit[0], 0.0])

    if np.max(np.abs(p)) > r:
        raise ValueError(f"initial point {tuple(p)} outside the window [-{r}, {r}]^2")
    fp = float(Z.f(p[0], p[1]))
    if abs(fp) > 1e-10:
        p = fly("X" if fp > 0 else "Y", p)
        if p is None:
            return traj
    else:
        p = np.array([p[0], 0.0])

    while t < t_max:
        x = float(p[0])
        xf = sigma * float(lie_on_sigma(Z, x, "X"))
        yf = sigma * float(lie_on_sigma(Z, x, "Y"))
        tx, ty = abs(xf) < SIGN_TOL, abs(yf) < SIGN_TOL
        if tx and ty:
            emit(EventKind.RestPoint, p)
            return traj
        if tx or ty:
            owner = "X" if tx else "Y"
            emit(EventKind.TangencyHit, p)
            if _visible(Z, owner, x):
                p = fly(owner, p)
                if p is None:
                    return traj
                continue
            other = yf if tx else xf
            # the other field pushes across: follow it when it leaves into its own side
            if (owner == "X" and other < 0) or (owner == "Y" and other > 0):
                p = fly("Y" if owner == "X" else "X", p)
                if p is None:
                    return traj
                continue
            mode = "slide"
        elif xf > 0 and yf > 0:
            emit(EventKind.CrossUp, p)
            p = fly("X", p)
            if p is None:
                return traj
            continue
        elif xf < 0 and yf < 0:
            emit(EventKind.CrossDown, p)
            p = fly("Y", p)
            if p is None:
                return traj
            continue
        else:
            mode = "slide"
        if mode == "slide":
            H = direction_function(Z, x)
            if not H.defined or abs(H.H) < 1e-8:
                emit(EventKind.RestPoint, p)
                return traj
            emit(EventKind.SlideEntry, p)
            arc, reason = _slide(Z, x, sigma, t_max - t, r)
            traj.arcs.append(_shift(arc, t))
            t += arc.duration
            p = arc.end.copy()
            if reason == "settled":
                emit(EventKind.PseudoEquilibriumConvergence, p)
                return traj
            if reason == "window":
                emit(EventKind.WindowExit, p)
                return traj
            if reason == "time":
                return traj
            owner = reason
            if _visible(Z, owner, float(p[0])):
                emit(EventKind.SlideExit, p)
                p = fly(owner, p)
                if p is None:
                    return traj
                continue
            # sliding reaches a fold from which no orbit leaves
            emit(EventKind.RestPoint, p)
            return traj
    return traj
