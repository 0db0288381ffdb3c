import numpy as np
import pytest

import foldcusp.retmaps as rm
from foldcusp.bifurcation import census_codes, find_L1
from foldcusp.families import FoldCuspParams, bump_construct, make_invisible_family, make_visible_family, potential_F
from foldcusp.retmaps import (
    CycleKind,
    DomainError,
    Stability,
    detect_canard_cycles,
    first_return_psi,
    fixed_points,
    fold_transition_xi,
    fold_transition_xi_inverse,
    fold_transition_xi_inverse_derivative,
    lower_return,
    psi_flow,
    psi_map,
    rho_X,
    rho_X_flow,
    rho_Y,
)


def test_fold_transition():
    assert fold_transition_xi(1.0, 0.5) == 0.0
    assert fold_transition_xi(2.0, 0.5) == pytest.approx(np.sqrt(3.0), abs=1e-15)
    assert fold_transition_xi_inverse(fold_transition_xi(2.0, 0.5), 0.5) == pytest.approx(2.0)
    assert fold_transition_xi_inverse_derivative(0.0, 0.5) == 0.0
    with pytest.raises(DomainError):
        fold_transition_xi(0.5, 0.5)
    with pytest.raises(DomainError):
        fold_transition_xi(1.0, -0.1)


def test_rho_X_examples():
    assert rho_X(1.0, -1.0) == 3.0
    assert rho_X(0.7, 0.7) == 0.7
    assert rho_X(0.0, 0.5) == -0.5


def test_rho_X_matches_flow():
    Z = make_invisible_family(FoldCuspParams(0.4, 1.0, 0.0))
    for x in (-1.2, -0.3, 0.1):
        assert rho_X_flow(Z, x) == pytest.approx(rho_X(0.4, x), abs=1e-9)


def test_rho_Y_examples():
    p = FoldCuspParams(0.0, 1.0, 0.0)
    lr = lower_return(1.0, 0.0)
    assert lr(3.0, closed=True) == pytest.approx(-1.0, abs=1e-11)
    assert lr(1.0 + 1e-9) == pytest.approx(1.0, abs=1e-4)
    xi = rho_Y(p, 2.0)
    assert -1.0 < xi < 1.0
    assert abs(lr.F(xi) - lr.F(2.0)) < 1e-10
    with pytest.raises(DomainError):
        rho_Y(p, 3.5)
    with pytest.raises(DomainError):
        rho_Y(FoldCuspParams(0.0, -1.0, 0.0), 0.5)


def test_rho_Y_level_identity_bisection_oracle():
    for beta, mu in [(1.0, 0.0), (0.25, 0.1), (0.04, -0.02)]:
        lr = lower_return(beta, mu)
        xs = np.linspace(*lr.domain, 202)[1:-1]
        xi = lr(xs)
        assert np.max(np.abs(lr.F(xi) - lr.F(xs))) < 1e-10
        assert np.all((xi > lr.a) & (xi < lr.b))


def test_rho_Y_matches_flow():
    Z = make_invisible_family(FoldCuspParams(0.0, 0.25, 0.05))
    lr = lower_return(0.25, 0.05)
    from foldcusp.planefield import PRECISE, flow_to_section

    for x in (0.7, 1.0, 1.4):
        res = flow_to_section(Z.Y, (x, 0.0), Z.f, 1, window=Z.window, **PRECISE)
        assert res.hit[0] == pytest.approx(lr(x), abs=1e-9)


def test_psi_examples():
    p = FoldCuspParams(1.0, 1.0, 0.0)
    lr = lower_return(1.0, 0.0)
    assert 2.0 - lr(1.0 + 1e-12) == pytest.approx(1.0, abs=1e-5)
    assert rho_X(1.0, lr(3.0, closed=True)) == pytest.approx(3.0, abs=1e-11)
    assert first_return_psi(p, 2.0) < 2.0


def test_psi_monotone_and_flow_agreement():
    for lam, beta, mu in [(1.0, 1.0, 0.0), (1.1, 1.0, 0.05), (0.5, 0.25, -0.05)]:
        p = FoldCuspParams(lam, beta, mu)
        smap = psi_map(p)
        assert smap.is_monotone(512)
        xs = np.linspace(*smap.domain, 514)[1:-1]
        assert np.all(np.diff(smap(xs)) > 0)
        Z = make_invisible_family(p)
        for x in np.linspace(*smap.domain, 7)[1:-1]:
            assert psi_flow(Z, x) == pytest.approx(smap(x), abs=1e-7)


@pytest.mark.parametrize("beta", [0.04, 0.25, 1.0])
def test_two_fold_map_below_diagonal(beta):
    s = np.sqrt(beta)
    smap = psi_map(FoldCuspParams(s, beta, 0.0))
    xs = np.linspace(*smap.domain, 1002)[1:-1]
    assert np.all(smap(xs) - xs < 0)


@pytest.mark.parametrize("beta,mu", [(1.0, 0.0), (0.25, 0.0), (0.25, 0.05)])
def test_endpoint_multiplier(beta, mu):
    s = np.sqrt(beta)
    b = bump_construct(beta, mu)
    F2p = potential_F(beta, b, s + 1e-12, 2)
    F2m = potential_F(beta, b, s - 1e-12, 2)
    expected = np.sqrt(F2p / F2m)
    smap = psi_map(FoldCuspParams(s, beta, mu))
    h = 1e-5 * s
    slope = (smap(s + 2 * h) - smap(s + h)) / h
    assert abs(abs(slope) - expected) < 0.05 * expected
    assert abs(slope) < 1.0


def test_fixed_points_case_11():
    L1 = find_L1(1.0, 0.0)
    lam = 0.5 * (1.0 + L1)
    fps = [f for f in fixed_points(psi_map(FoldCuspParams(lam, 1.0, 0.0))) if not f.endpoint]
    assert len(fps) == 2
    inner, outer = fps
    assert inner.location < outer.location
    assert abs(inner.multiplier) < 1 and inner.stability is Stability.Attracting
    assert abs(outer.multiplier) > 1 and outer.stability is Stability.Repelling
    smap = psi_map(FoldCuspParams(lam, 1.0, 0.0))
    for f in fps:
        assert abs(smap(f.location) - f.location) < 1e-9


def test_fixed_points_at_L1_and_two_fold():
    L1 = find_L1(1.0, 0.0)
    fps = [f for f in fixed_points(psi_map(FoldCuspParams(L1, 1.0, 0.0))) if not f.endpoint]
    assert len(fps) == 1
    assert abs(abs(fps[0].multiplier) - 1) < 1e-3
    fps = [f for f in fixed_points(psi_map(FoldCuspParams(1.0, 1.0, 0.0))) if not f.endpoint]
    assert fps == []


def test_cycles_case_1_1():
    assert detect_canard_cycles(make_invisible_family(FoldCuspParams(0.0, -1.0, 0.0))) == []


def test_cycle_two_fold_resonance():
    Z = make_invisible_family(FoldCuspParams(1.0, 1.0, 0.0))
    cyc = detect_canard_cycles(Z)
    assert len(cyc) == 1
    c = cyc[0]
    assert c.kind is CycleKind.III and c.hyperbolic is False
    assert c.stability is Stability.Repelling
    assert c.closed
    xs = [p for a in c.arcs for p in (a.start[0], a.end[0])]
    assert any(abs(x + 1.0) < 1e-7 for x in xs) and any(abs(x - 3.0) < 1e-7 for x in xs)


def test_cycle_kind_three_repeller():
    Z = make_invisible_family(FoldCuspParams(-0.1, 0.04, 0.0))
    cyc = detect_canard_cycles(Z)
    assert census_codes(cyc) == ("III+rep",)
    assert cyc[0].closure_error < 1e-7
    # the flow-based search finds the same cycle
    flow = detect_canard_cycles(Z, method="flow")
    assert census_codes(flow) == ("III+rep",)
    assert flow[0].anchor == pytest.approx(cyc[0].anchor, abs=1e-9)


def test_kind_three_blocked_far_from_origin():
    # the sliding return from s = 2 lam - c runs into a far pseudo-equilibrium
    Z = make_invisible_family(FoldCuspParams(-0.5, 1.0, 0.0))
    assert all(c.kind is not CycleKind.III for c in detect_canard_cycles(Z))


def test_visible_family_has_no_cycles(rng):
    for _ in range(5):
        Z = make_visible_family(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        assert detect_canard_cycles(Z) == []


def test_census_stable_under_halved_tolerances(monkeypatch):
    points = [(-0.1, 0.04, 0.0), (0.2, 0.04, 0.0), (0.21609, 0.04, 0.0), (0.2025, 0.04, 0.01), (0.1975, 0.04, -0.01)]
    base = {}
    for p in points:
        cyc = detect_canard_cycles(make_invisible_family(FoldCuspParams(*p)))
        base[p] = census_codes(cyc)
        assert all(c.closed for c in cyc)
    monkeypatch.setattr(rm, "PRECISE", {"rtol": 0.5e-12, "atol": 0.5e-13})
    monkeypatch.setattr(rm, "MULTIPLIER_BAND", 0.5e-4)
    monkeypatch.setattr(rm, "CLOSURE_TOL", 0.5e-7)
    for p in points:
        cyc = detect_canard_cycles(make_invisible_family(FoldCuspParams(*p)))
        assert census_codes(cyc) == base[p]


def test_kind_one_cycles_realized():
    L1 = find_L1(1.0, 0.0)
    Z = make_invisible_family(FoldCuspParams(0.5 * (1 + L1), 1.0, 0.0))
    cyc = detect_canard_cycles(Z)
    assert census_codes(cyc) == ("I+att", "I+rep")
    for c in cyc:
        assert c.kind is CycleKind.I and c.closure_error < 1e-7
        # kind I touches the line only at crossing points
        assert len(c.arcs) == 2
