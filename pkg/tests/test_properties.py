"""Randomised invariants (hypothesis)."""
import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from foldcusp.bifurcation import classify_case
from foldcusp.families import FoldCuspParams, make_invisible_family, make_visible_family, standard_form
from foldcusp.planefield import lie_derivative
from foldcusp.retmaps import lower_return, psi_map, rho_X
from foldcusp.switching import count_identity_check, direction_function, lie_on_sigma, sliding_field
from foldcusp.trajectory import simulate

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])

lam_s = st.floats(-2.0, 2.0, allow_nan=False)
# the constructed bump needs beta = 0 or beta >= 1e-150
beta_any = st.floats(-1.5, 1.5).filter(lambda b: not 0 < b < 1e-150)
beta_pos = st.floats(0.02, 1.5, allow_nan=False)
frac_s = st.floats(-0.45, 0.45, allow_nan=False)
unit = st.floats(0.001, 0.999, allow_nan=False)


@SETTINGS
@given(lam=lam_s, x=st.floats(-10, 10, allow_nan=False))
def test_rho_X_involution(lam, x):
    assert rho_X(lam, rho_X(lam, x)) == x or abs(rho_X(lam, rho_X(lam, x)) - x) <= 4 * np.spacing(max(abs(x), abs(lam)) + 1)


@SETTINGS
@given(beta=beta_pos, frac=frac_s, u=unit)
def test_lower_return_level_set(beta, frac, u):
    lr = lower_return(beta, frac * math.sqrt(beta))
    lo, hi = lr.domain
    x = lo + u * (hi - lo)
    xi = lr(x)
    assert lr.a < xi < lr.b
    assert abs(lr.F(xi) - lr.F(x)) < 1e-10


@SETTINGS
@given(lam=st.floats(0.1, 2.0), beta=beta_pos, frac=frac_s, u=unit, v=unit)
def test_psi_increasing(lam, beta, frac, u, v):
    smap = psi_map(FoldCuspParams(lam, beta, frac * math.sqrt(beta)))
    lo, hi = smap.domain
    x1, x2 = sorted((lo + u * (hi - lo), lo + v * (hi - lo)))
    if x2 - x1 > 1e-9:
        assert smap(x1) < smap(x2)


@SETTINGS
@given(lam=lam_s, beta=beta_any, frac=frac_s, x=st.floats(-3, 3))
def test_H_is_sliding_first_component(lam, beta, frac, x):
    Z = make_invisible_family(FoldCuspParams(lam, beta, frac * math.sqrt(max(beta, 0))), validate=False)
    d = direction_function(Z, x)
    if not d.defined or abs(d.denominator) < 1e-6:
        return
    v = sliding_field(Z, x)
    assert abs(v[0] - d.H) <= 1e-12 * max(1.0, abs(d.H))


@SETTINGS
@given(lam=lam_s, beta=st.floats(-1.5, 1.5), x=st.floats(-3, 3))
def test_visible_H_constant(lam, beta, x):
    Z = make_visible_family(lam, beta)
    d = direction_function(Z, x)
    if d.defined:
        assert d.H == 1.0 or abs(d.H - 1.0) < 1e-12


@SETTINGS
@given(rho=st.tuples(*[st.sampled_from([-1, 1])] * 4), x=st.floats(-1, 1), y=st.floats(-1, 1))
def test_standard_form_lie_closed_form(rho, x, y):
    Z = standard_form(rho)
    r1, r2, r3, r4 = rho
    assert abs(lie_derivative(Z.X, Z.f, (x, y), 1) - r2 * x) < 1e-12
    assert abs(lie_derivative(Z.X, Z.f, (x, y), 2) - r1 * r2) < 1e-12
    assert abs(lie_derivative(Z.Y, Z.f, (x, y), 1) - r4 * x * x) < 1e-12
    assert abs(lie_derivative(Z.Y, Z.f, (x, y), 3) - 2 * r3 * r3 * r4) < 1e-12


@settings(max_examples=30, deadline=None)
@given(lam=lam_s, beta=beta_any.filter(lambda b: abs(b) <= 1.0), frac=frac_s)
def test_count_identity_invisible(lam, beta, frac):
    Z = make_invisible_family(FoldCuspParams(lam, beta, frac * math.sqrt(max(beta, 0))), validate=False)
    assert count_identity_check(Z)[4]


@settings(max_examples=30, deadline=None)
@given(lam=lam_s, beta=st.floats(0.05, 1.0), frac=frac_s, d=st.floats(-0.3, 0.3))
def test_label_locally_constant(lam, beta, frac, d):
    p = (lam, beta, frac * math.sqrt(beta))
    res = classify_case(p)
    if res.on_boundary:
        return
    q = (lam + 1e-9 * np.sign(d), beta + 1e-9 * d, p[2])
    assert classify_case(q).text == res.text


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(-1.0, 1.0), beta=st.floats(0.05, 1.0), u=st.floats(-0.95, 0.95), y=st.floats(-0.5, 0.5))
def test_trajectory_invariants(lam, beta, u, y):
    Z = make_invisible_family(FoldCuspParams(lam, beta, 0.0))
    p0 = (u * Z.window, y * Z.window)
    tr = simulate(Z, p0, t_max=5.0)
    times = [e.time for e in tr.events]
    assert all(b >= a for a, b in zip(times, times[1:]))
    for a, b in zip(tr.arcs, tr.arcs[1:]):
        assert np.max(np.abs(a.end - b.start)) < 1e-9
    for arc in tr.sliding_arcs():
        assert np.max(np.abs(arc.points[:, 1])) < 1e-9
    for e in tr.events:
        if e.kind.value in ("CrossUp", "CrossDown"):
            xf = lie_on_sigma(Z, e.point[0], "X")
            yf = lie_on_sigma(Z, e.point[0], "Y")
            assert xf * yf > 0
