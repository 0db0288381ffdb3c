import numpy as np
import pytest

from foldcusp.families import (
    BumpConstructionError,
    BumpFunction,
    FoldCuspParams,
    ParameterError,
    bump_construct,
    bump_printed,
    default_window,
    gst_slice,
    make_invisible_family,
    make_visible_family,
    printed_bump_function,
    potential_F,
    standard_form,
    validate_bump,
)
from foldcusp.planefield import PRECISE, flow_to_section
from foldcusp.switching import TangencyKind, find_tangencies, lie_on_sigma


def test_zero_bump_for_nonpositive_beta():
    for beta in (-0.5, 0.0):
        b = bump_construct(beta, 0.1)
        assert b.is_zero
        assert np.all(b(np.linspace(-3, 3, 50)) == 0.0)


def test_constructed_bump_anchor_values():
    b = bump_construct(1.0, 0.0)
    assert abs(potential_F(1.0, b, 3.0)) < 1e-10
    assert abs(potential_F(1.0, b, -1.0)) < 1e-12
    assert b(3.0) == pytest.approx(-16.0 / 3.0, abs=1e-12)
    # F0(-sqrt(beta)) = -1/3 + 1 - 2/3 exactly
    assert abs(-1.0 / 3.0 + 1.0 - 2.0 / 3.0) < 1e-15


def test_constructed_bump_support_and_smoothness():
    beta, mu = 0.25, 0.05
    b = bump_construct(beta, mu)
    s = np.sqrt(beta)
    assert b.support == (-s, 4 * s)
    for x in (-s, 4 * s):
        assert abs(b(x)) < 1e-12 and abs(b(x, 1)) < 1e-12
    for k in b.knots:
        for nu in (0, 1):
            assert abs(b.one_sided(k, nu, -1) - b.one_sided(k, nu, 1)) < 1e-12


def test_potential_minimum_unique():
    for beta, mu in [(1.0, 0.0), (0.04, 0.01), (0.25, -0.1)]:
        b = bump_construct(beta, mu)
        s = np.sqrt(beta)
        xs = np.linspace(-s, 4 * s, 4001)[1:-1]
        F = potential_F(beta, b, xs)
        i = int(np.argmin(F))
        assert abs(xs[i] - s) < 2 * (xs[1] - xs[0])
        assert potential_F(beta, b, s) < 0
        dF = potential_F(beta, b, xs, 1)
        assert np.all(dF[xs < s - 1e-9] < 0) and np.all(dF[xs > s + 1e-9] > 0)


@pytest.mark.parametrize("beta", [0.04, 0.25, 1.0])
@pytest.mark.parametrize("m", [-0.05, 0.0, 0.05])
def test_constructed_bump_passes_contract(beta, m):
    mu = m * np.sqrt(beta)
    rep = validate_bump(bump_construct(beta, mu), beta, mu)
    assert rep["all_passed"], {k: rep[k] for k in ("P1", "P2", "P3", "P4", "P5", "P6")}
    assert rep["P4"]["residual"] < 1e-10


def test_p4_at_small_beta():
    for mu in (0.05, -0.05):
        rep = validate_bump(bump_construct(0.04, mu), 0.04, mu)
        assert rep["P4"]["abscissa"] == pytest.approx(0.6 + mu)
        assert rep["P4"]["residual"] < 1e-10


def test_construction_rejects_bad_mu():
    with pytest.raises(BumpConstructionError):
        bump_construct(1.0, 1.5)


def test_printed_formula_values():
    assert bump_printed(1.0, 0.0, 1.0, piece=1) == pytest.approx(-(576 + 108) / 128, abs=1e-12)
    assert bump_printed(1.0, 0.0, 4.0, piece=2) == pytest.approx(0.0, abs=1e-12)
    assert bump_printed(1.0, 0.0, 1.0, piece=2) == pytest.approx(-42.75, abs=1e-12)
    assert bump_printed(2.0, 0.0, 4 * np.sqrt(2.0), piece=2) == pytest.approx(0.0, abs=1e-10)


def test_printed_bump_fails_continuity():
    rep = validate_bump(printed_bump_function(1.0, 0.0), 1.0, 0.0)
    assert not rep["P2"]["passed"]
    jumps = rep["P2"]["junction_jumps"]
    assert jumps["1"][0] == pytest.approx(42.75 - 5.34375, abs=1e-9)
    assert jumps["-1"][0] > 1.0
    assert not rep["all_passed"]


def test_invisible_family_folds():
    for beta, mu in [(1.0, 0.0), (0.25, 0.1), (0.04, -0.01)]:
        Z = make_invisible_family(FoldCuspParams(0.1, beta, mu))
        s = np.sqrt(beta)
        ys = [t for t in find_tangencies(Z) if t.owner == "Y"]
        assert [round(t.location, 8) for t in ys] == [round(-s, 8), round(s, 8)]
        # Y^2.f = F'' : negative at a, positive at b
        assert lie_on_sigma(Z, -s, "Y", 2) < 0 < lie_on_sigma(Z, s, "Y", 2)
        assert float(lie_on_sigma(Z, 0.1, "X", 2)) == -1.0


def test_visible_family_fold():
    Z = make_visible_family(0.3, 0.5)
    xs = [t for t in find_tangencies(Z) if t.owner == "X"]
    assert len(xs) == 1 and xs[0].location == pytest.approx(0.3)
    assert xs[0].lie2 == 1.0 and xs[0].visible


@pytest.mark.parametrize("beta,mu", [(1.0, 0.0), (0.25, 0.05), (0.04, -0.01), (2.0, 0.3)])
def test_tangent_orbit_recollides_at_c(beta, mu):
    Z = make_invisible_family(FoldCuspParams(0.0, beta, mu))
    s = np.sqrt(beta)
    res = flow_to_section(Z.Y, (-s, 0.0), Z.f, -1, window=Z.window, **PRECISE)
    assert abs(res.hit[0] - (3 * s + mu)) < 1e-8


def test_perturbations_depend_on_x_only():
    Z = make_invisible_family(FoldCuspParams(0.2, 0.5, 0.1))
    xs = np.linspace(-2, 3, 9)
    for y in (-1.0, 0.5):
        assert np.allclose(Z.Y.value(xs, y + 0 * xs), Z.Y.value(xs, 0 * xs))
        assert np.allclose(Z.X.value(xs, y + 0 * xs), Z.X.value(xs, 0 * xs))


def test_standard_forms():
    Z6 = standard_form((1, -1, -1, -1))
    assert Z6.labels["name"] == "Z0^{ivb,k1}"
    assert np.allclose(Z6.X.value(0.5, 0.0), (1.0, -0.5))
    assert np.allclose(Z6.Y.value(0.5, 0.0), (-1.0, -0.25))
    Z7 = standard_form((1, 1, 1, -1))
    assert Z7.labels["name"] == "Z0^{vis,k2}"
    assert np.allclose(Z7.Y.value(2.0, 0.0), (1.0, -4.0))
    with pytest.raises(ParameterError):
        standard_form((1, 0, 1, 1))


def test_organizing_center():
    Z = make_invisible_family(FoldCuspParams(0.0, 0.0, 0.0))
    tang = find_tangencies(Z)
    assert {t.owner for t in tang} == {"X", "Y"}
    assert all(abs(t.location) < 1e-7 and t.kind is TangencyKind.FoldCusp for t in tang)
    ty = [t for t in tang if t.owner == "Y"][0]
    assert ty.base_kind in (TangencyKind.CuspKind1, TangencyKind.CuspKind2)


def test_gst_slice():
    p = gst_slice(-0.3, lam=0.1)
    assert p.as_tuple() == (0.1, pytest.approx(0.09), -0.3)
    with pytest.raises(ParameterError):
        gst_slice(0.2)


def test_parameter_box():
    with pytest.raises(ParameterError):
        FoldCuspParams(3.0, 0.5, 0.0).validate()
    with pytest.raises(ParameterError):
        FoldCuspParams(0.0, 1.0, 0.5).validate()
    with pytest.raises(ParameterError):
        FoldCuspParams(0.0, float("nan"), 0.0).validate()
    FoldCuspParams(0.0, -1.0, 5.0).validate()  # mu unconstrained when beta <= 0


def test_default_window():
    assert default_window(0.0, -1.0) == 1.0
    assert default_window(1.0, 1.0, 0.1) == pytest.approx(5 * 2.1)


def test_bump_evaluation_outside_support():
    b = bump_construct(1.0, 0.2)
    assert b(-1.5) == 0.0 and b(4.5) == 0.0
    assert isinstance(b(0.3), float)
    assert b(np.array([0.0, 1.0])).shape == (2,)
    assert BumpFunction.zero().is_zero
