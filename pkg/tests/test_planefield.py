import numpy as np
import pytest

from foldcusp.families import FoldCuspParams, bump_construct, make_invisible_family, make_visible_family, standard_form
from foldcusp.planefield import HORIZONTAL, flow_for_time, flow_to_section, lie_derivative, polynomial_field

from conftest import fd_lie


def test_lie_derivative_standard_forms():
    ivb = standard_form((1, -1, -1, -1))
    assert lie_derivative(ivb.X, HORIZONTAL, (0.0, 0.0), 1) == 0.0
    assert lie_derivative(ivb.X, HORIZONTAL, (0.0, 0.0), 2) == pytest.approx(-1.0, abs=1e-15)
    # Y = (1, -x**2)
    k2 = standard_form((1, 1, 1, -1))
    assert lie_derivative(k2.Y, HORIZONTAL, (0.0, 0.0), 3) == pytest.approx(-2.0, abs=1e-15)


def test_lie_order_out_of_range():
    Z = standard_form((1, 1, 1, 1))
    with pytest.raises(ValueError):
        lie_derivative(Z.X, HORIZONTAL, (0.0, 0.0), 4)


@pytest.mark.parametrize("family", ["invisible", "visible", "standard", "polynomial"])
def test_lie_derivatives_match_finite_differences(family, rng):
    if family == "invisible":
        Z = make_invisible_family(FoldCuspParams(0.3, 1.0, 0.1))
        fields = [Z.X, Z.Y]
        box = (-1.5, 4.5)
    elif family == "visible":
        Z = make_visible_family(0.2, 0.7)
        fields = [Z.X, Z.Y]
        box = (-2.0, 2.0)
    elif family == "standard":
        Z = standard_form((-1, 1, 1, -1))
        fields = [Z.X, Z.Y]
        box = (-2.0, 2.0)
    else:
        # (1 + x y, x**2 - y**3)
        P = np.zeros((3, 3)); P[0, 0] = 1; P[1, 1] = 1
        Q = np.zeros((3, 4)); Q[2, 0] = 1; Q[0, 3] = -1
        fields = [polynomial_field(P, Q)]
        box = (-1.0, 1.0)
    for W in fields:
        pts = rng.uniform(*box, size=(100, 2))
        for p in pts:
            for k in (1, 2, 3):
                exact = float(lie_derivative(W, HORIZONTAL, p, k))
                approx = fd_lie(W, HORIZONTAL, p, k)
                assert abs(exact - approx) <= 1e-6 * max(1.0, abs(exact))


def test_jacobian_matches_finite_differences(rng):
    Z = make_invisible_family(FoldCuspParams(-0.2, 0.5, -0.1))
    h = 1e-6
    for p in rng.uniform(-1.0, 3.0, size=(100, 2)):
        for W in (Z.X, Z.Y):
            J = W.jacobian(*p)
            num = np.column_stack([(W.value(p[0] + h, p[1]) - W.value(p[0] - h, p[1])) / (2 * h),
                                   (W.value(p[0], p[1] + h) - W.value(p[0], p[1] - h)) / (2 * h)])
            assert np.allclose(J, num, rtol=1e-6, atol=1e-6)


def test_upper_orbit_reflects_about_fold():
    Z = make_invisible_family(FoldCuspParams(1.0, 1.0, 0.0))
    res = flow_to_section(Z.X, (-1.0, 0.0), Z.f, 1, window=Z.window)
    assert res.hit is not None
    assert np.allclose(res.hit, (3.0, 0.0), atol=1e-8)
    assert abs(res.hit[1]) < 1e-10


def test_visible_standard_fold_never_returns():
    Z = standard_form((1, 1, 1, -1), window=3.0)
    res = flow_to_section(Z.X, (0.0, 0.0), Z.f, 1, window=3.0)
    assert res.hit is None
    assert res.reason == "window"
    pts = res.arc.points[1:]
    assert np.all(pts[:, 1] > 0)
    assert np.allclose(pts[:, 1], 0.5 * pts[:, 0] ** 2, atol=1e-6)


def test_visible_family_lower_orbit_backward_from_fold():
    Z = make_visible_family(0.0, 1.0, window=4.0)
    res = flow_to_section(Z.Y, (1.0, 0.0), Z.f, -1, window=4.0)
    assert res.hit is not None
    assert np.allclose(res.hit, (-2.0, 0.0), atol=1e-8)


def test_tangent_lower_orbit_recrosses_at_c():
    for beta, mu in [(1.0, 0.0), (0.25, 0.05), (0.04, -0.02)]:
        Z = make_invisible_family(FoldCuspParams(0.0, beta, mu))
        s = np.sqrt(beta)
        res = flow_to_section(Z.Y, (-s, 0.0), Z.f, -1, window=Z.window, rtol=1e-12, atol=1e-13)
        assert abs(res.hit[0] - (3 * s + mu)) < 1e-8


@pytest.mark.parametrize("offset", [1e-5, 1e-7])
@pytest.mark.parametrize("mu", [-0.01, 0.0, 0.01])
def test_grazing_double_crossing_is_detected(offset, mu):
    # starting just left of c, the lower orbit y = F(x) - F(x0) pokes above
    # the line on a short interval around the fold a; the first crossing is
    # the root of F(x) = F(x0) in (a, b)
    from foldcusp.retmaps import lower_return

    beta = 0.04
    lr = lower_return(beta, mu)
    x0 = lr.c - offset
    Z = make_invisible_family(FoldCuspParams(0.1975, beta, mu))
    res = flow_to_section(Z.Y, (x0, 0.0), Z.f, 1, window=Z.window, rtol=1e-12, atol=1e-13)
    assert res.hit is not None
    assert -0.2 < res.hit[0] < -0.19
    assert res.hit[0] == pytest.approx(lr(x0), abs=1e-8)


@pytest.mark.parametrize("p0", [(-1.0, 0.3), (0.5, 1.0), (2.0, 0.1)])
def test_hit_then_reverse_returns(p0):
    Z = make_invisible_family(FoldCuspParams(0.5, 1.0, 0.0))
    fwd = flow_to_section(Z.X, p0, Z.f, 1, window=Z.window)
    assert fwd.hit is not None
    assert abs(float(Z.f(*fwd.hit))) < 1e-10
    assert abs(float(lie_derivative(Z.X, Z.f, fwd.hit, 1))) > 1e-8
    back = flow_for_time(Z.X, fwd.hit, fwd.time, direction=-1)
    assert np.linalg.norm(back - np.asarray(p0)) < 1e-7


def test_arc_times_monotone():
    Z = make_invisible_family(FoldCuspParams(0.0, 1.0, 0.0))
    res = flow_to_section(Z.Y, (2.0, 0.0), Z.f, 1, window=Z.window)
    assert np.all(np.diff(res.arc.t) > 0)
    rev = res.arc.reversed()
    assert np.allclose(rev.start, res.arc.end) and np.all(np.diff(rev.t) > 0)


def test_degenerate_launch():
    Z = standard_form((1, 1, 1, 1))
    # Y = (1, x**2): Y.f = Y^2.f = 0 at the origin but Y^3.f = 2, so it still launches
    res = flow_to_section(Z.Y, (0.0, 0.0), Z.f, 1, window=1.0)
    assert res.reason in ("window", "hit", "time")
    # a field with zero velocity cannot launch
    P = np.zeros((1, 1)); Q = np.zeros((1, 1))
    res = flow_to_section(polynomial_field(P, Q), (0.0, 0.0), HORIZONTAL, 1, window=1.0)
    assert res.reason == "degenerate" and res.hit is None


def test_bump_does_not_change_upper_field():
    b = bump_construct(1.0, 0.0)
    Z1 = make_invisible_family(FoldCuspParams(0.2, 1.0, 0.0), bump=b)
    xs = np.linspace(-2, 4, 11)
    assert np.allclose(Z1.X.value(xs, 0 * xs)[1], 0.2 - xs)
