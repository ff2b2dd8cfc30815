import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from heisenberg_tm.hgroup import (Box, DimensionMismatch, GroupDim, HBall, HPoint, UndefinedInput, ball_volume,
                                  compose, dilate, hdist, hnorm, inverse, product_norm_ratio,
                                  quasi_triangle_defect, unit_ball_volume_closed_form)

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
pt1 = arrays(np.float64, 3, elements=coord)
pt2 = arrays(np.float64, 5, elements=coord)


@given(pt1, pt1, pt1)
def test_associative(a, b, c):
    lhs = compose(compose(a, b), c)
    rhs = compose(a, compose(b, c))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-9)


@given(pt2)
def test_inverse_and_identity(a):
    e = np.zeros(5)
    np.testing.assert_allclose(compose(a, inverse(a)), e, atol=1e-12)
    np.testing.assert_allclose(compose(inverse(a), a), e, atol=1e-12)
    np.testing.assert_array_equal(compose(a, e), a)


def test_compose_t_coordinate():
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([4.0, 5.0, 6.0])
    # t + t' + 2(y x' - x y')
    assert compose(a, b)[2] == 3 + 6 + 2 * (2 * 4 - 1 * 5)


@given(pt1, st.floats(0.01, 100))
def test_gauge_homogeneous(a, lam):
    assert math.isclose(hnorm(dilate(lam, a)), lam * hnorm(a), rel_tol=1e-12, abs_tol=1e-12)


@given(pt1, pt1, pt1)
def test_distance_left_invariant(a, b, g):
    d0 = hdist(a, b)
    d1 = hdist(compose(g, a), compose(g, b))
    assert math.isclose(d0, d1, rel_tol=1e-7, abs_tol=1e-6)


@given(pt1, pt1)
def test_distance_symmetric(a, b):
    assert math.isclose(hdist(a, b), hdist(b, a), rel_tol=1e-12, abs_tol=1e-12)


@given(pt1, pt1, pt1)
@settings(max_examples=300)
def test_quasi_triangle_bound(a, b, c):
    if hdist(a, c) + hdist(c, b) == 0:
        return
    assert quasi_triangle_defect(a, b, c) <= 3.0


@given(pt2, pt2)
def test_product_norm_bound(a, b):
    if hnorm(a) + hnorm(b) == 0:
        return
    assert product_norm_ratio(a, b) <= 3.0


def test_gauge_is_a_metric_on_samples():
    # the Koranyi gauge satisfies the triangle inequality with constant 1
    rng = np.random.default_rng(3)
    a, b, c = (rng.normal(size=(200000, 3)) * [1, 1, 4] for _ in range(3))
    assert np.max(quasi_triangle_defect(a, b, c)) <= 1.0 + 1e-12


def test_undefined_ratios():
    z = np.zeros(3)
    with pytest.raises(UndefinedInput):
        quasi_triangle_defect(z, z, z)
    with pytest.raises(UndefinedInput):
        product_norm_ratio(z, z)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        compose(np.zeros(3), np.zeros(5))
    with pytest.raises((DimensionMismatch, ValueError)):
        HPoint.from_coords(np.zeros(4))


def test_hpoint_roundtrip():
    p = HPoint.from_coords([1.0, 2.0, 3.0])
    q = compose(p, HPoint.origin(1))
    assert isinstance(q, HPoint)
    np.testing.assert_array_equal(q.coords, [1.0, 2.0, 3.0])
    assert p.n == 1


def test_dilate_rejects_nonpositive():
    with pytest.raises(ValueError):
        dilate(0.0, np.ones(3))


def test_constants_n1():
    d = GroupDim.of(1)
    assert d.Q == 4
    assert math.isclose(d.sigma_Q, math.pi ** 2, rel_tol=1e-14)
    assert math.isclose(d.alpha_Q, 4 * math.pi ** (2 / 3), rel_tol=1e-14)
    assert math.isclose(d.unit_ball_volume, math.pi ** 2 / 2, rel_tol=1e-12)
    assert math.isclose(d.threshold(2.0), d.alpha_Q / 2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ball_volume_closed_form(n):
    d = GroupDim.of(n)
    assert math.isclose(d.unit_ball_volume, unit_ball_volume_closed_form(n), rel_tol=1e-10)
    assert math.isclose(ball_volume(d, 2.0), d.unit_ball_volume * 2.0 ** d.Q)


def test_groupdim_rejects_zero():
    with pytest.raises(ValueError):
        GroupDim.of(0)


def test_box_helpers():
    b = Box.cube(2.0)
    assert b.volume == 64.0
    s = b.shrink(0.5, 0.25)
    assert s.lo == (-1.5, -1.5, -1.75)
    assert b.contains(np.array([[0, 0, 0], [3, 0, 0]])).tolist() == [True, False]
    with pytest.raises(ValueError):
        Box((0, 0, 1), (1, 1, 0))


@given(pt1, st.floats(0.1, 3))
def test_gauge_neighbourhood_contains_ball(c, R):
    b = Box(c, c).gauge_neighbourhood(R)
    rng = np.random.default_rng(0)
    u = rng.normal(size=(200, 3))
    u /= np.asarray(hnorm(u))[:, None] ** np.array([1, 1, 2])
    pts = compose(np.broadcast_to(c, (200, 3)), dilate(0.999 * R, u))
    assert np.all(b.contains(pts))


def test_hball_contains():
    ball = HBall(HPoint.origin(1), 1.0)
    assert ball.contains(np.array([[0.5, 0, 0], [0, 0, 1.5]])).tolist() == [True, False]
    with pytest.raises(ValueError):
        HBall(HPoint.origin(1), 0.0)
