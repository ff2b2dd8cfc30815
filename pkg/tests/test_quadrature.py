import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenberg_tm.hgroup import Box, GroupDim, hnorm
from heisenberg_tm.quadrature import (NonFiniteIntegrand, NonIntegrableError, ball_rule, box_rule, integrate,
                                      radial_reduce, union_rule, weighted_sum)

D1 = GroupDim.of(1)


def test_ball_rule_volume_and_scaling():
    v1 = ball_rule(np.zeros(3), 1.0).total_weight
    assert abs(v1 / (math.pi ** 2 / 2) - 1) <= 1e-12
    for r in (0.5, 2.0, 3.0):
        assert abs(ball_rule(np.zeros(3), r).total_weight / v1 - r ** 4) <= 1e-6 * r ** 4


def test_ball_rule_off_centre_is_translate():
    c = np.array([1.0, -2.0, 0.5])
    r0 = ball_rule(np.zeros(3), 1.0, order=6)
    r1 = ball_rule(c, 1.0, order=6)
    np.testing.assert_allclose(r0.weights, r1.weights)
    # integral of a left-translated function is unchanged
    f = lambda p: np.exp(-np.asarray(hnorm(p)) ** 2)  # noqa: E731
    from heisenberg_tm.hgroup import compose, inverse
    g = lambda p: f(compose(np.broadcast_to(inverse(c), p.shape), p))  # noqa: E731
    assert math.isclose(integrate(f, r0)[0], integrate(g, r1)[0], rel_tol=1e-12)


@pytest.mark.parametrize("beta", [0.0, 1.0, 2.0, 3.5, 3.9])
def test_singular_ball_matches_radial(beta):
    prof = lambda r: np.cos(r) ** 2  # noqa: E731
    rule = ball_rule(np.zeros(3), 1.5, order=10, singular_power=beta, angular_order=16)
    q, _ = integrate(lambda p: prof(np.asarray(hnorm(p))) * np.asarray(hnorm(p)) ** -beta, rule)
    ref = radial_reduce(prof, beta, 1.5, D1, "volume")
    assert abs(q / ref - 1) <= 1e-8


@pytest.mark.parametrize("beta,tol", [(2.0, 1e-4), (3.0, 1e-4), (3.9, 1e-4)])
def test_box_rule_singular_weight(beta, tol):
    box = Box((-1, -1, -1), (1, 1, 1))
    rule = box_rule(box, 6, levels=12, singular_point=np.zeros(3), singular_power=beta)
    val, _ = integrate(lambda p: np.asarray(hnorm(p)) ** -beta, rule)
    # reference: inside the unit gauge ball radially, plus the box minus ball on a dense plain rule
    inner = radial_reduce(lambda r: np.ones_like(r), beta, 1.0, D1, "volume")
    outer_rule = box_rule(box, 8, cells=24)
    outer, _ = integrate(lambda p: np.where(np.asarray(hnorm(p)) >= 1, np.asarray(hnorm(p)) ** -beta, 0.0),
                         outer_rule)
    ref = inner + outer
    assert abs(val / ref - 1) <= tol


def test_box_rule_polynomial_exact():
    box = Box((0, -1, -2), (1, 2, 3))
    rule = box_rule(box, 4)
    val, _ = integrate(lambda p: p[:, 0] ** 3 * p[:, 1] ** 2 + p[:, 2], rule)
    # int x^3 = 1/4, int y^2 over [-1,2] = 3, t-length 5; int t = 2.5 * 3
    assert math.isclose(val, 0.25 * 3 * 5 + 1 * 3 * 2.5, rel_tol=1e-13)
    assert math.isclose(rule.total_weight, box.volume, rel_tol=1e-14)


def test_non_integrable_rejected():
    with pytest.raises(NonIntegrableError):
        ball_rule(np.zeros(3), 1.0, singular_power=4.0)
    with pytest.raises(NonIntegrableError):
        radial_reduce(lambda r: np.ones_like(r), 4.0, 1.0, D1)


def test_non_finite_integrand_reports_node():
    rule = ball_rule(np.zeros(3), 1.0, order=4)
    with pytest.raises(NonFiniteIntegrand):
        integrate(lambda p: np.where(p[:, 0] > 0.1, np.inf, 1.0), rule)


def test_integrate_workers_identical():
    rule = ball_rule(np.zeros(3), 1.0, order=16, angular_order=32)
    f = lambda p: np.sin(p[:, 0]) ** 2 + np.exp(p[:, 2])  # noqa: E731
    assert integrate(f, rule, 1) == integrate(f, rule, 4)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25, deadline=None)
def test_weighted_sum_order_independent(seed):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0, 1, 1000)
    v = rng.normal(size=1000) * 10.0 ** rng.integers(-8, 8, 1000)
    perm = rng.permutation(1000)
    assert weighted_sum(w, v) == weighted_sum(w[perm], v[perm])


def test_union_rule_adds():
    a = ball_rule(np.zeros(3), 1.0, order=6)
    b = ball_rule(np.array([5.0, 0, 0]), 1.0, order=6)
    u = union_rule([a, b])
    assert math.isclose(u.total_weight, 2 * a.total_weight, rel_tol=1e-14)
    assert u.companion is not None and len(u.companion) == len(a.companion) + len(b.companion)


def test_radial_kernels():
    # int |grad_H rho|^Q over the unit ball = sigma_Q / Q
    val = radial_reduce(lambda r: np.ones_like(r), 0.0, 1.0, D1, "gradient")
    assert math.isclose(val, D1.sigma_Q / 4, rel_tol=1e-12)
    with pytest.raises(ValueError):
        radial_reduce(lambda r: r, 0.0, 1.0, D1, "other")


def test_n2_falls_back_to_sampling():
    d2 = GroupDim.of(2)
    rule = ball_rule(np.zeros(5), 1.0, d2, order=6, angular_order=6)
    assert rule.descriptor.get("qmc")
    assert abs(rule.total_weight / d2.unit_ball_volume - 1) <= 0.05
