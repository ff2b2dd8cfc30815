import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenberg_tm.calculus import RadialField
from heisenberg_tm.cutoff import ball_cutoff
from heisenberg_tm.functional import (CSV_COLUMNS, FunctionalReport, TMParams, grad_norm_Q, local_ratio, normalize,
                                      reports_to_csv, support_rule, tau_norm, tm_functional, zeta, zeta_exp,
                                      zeta_tail)
from heisenberg_tm.hgroup import GroupDim, HBall, HPoint
from heisenberg_tm.quadrature import NonIntegrableError, radial_reduce

D1 = GroupDim.of(1)


def test_zeta_values():
    assert abs(zeta(4, 1.0) - (math.e - 2.5)) <= 1e-12
    assert zeta(4, 0.0) == 0.0
    assert math.isclose(zeta(2, 3.0), math.exp(3) - 1, rel_tol=1e-14)
    # leading term s^(m-1)/(m-1)! for small s
    assert math.isclose(zeta(4, 1e-4), 1e-12 / 6, rel_tol=1e-3)


@given(st.integers(2, 8), st.floats(0.5, 40))
def test_zeta_paths_agree(m, s):
    a, b = float(zeta_tail(m, s)), float(zeta_exp(m, s))
    assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300) + 1e-13


def test_zeta_crossover_continuous():
    for m in (2, 3, 4, 6):
        below = zeta(m, np.nextafter(float(m), 0))
        at = zeta(m, float(m))
        above = zeta(m, np.nextafter(float(m), 100))
        assert abs(above - below) <= 1e-12 * at


def test_zeta_convex_and_increasing():
    s = np.linspace(0, 50, 5001)
    z = zeta(4, s)
    assert np.all(np.diff(z) >= 0)
    d2 = z[2:] - 2 * z[1:-1] + z[:-2]
    assert np.all(d2 >= -1e-12 * z[2:])


def test_zeta_rejects():
    with pytest.raises(ValueError):
        zeta(4, -1.0)
    with pytest.raises(ValueError):
        zeta(1, 1.0)


def test_params_validation():
    with pytest.raises(ValueError):
        TMParams(0.0)
    with pytest.raises(ValueError):
        TMParams(1.0, -1.0)
    with pytest.raises(ValueError):
        TMParams(1.0, 0.0, 0.0)
    with pytest.raises(NonIntegrableError):
        TMParams(1.0, 4.0).check_against(D1)


def _radial_bump():
    f = lambda r: np.where(r < 1, (1 - r ** 2) ** 2, 0.0)  # noqa: E731
    df = lambda r: np.where(r < 1, -4 * r * (1 - r ** 2), 0.0)  # noqa: E731
    return RadialField(np.zeros(3), f, df, radius=1.0, kinks=(1.0,), name="poly-bump"), f, df


def test_norms_match_radial_oracle():
    u, f, df = _radial_bump()
    rule = support_rule(u)
    g = grad_norm_Q(u, rule) ** 4
    ref = radial_reduce(lambda r: np.abs(df(r)) ** 4, 0.0, 1.0, D1, "gradient")
    assert math.isclose(g, ref, rel_tol=1e-10)
    l = radial_reduce(lambda r: f(r) ** 4, 0.0, 1.0, D1, "volume")
    assert math.isclose(tau_norm(u, 2.0, rule) ** 4, ref + 2.0 * l, rel_tol=1e-10)


@pytest.mark.parametrize("beta", [0.0, 1.0, 3.0, 3.9])
def test_tm_matches_radial_oracle(beta):
    u, f, df = _radial_bump()
    p = TMParams(3.0, beta, 1.0)
    rep = tm_functional(u, p, support_rule(u, beta, order=20))
    ref = radial_reduce(lambda r: zeta(4, 3.0 * f(r) ** (4 / 3)), beta, 1.0, D1, "volume")
    assert math.isclose(rep.tm_value, ref, rel_tol=1e-8)


def test_beta_needs_centred_rule():
    u = ball_cutoff(np.array([3.0, 0, 0]), 0.5)
    with pytest.raises(ValueError):
        tm_functional(u, TMParams(1.0, 1.0), support_rule(u, 0.0))


def test_normalize_modes():
    u = ball_cutoff(np.zeros(3), 0.5)
    rule = support_rule(u)
    ug = normalize(u, "gradient-only", 1.0, rule)
    assert math.isclose(grad_norm_Q(ug, rule), 1.0, rel_tol=1e-12)
    ut = normalize(u, "tau-norm", 3.0, rule)
    assert math.isclose(tau_norm(ut, 3.0, rule), 1.0, rel_tol=1e-12)
    with pytest.raises(ValueError):
        normalize(u, "other", 1.0, rule)
    with pytest.raises(ValueError):
        normalize(u.scaled(0.0), "tau-norm", 1.0, rule)


def test_tm_monotone_in_alpha():
    u = normalize(ball_cutoff(np.zeros(3), 0.5), "tau-norm", 1.0, support_rule(ball_cutoff(np.zeros(3), 0.5)))
    rule = support_rule(u)
    vals = [tm_functional(u, TMParams(a), rule).tm_value for a in (1.0, 2.0, 4.0, 8.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_local_ratio_checks():
    u = ball_cutoff(np.zeros(3), 0.5)
    rule = support_rule(u)
    un = normalize(u, "gradient-only", 1.0, rule)
    ball = HBall(HPoint.origin(1), 1.0)
    assert local_ratio(un, TMParams(D1.alpha_Q), rule, ball) > 0
    with pytest.raises(ValueError):
        local_ratio(un, TMParams(D1.alpha_Q * 1.01), rule, ball)
    with pytest.raises(ValueError):
        local_ratio(un, TMParams(1.0), rule, HBall(HPoint.origin(1), 0.5))
    with pytest.raises(ValueError):
        local_ratio(un.scaled(2.0), TMParams(1.0), rule, ball)


def test_report_serialization():
    u = ball_cutoff(np.zeros(3), 0.5)
    rep = tm_functional(u, TMParams(1.0), support_rule(u))
    csv_text = reports_to_csv([rep])
    assert csv_text.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert rep.to_json()["params"]["alpha"] == 1.0
    with pytest.raises(ValueError):
        FunctionalReport(float("nan"), 1.0, 1.0, TMParams(1.0), 0.0)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 0.9))
def test_workers_do_not_change_values(a):
    u = ball_cutoff(np.zeros(3), a)
    rule = support_rule(u, 2.0)
    r1 = tm_functional(u, TMParams(2.0, 2.0), rule, workers=1)
    r3 = tm_functional(u, TMParams(2.0, 2.0), rule, workers=3)
    assert r1.to_json() == r3.to_json()
