import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenberg_tm.calculus import ScalarField
from heisenberg_tm.covering import Net
from heisenberg_tm.cutoff import ball_cutoff
from heisenberg_tm.functional import TMParams, normalize, support_rule
from heisenberg_tm.gluing import (GluingError, SUMMARY_COLUMNS, glue_experiment, minimal_radius,
                                  minimal_radius_closed_form, minkowski_constant, preset_field,
                                  printed_minkowski_constant, r_selector, support_box)
from heisenberg_tm.hgroup import Box, GroupDim

D1 = GroupDim.of(1)


def test_minimal_radius_example():
    p = TMParams(4.0, 0.0, 1.0)
    r = minimal_radius(p, D1)
    assert abs(r - 5.178) <= 0.01
    assert abs(r - minimal_radius_closed_form(p, D1)) <= 2e-6
    assert math.isclose(r_selector(p, D1), 2 * r)


@given(st.floats(0.05, 0.95), st.floats(0.0, 3.5), st.floats(0.1, 10))
@settings(max_examples=50)
def test_minimal_radius_is_the_boundary(frac, beta, tau):
    p = TMParams(frac * D1.threshold(beta), beta, tau)
    r = minimal_radius(p, D1)
    lhs = lambda s: p.alpha * minkowski_constant(s, tau, 4) ** D1.Qprime  # noqa: E731
    assert lhs(r) < D1.threshold(beta)
    assert lhs(r - 2e-6) >= D1.threshold(beta) * (1 - 1e-9) or r < 2e-6


def test_selector_floor_and_threshold():
    assert r_selector(TMParams(1e-6), D1) == 1.0
    with pytest.raises(GluingError):
        minimal_radius(TMParams(D1.alpha_Q), D1)


def test_minkowski_constants_differ_off_tau_one():
    assert minkowski_constant(10, 1.0, 4) == printed_minkowski_constant(10, 1.0)
    # for tau > 1 the printed form is smaller, so it is not an upper bound
    assert printed_minkowski_constant(10, 16.0) < minkowski_constant(10, 16.0, 4)


def test_single_ball_gluing_is_exact():
    # one centre at the origin: phi^2 = 1 on B(0, r) which contains supp u
    p = TMParams(0.5 * D1.alpha_Q)
    u0 = ball_cutoff(np.zeros(3), 0.5)
    rule = support_rule(u0)
    u = normalize(u0, "tau-norm", 1.0, rule)
    net = Net(np.zeros((1, 3)), 10.0, 10.0, Box.cube(1.0))
    run = glue_experiment(u, p, D1, r=10.0, rule=rule, net=net)
    assert len(run.per_ball) == 1
    assert math.isclose(run.global_tm, run.sum_local_tm, rel_tol=1e-14)
    assert run.passed


@pytest.mark.parametrize("preset", ["two-bump", "moser"])
def test_presets_pass(preset):
    p = TMParams(0.5 * D1.alpha_Q, 0.0, 1.0)
    u, rule = preset_field(preset, p, D1)
    run = glue_experiment(u, p, D1, rule=rule)
    assert run.passed, [c.line() for c in run.checks if not c.passed]
    assert run.global_tm <= run.sum_local_tm
    assert run.to_csv().splitlines()[0] == ",".join(SUMMARY_COLUMNS)
    assert run.to_json()["printed_minkowski_bound"] == printed_minkowski_constant(run.r, 1.0)


def test_preconditions():
    p = TMParams(1.0)
    u = ball_cutoff(np.zeros(3), 0.5)
    rule = support_rule(u)
    with pytest.raises(GluingError):
        glue_experiment(u.scaled(100.0), p, D1, r=5.0, rule=rule)
    with pytest.raises(GluingError):
        support_box(ScalarField(1, lambda x: x[:, 0]))
