import math

import numpy as np
import pytest

from heisenberg_tm.functional import TMParams, grad_norm_Q
from heisenberg_tm.hgroup import GroupDim
from heisenberg_tm.moser import (SCAN_COLUMNS, blowup_curve, classify_growth, moser_function, moser_profile,
                                 moser_rule, threshold_scan)

D1 = GroupDim.of(1)


def test_profile_continuous_at_joins():
    for k in (4, 16, 64):
        f, df = moser_profile(k, D1)
        eps = 1e-12
        assert abs(f(1 / k - eps) - f(1 / k + eps)) < 1e-9
        assert f(1.0) == 0.0 and f(2.0) == 0.0
        # the plateau value is sigma^(-1/Q) (log k)^((Q-1)/Q)
        assert math.isclose(f(0.0), D1.sigma_Q ** -0.25 * math.log(k) ** 0.75, rel_tol=1e-14)
    with pytest.raises(ValueError):
        moser_profile(1.5, D1)


@pytest.mark.parametrize("k", [4, 16, 64, 256])
def test_gradient_norm_is_one(k):
    u = moser_function(k, D1)
    assert abs(grad_norm_Q(u, moser_rule(k, D1)) - 1) <= 1e-10


def test_blowup_curve_normalized():
    reps = blowup_curve(TMParams(5.0, 0.0, 2.0), [4, 16], D1)
    for r in reps:
        assert abs(r.tau_norm - 1) <= 1e-10
        assert r.grad_norm_Q < 1


def test_classifier_on_synthetic_curves():
    k = np.array([4, 6, 8, 11, 16, 23, 32, 45, 64, 91, 128, 181, 256], dtype=float)
    L = np.log(k)
    # power growth is GROWING; decay towards a limit like 1/log k is BOUNDED
    assert classify_growth(k, 3.0 * k ** 0.5).classification == "GROWING"
    assert classify_growth(k, 2.0 + 1.0 / L).classification == "BOUNDED"
    assert classify_growth(k, np.full_like(k, 7.0)).classification == "BOUNDED"
    fit = classify_growth(k[:4], k[:4] ** 2.0)
    assert math.isclose(fit.slope, 2.0, rel_tol=1e-10)
    with pytest.raises(ValueError):
        classify_growth(k[:3], k[:3])


def test_scan_flags():
    one = threshold_scan(0.0, 1.0, [9.0], k_max=16, dim=D1)
    assert one.flag and one.bracket is None
    low = threshold_scan(0.0, 1.0, [4.0, 5.0], k_max=64, dim=D1)
    assert low.flag == "grid does not straddle the transition"
    assert not low.bracket_contains_threshold


def test_scan_csv_columns():
    rep = threshold_scan(0.0, 1.0, [6.0, 10.7], k_max=32, dim=D1)
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(SCAN_COLUMNS)
    assert len(lines) == 1 + 2 * len(rep.k_grid)
    assert rep.to_json()["alphas"][1]["classification"] == "GROWING"
