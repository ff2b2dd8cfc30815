import json

import numpy as np
import pytest

from heisenberg_tm.covering import (Net, greedy_net, max_multiplicity, multiplicity, multiplicity_bound,
                                    sixth_ball_overlap_samples, uniform_samples, verify_cover,
                                    verify_cover_lattice, verify_separation)
from heisenberg_tm.hgroup import Box, hdist


@pytest.fixture(scope="module")
def net2():
    return greedy_net(Box.cube(3.0), 1.0)


def test_separation_bruteforce(net2):
    c = net2.centers
    d = np.asarray(hdist(c[:, None, :], c[None, :, :]))
    d[np.arange(len(c)), np.arange(len(c))] = np.inf
    assert d.min() >= 1.0
    rep = verify_separation(net2)
    assert rep.passed and rep.disjoint_sixth_balls
    assert np.isclose(rep.min_distance, d.min())


def test_cover_and_lattice_check(net2):
    rep = verify_cover_lattice(net2)
    assert rep.passed and rep.uncovered == 0 and rep.num_samples > 0
    s = uniform_samples(Box.cube(3.0).shrink(0.25, 0.0625), 50000, 4)
    assert verify_cover(net2, s).uncovered == 0


def test_counts_match_bruteforce(net2):
    s = uniform_samples(Box.cube(3.0), 2000, 5)
    d = np.asarray(hdist(s[:, None, :], net2.centers[None, :, :]))
    for rad in (1.0, 2.0):
        np.testing.assert_array_equal(net2.counts(s, rad), (d < rad).sum(axis=1))


def test_multiplicity_bounds(net2):
    s = np.concatenate([uniform_samples(Box.cube(3.0), 5000, 6), net2.centers])
    for f in (1, 2):
        m = max_multiplicity(net2, f * net2.rho, s)
        assert m <= multiplicity_bound(f * net2.rho, net2.rho, 4)
    assert multiplicity(net2, 1.0, np.zeros(3)) >= 1
    with pytest.raises(ValueError):
        multiplicity(net2, 0.5, np.zeros(3))
    assert sixth_ball_overlap_samples(net2, s) == 0


def test_greedy_is_deterministic_and_roundtrips(net2):
    again = greedy_net(Box.cube(3.0), 1.0)
    np.testing.assert_array_equal(again.centers, net2.centers)
    back = Net.from_json(json.loads(json.dumps(net2.to_json())))
    np.testing.assert_array_equal(back.centers, net2.centers)
    assert sum(net2.stage_counts) == len(net2)


def test_extra_candidates_are_covered():
    rng = np.random.default_rng(7)
    extra = rng.uniform(-6, 6, size=(300, 3))
    net = greedy_net(Box.cube(2.0), 1.0, extra_candidates=extra)
    assert verify_separation(net).passed
    assert net.counts(extra, 1.0, stop_at_one=True).min() == 1


def test_lattice_only_net_leaves_holes():
    # without repair the lattice-maximal net is not a cover of the box at full resolution
    net = greedy_net(Box.cube(3.0), 1.0, repair=())
    assert verify_separation(net).passed
    assert verify_cover_lattice(net).uncovered > 0


def test_bad_rho():
    with pytest.raises(ValueError):
        greedy_net(Box.cube(1.0), 0.0)
