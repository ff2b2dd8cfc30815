import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heisenberg_tm.calculus import fd_hgrad, hgrad_norm
from heisenberg_tm.cutoff import ball_cutoff, bump_profile, squared_cutoff
from heisenberg_tm.hgroup import hdist


def _samples(center, R, m, seed):
    rng = np.random.default_rng(seed)
    return center + rng.uniform(-1, 1, size=(m, 3)) * np.array([R, R, R * R])


def test_profile_shape():
    p = bump_profile()
    s = np.linspace(-3, 3, 6001)
    v = p.eval(s)
    assert np.all(v[np.abs(s) <= 1] == 1) and np.all(v[np.abs(s) >= 2] == 0)
    assert np.all(np.diff(v[s >= 0]) <= 0)
    assert np.max(np.abs(p.deriv(s))) <= p.deriv_bound + 1e-12
    # derivative agrees with finite differences and is continuous at the joins
    h = 1e-6
    fd = (p.eval(s + h) - p.eval(s - h)) / (2 * h)
    np.testing.assert_allclose(p.deriv(s), fd, atol=1e-5)
    assert p.deriv(np.array([1.0, 2.0])).tolist() == [0.0, 0.0]


@pytest.mark.parametrize("r", [0.3, 1.0, 5.0, 10.0])
def test_cutoff_gradient_bound(r):
    c = np.array([0.7, -0.4, 2.0])
    phi = ball_cutoff(c, r)
    pts = _samples(c, 2.5 * r, 20000, 1)
    g = hgrad_norm(phi, pts)
    assert g.max() <= 2 / r
    d = np.asarray(hdist(pts, c))
    v = phi(pts)
    assert np.all(v[d < r] == 1) and np.all(g[d < r] == 0)
    assert np.all(v[d > 2 * r] == 0)


@given(st.floats(0.1, 20))
def test_squared_cutoff_gradient(r):
    phi2 = squared_cutoff(np.zeros(3), r)
    pts = _samples(np.zeros(3), 2.2 * r, 2000, 2)
    assert hgrad_norm(phi2, pts).max() <= 4 / r


def test_cutoff_partials_vs_fd():
    phi = ball_cutoff(np.array([0.0, 1.0, 0.0]), 1.0)
    pts = _samples(np.array([0.0, 1.0, 0.0]), 2.0, 500, 3)
    d = np.asarray(hdist(pts, np.array([0.0, 1.0, 0.0])))
    pts = pts[(d > 0.05)]
    np.testing.assert_allclose(hgrad_norm(phi, pts), fd_hgrad(phi, pts, h=1e-6).norm, atol=1e-6)


def test_cutoff_metadata():
    phi = ball_cutoff(np.zeros(3), 2.0)
    assert phi.support[0].radius == 4.0
    assert phi.kinks[(0.0, 0.0, 0.0)] == (2.0, 4.0)
    with pytest.raises(ValueError):
        ball_cutoff(np.zeros(3), 0.0)
