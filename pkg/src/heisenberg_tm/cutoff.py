"""Transition profile and Heisenberg-ball cutoff functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from heisenberg_tm.calculus import RadialField


def _smoothstep(u):
    return u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)


def _smoothstep_deriv(u):
    return 30.0 * u * u * (1.0 - u) ** 2


def _profile(s):
    a = np.abs(np.asarray(s, dtype=float))
    u = np.clip(a - 1.0, 0.0, 1.0)
    return 1.0 - _smoothstep(u)


def _profile_deriv(s):
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    inside = (a > 1.0) & (a < 2.0)
    u = np.where(inside, a - 1.0, 0.0)
    return np.where(inside, -np.sign(s) * _smoothstep_deriv(u), 0.0)


@dataclass(frozen=True)
class BumpProfile:
    """Even C^2 profile: 1 on [-1, 1], 0 off (-2, 2), quintic smoothstep between."""

    eval: Callable
    deriv: Callable
    plateau: tuple = (-1.0, 1.0)
    support: tuple = (-2.0, 2.0)
    deriv_bound: float = 15.0 / 8.0


def bump_profile() -> BumpProfile:
    return BumpProfile(_profile, _profile_deriv)


def ball_cutoff(center, r: float) -> RadialField:
    """phi(d_h(xi, center) / r): 1 on B_h(center, r), supported in B_h(center, 2r)."""
    if not r > 0:
        raise ValueError(f"cutoff radius must be positive, got {r}")
    return RadialField(center, lambda rho: _profile(rho / r), lambda rho: _profile_deriv(rho / r) / r,
                       radius=2.0 * r, kinks=(r, 2.0 * r), name=f"cutoff(r={r:g})")


def squared_cutoff(center, r: float) -> RadialField:
    """phi_i^2, whose horizontal gradient is bounded by 4/r."""
    if not r > 0:
        raise ValueError(f"cutoff radius must be positive, got {r}")

    def d(rho):
        return 2.0 * _profile(rho / r) * _profile_deriv(rho / r) / r

    return RadialField(center, lambda rho: _profile(rho / r) ** 2, d, radius=2.0 * r,
                       kinks=(r, 2.0 * r), name=f"cutoff^2(r={r:g})")
