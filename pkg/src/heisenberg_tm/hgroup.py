"""Group law, Koranyi gauge and gauge distance on the Heisenberg group H^n.

Points are stored as flat coordinate vectors ``[x_1..x_n, y_1..y_n, t]`` of
length ``2n + 1``. Every operation accepts either an :class:`HPoint` or an
array of shape ``(..., 2n + 1)`` and broadcasts over leading axes; passing
HPoints gives an HPoint back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special


class DimensionMismatch(ValueError):
    pass


class UndefinedInput(ValueError):
    pass


@dataclass(frozen=True)
class HPoint:
    """A point (x, y, t) of H^n."""

    x: tuple
    y: tuple
    t: float

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        if len(x) != len(y) or len(x) < 1:
            raise DimensionMismatch(f"x and y blocks differ in length: {len(x)} vs {len(y)}")
        t = float(self.t)
        if not all(math.isfinite(v) for v in (*x, *y, t)):
            raise ValueError("HPoint coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def coords(self) -> np.ndarray:
        return np.array((*self.x, *self.y, self.t))

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    @classmethod
    def from_coords(cls, c) -> "HPoint":
        c = np.asarray(c, dtype=float)
        if c.ndim != 1 or c.size % 2 != 1 or c.size < 3:
            raise DimensionMismatch(f"expected a flat vector of odd length >= 3, got shape {c.shape}")
        n = (c.size - 1) // 2
        return cls(tuple(c[:n]), tuple(c[n:2 * n]), c[-1])

    @classmethod
    def origin(cls, n: int = 1) -> "HPoint":
        return cls((0.0,) * n, (0.0,) * n, 0.0)


def _coords(p) -> np.ndarray:
    c = np.asarray(p, dtype=float)
    if c.shape[-1] % 2 != 1 or c.shape[-1] < 3:
        raise DimensionMismatch(f"last axis must have length 2n+1, got {c.shape[-1]}")
    return c


def _n_of(c: np.ndarray) -> int:
    return (c.shape[-1] - 1) // 2


def _same_n(a: np.ndarray, b: np.ndarray) -> int:
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatch(f"points live in different groups: {a.shape[-1]} vs {b.shape[-1]} coordinates")
    return _n_of(a)


def _wrap(out: np.ndarray, *inputs):
    if all(isinstance(p, HPoint) for p in inputs):
        return HPoint.from_coords(out)
    return out


def split(c: np.ndarray):
    """Views (x, y, t) of a coordinate array."""
    n = _n_of(c)
    return c[..., :n], c[..., n:2 * n], c[..., -1]


def compose(xi, eta):
    """Group product xi o eta."""
    a, b = _coords(xi), _coords(eta)
    n = _same_n(a, b)
    xa, ya, ta = a[..., :n], a[..., n:2 * n], a[..., -1]
    xb, yb, tb = b[..., :n], b[..., n:2 * n], b[..., -1]
    cross = np.sum(ya * xb, axis=-1) - np.sum(xa * yb, axis=-1)
    out = np.concatenate([xa + xb, ya + yb, (ta + tb + 2.0 * cross)[..., None]], axis=-1)
    return _wrap(out, xi, eta)


def inverse(xi):
    return _wrap(-_coords(xi), xi)


def dilate(lam: float, xi):
    """Parabolic dilation (lam x, lam y, lam^2 t)."""
    if not lam > 0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    c = _coords(xi).copy()
    c[..., :-1] *= lam
    c[..., -1] *= lam * lam
    return _wrap(c, xi)


def hnorm(xi):
    """Koranyi gauge [(|x|^2 + |y|^2)^2 + t^2]^(1/4)."""
    c = _coords(xi)
    e = np.sum(c[..., :-1] ** 2, axis=-1)
    out = np.sqrt(np.hypot(e, c[..., -1]))
    return float(out) if np.ndim(out) == 0 else out


def hdist(xi, eta):
    """Gauge distance |eta^-1 o xi|_h."""
    a, b = _coords(xi), _coords(eta)
    _same_n(a, b)
    return hnorm(compose(-b, a))


def quasi_triangle_defect(xi, eta, zeta):
    """d(xi, eta) / (d(xi, zeta) + d(zeta, eta)); bounded by 3 for any triple."""
    num = np.asarray(hdist(xi, eta))
    den = np.asarray(hdist(xi, zeta)) + np.asarray(hdist(zeta, eta))
    if np.any(den == 0):
        raise UndefinedInput("quasi-triangle defect is undefined when all three points coincide")
    out = num / den
    return float(out) if out.ndim == 0 else out


def product_norm_ratio(xi, eta):
    """|eta^-1 o xi|_h / (|xi|_h + |eta|_h), bounded by 3."""
    num = np.asarray(hdist(xi, eta))
    den = np.asarray(hnorm(xi)) + np.asarray(hnorm(eta))
    if np.any(den == 0):
        raise UndefinedInput("product-norm ratio is undefined at xi = eta = 0")
    out = num / den
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GroupDim:
    n: int
    Q: int
    Qprime: float
    omega_2n_minus_1: float
    sigma_Q: float
    alpha_Q: float
    unit_ball_volume: float
    unit_ball_volume_error: float

    @property
    def ncoords(self) -> int:
        return 2 * self.n + 1

    def threshold(self, beta: float) -> float:
        """Sharp exponent alpha_Q (1 - beta/Q)."""
        return self.alpha_Q * (1.0 - beta / self.Q)

    @classmethod
    def of(cls, n: int = 1) -> "GroupDim":
        return _group_dim(int(n))


@lru_cache(maxsize=None)
def _group_dim(n: int) -> GroupDim:
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    Q = 2 * n + 2
    omega = 2.0 * math.pi ** n / math.gamma(n)
    sigma = math.gamma(0.5) * math.gamma(n + 0.5) * omega / math.factorial(n)
    alpha = Q * sigma ** (1.0 / (Q - 1))
    # |B_h(0,1)| = omega * int_0^1 sqrt(1 - u^2) u^(n-1) du  (t-extent integrated out, u = |z|^2)
    val, err = integrate.quad(lambda u: math.sqrt(1.0 - u * u) * u ** (n - 1), 0.0, 1.0,
                              epsabs=1e-14, epsrel=1e-13)
    return GroupDim(n=n, Q=Q, Qprime=Q / (Q - 1), omega_2n_minus_1=omega, sigma_Q=sigma,
                    alpha_Q=alpha, unit_ball_volume=omega * val,
                    unit_ball_volume_error=omega * err)


def unit_ball_volume_closed_form(n: int) -> float:
    """omega_{2n-1} B(n/2, 3/2) / 2, used only as a cross-check."""
    omega = 2.0 * math.pi ** n / math.gamma(n)
    return 0.5 * omega * special.beta(n / 2.0, 1.5)


@dataclass(frozen=True)
class HBall:
    center: HPoint
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    def contains(self, pts) -> np.ndarray:
        return np.asarray(hdist(pts, self.center.coords)) < self.radius

    def to_json(self) -> dict:
        return {"center": self.center.coords.tolist(), "radius": self.radius}


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in global coordinates."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or len(lo) % 2 != 1 or len(lo) < 3:
            raise DimensionMismatch("box corners must both have length 2n+1")
        if any(h < l for l, h in zip(lo, hi)):
            raise ValueError("box has hi < lo on some axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return (len(self.lo) - 1) // 2

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    @classmethod
    def cube(cls, half: float, n: int = 1) -> "Box":
        d = 2 * n + 1
        return cls((-half,) * d, (half,) * d)

    def shrink(self, pad_xy: float, pad_t: float) -> "Box":
        pads = [pad_xy] * (len(self.lo) - 1) + [pad_t]
        lo = [l + p for l, p in zip(self.lo, pads)]
        hi = [h - p for h, p in zip(self.hi, pads)]
        return Box(lo, [max(a, b) for a, b in zip(lo, hi)])

    def gauge_neighbourhood(self, R: float) -> "Box":
        """A box containing every point within gauge distance R of this box."""
        n = self.n
        lo, hi = np.array(self.lo), np.array(self.hi)
        zmax = np.maximum(np.abs(lo[:-1]), np.abs(hi[:-1]))
        # |t' - t| <= R^2 + 2 sum_i (|y_i| |dx_i| + |x_i| |dy_i|), |dx_i|, |dy_i| < R
        tpad = R * R + 2.0 * R * float(zmax[:2 * n].sum())
        pads = np.array([R] * (2 * n) + [tpad])
        return Box(lo - pads, hi + pads)

    def contains(self, pts) -> np.ndarray:
        c = np.asarray(pts, dtype=float)
        return np.all((c >= np.array(self.lo)) & (c <= np.array(self.hi)), axis=-1)

    def to_json(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}


def ball_volume(dim: GroupDim, r: float) -> float:
    """|B_h(xi, r)| = |B_h(0, 1)| r^Q."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    return dim.unit_ball_volume * r ** dim.Q
