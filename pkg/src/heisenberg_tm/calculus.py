"""Left-invariant vector fields and sub-elliptic gradients on H^n.

    X_i = d/dx_i + 2 y_i d/dt,   Y_i = d/dy_i - 2 x_i d/dt,   T = d/dt

Fields carry caller-supplied Euclidean partials where a closed form exists;
finite differences along the group translations ``xi o (+-h e)`` serve as the
fallback and as the independent oracle for those closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from heisenberg_tm.hgroup import HBall, HPoint, _coords, _n_of, compose, hdist, hnorm


class SingularPointError(ValueError):
    pass


class ScalarField:
    """A real function on H^n evaluated on coordinate arrays of shape (N, 2n+1).

    ``partials`` returns Euclidean partials (d/dx_1..d/dx_n, d/dy_1..d/dy_n, d/dt)
    with shape (N, 2n+1). ``support`` is a tuple of HBalls whose union contains
    the support (None for unknown). ``singular_points`` are points where the
    field is not differentiable; ``kinks`` maps a centre (as a tuple) to radii of
    gauge spheres across which derivatives jump.
    """

    def __init__(self, n: int, value: Callable, partials: Optional[Callable] = None,
                 support=None, singular_points=(), kinks=None, name: str = "field"):
        self.n = n
        self._value = value
        self._partials = partials
        self.support = tuple(support) if support is not None else None
        self.singular_points = tuple(np.asarray(p, dtype=float) for p in singular_points)
        self.kinks = dict(kinks or {})
        self.name = name

    @property
    def has_partials(self) -> bool:
        return self._partials is not None

    def __call__(self, pts) -> np.ndarray:
        c = np.atleast_2d(_coords(pts))
        return np.asarray(self._value(c), dtype=float)

    def partials(self, pts) -> np.ndarray:
        if self._partials is None:
            raise ValueError(f"{self.name} has no closed-form partials")
        c = np.atleast_2d(_coords(pts))
        return np.asarray(self._partials(c), dtype=float)

    def scaled(self, c: float) -> "ScalarField":
        c = float(c)
        part = None if self._partials is None else (lambda p: c * self._partials(p))
        return ScalarField(self.n, lambda p: c * self._value(p), part, self.support,
                           self.singular_points, self.kinks, name=f"{c:g}*{self.name}")

    def __mul__(self, other: "ScalarField") -> "ScalarField":
        if not isinstance(other, ScalarField):
            return self.scaled(other)
        f, g = self, other

        def part(p):
            return f._partials(p) * g._value(p)[:, None] + g._partials(p) * f._value(p)[:, None]

        support = _intersect_support(f.support, g.support)
        return ScalarField(self.n, lambda p: f._value(p) * g._value(p),
                           part if f.has_partials and g.has_partials else None, support,
                           f.singular_points + g.singular_points, {**f.kinks, **g.kinks},
                           name=f"({f.name})*({g.name})")

    __rmul__ = __mul__

    def __add__(self, other: "ScalarField") -> "ScalarField":
        f, g = self, other
        part = None
        if f.has_partials and g.has_partials:
            part = lambda p: f._partials(p) + g._partials(p)  # noqa: E731
        support = None if f.support is None or g.support is None else f.support + g.support
        return ScalarField(self.n, lambda p: f._value(p) + g._value(p), part, support,
                           f.singular_points + g.singular_points, {**f.kinks, **g.kinks},
                           name=f"{f.name}+{g.name}")


def _intersect_support(a, b):
    # product support lies in either factor's support; keep the smaller description
    if a is None:
        return b
    if b is None:
        return a
    return a if len(a) <= len(b) else b


@dataclass
class HorizontalVector:
    """(X_1 u..X_n u, Y_1 u..Y_n u), vectorised over a leading axis."""

    a: np.ndarray
    b: np.ndarray

    @property
    def norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.a ** 2, axis=-1) + np.sum(self.b ** 2, axis=-1))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.a, self.b], axis=-1)


@dataclass
class DistGradParts:
    E: np.ndarray
    F: np.ndarray
    rho: np.ndarray
    grad: HorizontalVector = field(repr=False)


def horizontal_from_partials(pts: np.ndarray, P: np.ndarray) -> HorizontalVector:
    n = _n_of(pts)
    x, y = pts[..., :n], pts[..., n:2 * n]
    pt = P[..., -1:]
    return HorizontalVector(P[..., :n] + 2.0 * y * pt, P[..., n:2 * n] - 2.0 * x * pt)


def _check_index(i: int, n: int):
    if not 1 <= i <= n:
        raise IndexError(f"vector-field index must be in 1..{n}, got {i}")


def _unit(n: int, k: int) -> np.ndarray:
    e = np.zeros(2 * n + 1)
    e[k] = 1.0
    return e


def default_step(pts: np.ndarray) -> np.ndarray:
    return 1e-5 * (1.0 + np.asarray(hnorm(pts)))


def _translate_diff(func: Callable, pts: np.ndarray, e: np.ndarray, h) -> np.ndarray:
    """Central difference of func along s -> pts o (s e)."""
    h = np.broadcast_to(np.asarray(h, dtype=float), pts.shape[:-1])
    off = h[..., None] * e
    return (func(compose(pts, off)) - func(compose(pts, -off))) / (2.0 * h)


def _apply(kind: str, i: int, f: ScalarField, xi, h):
    pts = np.atleast_2d(_coords(xi))
    n = _n_of(pts)
    if kind != "T":
        _check_index(i, n)
    if f.has_partials:
        P = f.partials(pts)
        if kind == "T":
            return P[:, -1]
        H = horizontal_from_partials(pts, P)
        return H.a[:, i - 1] if kind == "X" else H.b[:, i - 1]
    if h is None:
        raise ValueError(f"{f.name} has no closed-form partials and no finite-difference step was given")
    k = {"X": i - 1, "Y": n + i - 1, "T": 2 * n}[kind]
    return _translate_diff(f, pts, _unit(n, k), h)


def apply_X(i: int, f: ScalarField, xi, h=None) -> np.ndarray:
    return _apply("X", i, f, xi, h)


def apply_Y(i: int, f: ScalarField, xi, h=None) -> np.ndarray:
    return _apply("Y", i, f, xi, h)


def apply_T(f: ScalarField, xi, h=None) -> np.ndarray:
    return _apply("T", 0, f, xi, h)


def hgrad(f: ScalarField, xi, h=None) -> HorizontalVector:
    pts = np.atleast_2d(_coords(xi))
    if f.has_partials:
        return horizontal_from_partials(pts, f.partials(pts))
    if h is None:
        raise ValueError(f"{f.name} has no closed-form partials and no finite-difference step was given")
    return fd_hgrad(f, pts, h)


def hgrad_norm(f: ScalarField, xi, h=None) -> np.ndarray:
    return hgrad(f, xi, h).norm


def fd_hgrad(f: ScalarField, xi, h=None) -> HorizontalVector:
    """Central differences along the horizontal group translations; O(h^2)."""
    pts = np.atleast_2d(_coords(xi))
    n = _n_of(pts)
    h = default_step(pts) if h is None else np.broadcast_to(np.asarray(h, dtype=float), pts.shape[:-1])
    if np.any(h <= 0):
        raise ValueError("finite-difference step must be positive")
    for s in f.singular_points:
        if np.any(np.asarray(hdist(pts, s)) <= h):
            raise SingularPointError(f"stencil of width {h.max():g} reaches a non-smooth point of {f.name}")
    a = np.stack([_translate_diff(f, pts, _unit(n, k), h) for k in range(n)], axis=-1)
    b = np.stack([_translate_diff(f, pts, _unit(n, n + k), h) for k in range(n)], axis=-1)
    return HorizontalVector(a, b)


def commutator_residual(i: int, j: int, f: ScalarField, xi, h=None) -> np.ndarray:
    """([X_i, Y_j] f + 4 delta_ij T f)(xi); identically zero on smooth f."""
    pts = np.atleast_2d(_coords(xi))
    n = _n_of(pts)
    _check_index(i, n)
    _check_index(j, n)
    delta = 4.0 if i == j else 0.0
    if isinstance(f, PolynomialField) and h is None:
        p = f.poly
        comm = p.Y(j).X(i) - p.X(i).Y(j) + p.T().scale(delta)
        return comm(pts)
    if h is None:
        h = 1e-3 * (1.0 + np.asarray(hnorm(pts)))
    ex, ey, et = _unit(n, i - 1), _unit(n, n + j - 1), _unit(n, 2 * n)

    def nested(s):
        xy = _translate_diff(lambda q: _translate_diff(f, q, ey, s), pts, ex, s)
        yx = _translate_diff(lambda q: _translate_diff(f, q, ex, s), pts, ey, s)
        return xy - yx + delta * _translate_diff(f, pts, et, s)

    # one Richardson step cancels the h^2 term of the nested central differences
    h = np.asarray(h, dtype=float)
    return (4.0 * nested(h / 2) - nested(h)) / 3.0


def dist_gradient(xi0, xi) -> DistGradParts:
    """E, F, rho = d_h(xi, xi0) and the closed-form horizontal gradient of rho."""
    c0 = _coords(xi0)
    c = np.atleast_2d(_coords(xi))
    n = _n_of(c)
    E, F, rho = _efr(c0, c)
    if np.any(rho == 0):
        raise SingularPointError("distance gradient is undefined at xi = xi0")
    dx = c[:, :n] - c0[..., :n]
    dy = c[:, n:2 * n] - c0[..., n:2 * n]
    r3 = rho[:, None] ** 3
    a = (dx * E[:, None] + dy * F[:, None]) / r3
    b = (dy * E[:, None] - dx * F[:, None]) / r3
    return DistGradParts(E, F, rho, HorizontalVector(a, b))


def _efr(c0: np.ndarray, c: np.ndarray):
    n = _n_of(c)
    x0, y0, t0 = c0[..., :n], c0[..., n:2 * n], c0[..., -1]
    x, y, t = c[:, :n], c[:, n:2 * n], c[:, -1]
    E = np.sum((x - x0) ** 2 + (y - y0) ** 2, axis=-1)
    F = t - t0 - 2.0 * np.sum(x * y0 - y * x0, axis=-1)
    return E, F, np.sqrt(np.hypot(E, F))


def dist_partials(xi0, pts: np.ndarray):
    """rho = d_h(., xi0) and its Euclidean partials; partials are 0 where rho = 0."""
    c0 = _coords(xi0)
    n = _n_of(pts)
    E, F, rho = _efr(c0, pts)
    safe = np.where(rho > 0, rho, 1.0)
    inv3 = np.where(rho > 0, safe ** -3, 0.0)[:, None]
    x0, y0 = c0[..., :n], c0[..., n:2 * n]
    dx = pts[:, :n] - x0
    dy = pts[:, n:2 * n] - y0
    px = inv3 * (dx * E[:, None] - y0 * F[:, None])
    py = inv3 * (dy * E[:, None] + x0 * F[:, None])
    pt = inv3 * (0.5 * F[:, None])
    return rho, np.concatenate([px, py, pt], axis=-1)


class RadialField(ScalarField):
    """u(xi) = profile(d_h(xi, center)) with chain-rule partials."""

    def __init__(self, center, profile: Callable, dprofile: Callable, radius: Optional[float] = None,
                 kinks=(), name: str = "radial"):
        c0 = np.asarray(center, dtype=float)
        n = _n_of(c0)
        self.center = c0
        self.profile = profile
        self.dprofile = dprofile
        self.radius = radius

        def value(p):
            return profile(np.asarray(hdist(p, c0)))

        def partials(p):
            rho, drho = dist_partials(c0, p)
            return dprofile(rho)[:, None] * drho

        support = None if radius is None else (HBall(HPoint.from_coords(c0), radius),)
        super().__init__(n, value, partials, support, singular_points=(c0,),
                         kinks={tuple(c0): tuple(kinks)}, name=name)


def gauge_field(center) -> RadialField:
    """rho(xi) = d_h(xi, center) as a field."""
    return RadialField(center, lambda r: r, np.ones_like, name="gauge")


class Polynomial:
    """Real polynomial in (x_1..x_n, y_1..y_n, t) with exact derivatives.

    Stored as {exponent tuple: coefficient}; integer coefficients stay exact
    under the X, Y, T operators.
    """

    def __init__(self, n: int, terms=None):
        self.n = n
        self.terms = {tuple(k): float(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def monomial(cls, n: int, exps, coeff: float = 1.0) -> "Polynomial":
        return cls(n, {tuple(exps): coeff})

    @classmethod
    def coordinate(cls, n: int, k: int) -> "Polynomial":
        e = [0] * (2 * n + 1)
        e[k] = 1
        return cls(n, {tuple(e): 1.0})

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def __call__(self, pts) -> np.ndarray:
        c = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros(c.shape[0])
        for exps, coeff in self.terms.items():
            out += coeff * np.prod(c ** np.array(exps), axis=-1)
        return out

    def __add__(self, other: "Polynomial") -> "Polynomial":
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0.0) + v
        return Polynomial(self.n, terms)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "Polynomial":
        return Polynomial(self.n, {k: c * v for k, v in self.terms.items()})

    def deriv(self, k: int) -> "Polynomial":
        terms = {}
        for exps, coeff in self.terms.items():
            if exps[k]:
                e = list(exps)
                e[k] -= 1
                terms[tuple(e)] = terms.get(tuple(e), 0.0) + coeff * exps[k]
        return Polynomial(self.n, terms)

    def times_coord(self, k: int, c: float = 1.0) -> "Polynomial":
        terms = {}
        for exps, coeff in self.terms.items():
            e = list(exps)
            e[k] += 1
            terms[tuple(e)] = terms.get(tuple(e), 0.0) + c * coeff
        return Polynomial(self.n, terms)

    def X(self, i: int) -> "Polynomial":
        n = self.n
        return self.deriv(i - 1) + self.deriv(2 * n).times_coord(n + i - 1, 2.0)

    def Y(self, i: int) -> "Polynomial":
        n = self.n
        return self.deriv(n + i - 1) + self.deriv(2 * n).times_coord(i - 1, -2.0)

    def T(self) -> "Polynomial":
        return self.deriv(2 * self.n)

    def is_zero(self) -> bool:
        return not self.terms


class PolynomialField(ScalarField):
    def __init__(self, poly: Polynomial, name: str = "poly"):
        self.poly = poly
        d = 2 * poly.n + 1
        grads = [poly.deriv(k) for k in range(d)]
        super().__init__(poly.n, poly, lambda p: np.stack([g(p) for g in grads], axis=-1), name=name)
