"""Truncated exponential, Sobolev-type norms and the singular Trudinger-Moser functional."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from heisenberg_tm.calculus import ScalarField, horizontal_from_partials
from heisenberg_tm.hgroup import GroupDim, HBall, hdist, hnorm
from heisenberg_tm.quadrature import (NonIntegrableError, QuadratureRule, ball_rule, integrate,
                                      union_rule)

CSV_COLUMNS = ("alpha", "beta", "tau", "k", "tm_value", "grad_norm", "tau_norm", "quad_error")


# ---------------------------------------------------------------------------
# zeta(m, s) = e^s - sum_{k <= m-2} s^k / k!

def _check_m(m: int):
    if int(m) != m or m < 2:
        raise ValueError(f"zeta needs an integer m >= 2, got {m}")


def zeta_tail(m: int, s) -> np.ndarray:
    """Tail series sum_{k >= m-1} s^k / k!; accurate for moderate s."""
    _check_m(m)
    s = np.asarray(s, dtype=float)
    term = s ** (m - 1) / math.factorial(m - 1)
    total = term.copy()
    k = m - 1
    while True:
        k += 1
        term = term * s / k
        total = total + term
        if np.all(term <= 1e-17 * total) or k > 4 * m + 2000:
            return total


def zeta_exp(m: int, s) -> np.ndarray:
    """exp(s) minus its Taylor polynomial of degree m-2, with Neumaier summation."""
    _check_m(m)
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore"):
        total = np.exp(s)
    comp = np.zeros_like(total)
    term = np.ones_like(s)
    for k in range(m - 1):
        if k > 0:
            term = term * s / k
        x = -term
        t = total + x
        big = np.abs(total) >= np.abs(x)
        comp = comp + np.where(big, (total - t) + x, (x - t) + total)
        total = t
    with np.errstate(invalid="ignore"):
        out = total + comp
    return np.where(np.isinf(total), total, out)


def zeta(m: int, s):
    """zeta(m, s) for s >= 0: tail series for s <= m, exp minus partial sum beyond."""
    _check_m(m)
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("zeta is defined here for s >= 0")
    lo = arr <= m
    out = np.empty_like(arr)
    if np.any(lo):
        out[lo] = zeta_tail(m, arr[lo])
    if np.any(~lo):
        out[~lo] = zeta_exp(m, arr[~lo])
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TMParams:
    alpha: float
    beta: float = 0.0
    tau: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    def check_against(self, dim: GroupDim):
        if self.beta >= dim.Q:
            raise NonIntegrableError(f"|xi|^-{self.beta} is not locally integrable when Q = {dim.Q}")


@dataclass
class FunctionalReport:
    tm_value: float
    grad_norm_Q: float
    tau_norm: float
    params: TMParams
    quadrature_error: float
    k: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = (self.tm_value, self.grad_norm_Q, self.tau_norm, self.quadrature_error)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite functional report: {vals}")
        if self.tm_value < 0:
            raise ValueError("tm_value must be nonnegative")

    def to_json(self) -> dict:
        d = {"tm_value": self.tm_value, "grad_norm_Q": self.grad_norm_Q, "tau_norm": self.tau_norm,
             "params": asdict(self.params), "quadrature_error": self.quadrature_error, "k": self.k}
        if self.extra:
            d["extra"] = self.extra
        return d

    def csv_row(self) -> list:
        p = self.params
        return [p.alpha, p.beta, p.tau, "" if self.k is None else self.k, self.tm_value,
                self.grad_norm_Q, self.tau_norm, self.quadrature_error]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r.csv_row()])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# rules and pointwise integrands

def support_rule(u: ScalarField, beta: float = 0.0, order: int = 10, angular_order: Optional[int] = 16,
                 extra_breaks=()) -> QuadratureRule:
    """Polar rule on the support balls of u, with u's kink radii as cell boundaries.

    For beta > 0 the ball containing the origin must be centred there, so the
    weight |xi|_h^-beta is radial for that ball.
    """
    if u.support is None:
        raise ValueError(f"{u.name} has no support descriptor; pass an explicit rule")
    balls = _disjoint_balls(u.support)
    rules = []
    for ball in balls:
        c = ball.center.coords
        breaks = tuple(u.kinks.get(tuple(c), ())) + tuple(extra_breaks)
        breaks = tuple(b for b in breaks if 0 < b < ball.radius)
        at_origin = bool(np.all(c == 0))
        power = 0.0
        if beta > 0:
            if at_origin:
                power = beta
            elif hnorm(c) < ball.radius:
                raise ValueError("singular weight inside an off-centre support ball is not supported")
        rules.append(ball_rule(c, ball.radius, order=order, radial_breaks=breaks, singular_power=power,
                               angular_order=angular_order))
    return union_rule(rules)


def _disjoint_balls(balls):
    balls = list(balls)
    for i, a in enumerate(balls):
        for b in balls[i + 1:]:
            if hdist(a.center.coords, b.center.coords) < a.radius + b.radius:
                raise ValueError("support balls overlap; pass an explicit rule")
    return balls


def grad_abs(u: ScalarField, pts: np.ndarray) -> np.ndarray:
    """|grad_H u| at the points, from exact partials."""
    return horizontal_from_partials(pts, u.partials(pts)).norm


def _weight(pts: np.ndarray, beta: float) -> np.ndarray:
    if beta == 0:
        return np.ones(len(pts))
    rho = np.asarray(hnorm(pts))
    with np.errstate(divide="ignore"):
        return rho ** (-beta)


def _Q(u: ScalarField) -> int:
    return 2 * u.n + 2


def grad_power_integral(u: ScalarField, rule: QuadratureRule, workers: int = 1):
    Q = _Q(u)
    return integrate(lambda p: grad_abs(u, p) ** Q, rule, workers)


def lq_power_integral(u: ScalarField, rule: QuadratureRule, workers: int = 1):
    Q = _Q(u)
    return integrate(lambda p: np.abs(u(p)) ** Q, rule, workers)


def grad_norm_Q(u: ScalarField, rule: QuadratureRule, workers: int = 1) -> float:
    """(int |grad_H u|^Q)^(1/Q)."""
    return grad_power_integral(u, rule, workers)[0] ** (1.0 / _Q(u))


def tau_norm(u: ScalarField, tau: float, rule: QuadratureRule, workers: int = 1) -> float:
    """(int |grad_H u|^Q + tau |u|^Q)^(1/Q)."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    g = grad_power_integral(u, rule, workers)[0]
    l = lq_power_integral(u, rule, workers)[0]
    return (g + tau * l) ** (1.0 / _Q(u))


def tm_integrand(u: ScalarField, params: TMParams):
    Q = _Q(u)
    qp = Q / (Q - 1.0)

    def f(p):
        s = params.alpha * np.abs(u(p)) ** qp
        return _weight(p, params.beta) * zeta(Q, s)

    return f


def tm_functional(u: ScalarField, params: TMParams, rule: QuadratureRule, workers: int = 1,
                  k: Optional[int] = None) -> FunctionalReport:
    """int |xi|_h^-beta zeta(Q, alpha |u|^Q') d xi together with both norms (no normalization)."""
    dim = GroupDim.of(u.n)
    params.check_against(dim)
    if params.beta > 0:
        sp = rule.singular_point
        if sp is None or np.any(np.asarray(sp) != 0):
            raise ValueError("beta > 0 needs a rule refined at the origin")
    tm, tm_err = integrate(tm_integrand(u, params), rule, workers)
    g, g_err = grad_power_integral(u, rule, workers)
    l, l_err = lq_power_integral(u, rule, workers)
    Q = dim.Q
    err = tm_err + g_err + params.tau * l_err
    return FunctionalReport(tm_value=max(tm, 0.0), grad_norm_Q=g ** (1.0 / Q),
                            tau_norm=(g + params.tau * l) ** (1.0 / Q), params=params,
                            quadrature_error=err, k=k)


def normalize(u: ScalarField, mode: str, tau: float, rule: QuadratureRule, workers: int = 1) -> ScalarField:
    """Rescale u so the gradient-only norm or the tau-norm equals 1."""
    if mode == "gradient-only":
        norm = grad_norm_Q(u, rule, workers)
    elif mode == "tau-norm":
        norm = tau_norm(u, tau, rule, workers)
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    if not norm > 0:
        raise ValueError(f"cannot normalize {u.name}: its {mode} norm is zero")
    if norm == 1.0:
        return u
    return u.scaled(1.0 / norm)


def _support_within(u: ScalarField, ball: HBall) -> bool:
    if u.support is None:
        return False
    c = ball.center.coords
    return all(hdist(b.center.coords, c) + b.radius <= ball.radius * (1 + 1e-12) for b in u.support)


def local_ratio(u: ScalarField, params: TMParams, rule: QuadratureRule, ball: Optional[HBall] = None,
                workers: int = 1, tol: float = 1e-9) -> float:
    """tm_value / int |grad_H u|^Q for u supported in a ball with ||grad_H u||_Q <= 1.

    This is the constant bounded by the local inequality; alpha may reach the
    threshold alpha_Q (1 - beta/Q).
    """
    dim = GroupDim.of(u.n)
    if params.alpha > dim.threshold(params.beta) * (1 + 1e-12):
        raise ValueError(f"alpha = {params.alpha} exceeds alpha_Q(1 - beta/Q) = {dim.threshold(params.beta)}")
    if ball is not None and not _support_within(u, ball):
        raise ValueError("support of u is not inside the given ball")
    rep = tm_functional(u, params, rule, workers)
    g = rep.grad_norm_Q ** dim.Q
    if not g > 0:
        raise ValueError("local ratio is undefined for a field with zero gradient")
    if rep.grad_norm_Q > 1 + tol:
        raise ValueError(f"||grad u||_Q = {rep.grad_norm_Q} exceeds 1")
    return rep.tm_value / g
