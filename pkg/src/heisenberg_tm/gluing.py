"""Local-to-global gluing of the Trudinger-Moser estimate, run as a checked pipeline.

Every integral (global functional, per-ball local functionals, norms) is a
weighted sum over one fixed node set for supp u. The net is built with those
nodes offered as extra candidates, so each node lies in some B_h(xi_i, r)
where phi_i^2 = 1; the discrete global sum is then bounded node by node by the
sum of the local ones.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from heisenberg_tm.calculus import ScalarField, horizontal_from_partials
from heisenberg_tm.covering import Net, greedy_net, max_multiplicity, verify_cover, verify_separation
from heisenberg_tm.cutoff import ball_cutoff, squared_cutoff
from heisenberg_tm.functional import TMParams, normalize, support_rule, tau_norm, zeta
from heisenberg_tm.hgroup import Box, GroupDim, hdist, hnorm
from heisenberg_tm.moser import moser_function
from heisenberg_tm.quadrature import QuadratureRule, weighted_sum

SUMMARY_COLUMNS = ("ball", "case", "local_tm", "minkowski_norm", "minkowski_bound", "bound_slack")


class GluingError(ValueError):
    pass


def minkowski_constant(r: float, tau: float, Q: int) -> float:
    """1 + (4/r) tau^(-1/Q): bound on ||grad(phi_i^2 u)||_Q when ||u||_{1,tau} <= 1."""
    return 1.0 + (4.0 / r) * tau ** (-1.0 / Q)


def printed_minkowski_constant(r: float, tau: float) -> float:
    """1 + 4/(tau r), the form that agrees with the one above only at tau = 1."""
    return 1.0 + 4.0 / (tau * r)


def _admissible(params: TMParams, dim: GroupDim, r: float) -> bool:
    return params.alpha * minkowski_constant(r, params.tau, dim.Q) ** dim.Qprime < dim.threshold(params.beta)


def minimal_radius(params: TMParams, dim: Optional[GroupDim] = None, tol: float = 1e-6) -> float:
    """Infimum of admissible r, by bisection on the strict inequality."""
    dim = dim or GroupDim.of(1)
    thr = dim.threshold(params.beta)
    if params.alpha >= thr:
        raise GluingError(f"alpha = {params.alpha} >= alpha_Q(1 - beta/Q) = {thr}: no admissible r")
    hi = 1.0
    while not _admissible(params, dim, hi):
        hi *= 2.0
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid > 0 and _admissible(params, dim, mid):
            hi = mid
        else:
            lo = mid
    return hi


def minimal_radius_closed_form(params: TMParams, dim: GroupDim) -> float:
    thr = dim.threshold(params.beta)
    return 4.0 * params.tau ** (-1.0 / dim.Q) / ((thr / params.alpha) ** (1.0 / dim.Qprime) - 1.0)


def r_selector(params: TMParams, dim: Optional[GroupDim] = None, margin: float = 2.0, r_floor: float = 1.0) -> float:
    """margin * minimal admissible r, but never below r_floor."""
    return max(margin * minimal_radius(params, dim), r_floor)


@dataclass
class BallRecord:
    index: int
    center: list
    case: str
    local_tm: float
    local_tm_error: float
    local_grad_Q: float
    minkowski_norm: float
    minkowski_rhs: float
    local_ratio: float
    tilde_grad_Q: float
    split_lhs: float
    split_rhs: float


@dataclass
class Check:
    name: str
    passed: bool
    lhs: float
    rhs: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.lhs:.6g} <= {self.rhs:.6g}"


@dataclass
class GlueRun:
    u_name: str
    params: TMParams
    r: float
    net: Net
    per_ball: list
    global_tm: float
    sum_local_tm: float
    grad_sum: float
    grad_sum_bound: float
    combined_error: float
    minkowski_bound: float
    printed_minkowski_bound: float
    max_multiplicity_2r: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"u": self.u_name, "params": asdict(self.params), "r": self.r,
                "net": {k: v for k, v in self.net.to_json().items() if k != "centers"},
                "num_active_balls": len(self.per_ball), "global_tm": self.global_tm,
                "sum_local_tm": self.sum_local_tm, "combined_error": self.combined_error,
                "grad_sum": self.grad_sum, "grad_sum_bound": self.grad_sum_bound,
                "minkowski_bound": self.minkowski_bound, "printed_minkowski_bound": self.printed_minkowski_bound,
                "max_multiplicity_2r": self.max_multiplicity_2r,
                "per_ball": [asdict(b) for b in self.per_ball],
                "checks": [asdict(c) for c in self.checks], "passed": self.passed}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for b in self.per_ball:
            w.writerow([b.index, b.case, repr(b.local_tm), repr(b.minkowski_norm), repr(self.minkowski_bound),
                        repr(self.minkowski_bound - b.minkowski_norm)])
        return buf.getvalue()


def support_box(u: ScalarField) -> Box:
    """A box containing every support ball of u."""
    if u.support is None:
        raise GluingError("u needs a support descriptor")
    los, his = [], []
    for b in u.support:
        c = b.center.coords
        bx = Box(c, c).gauge_neighbourhood(b.radius)
        los.append(bx.lo)
        his.append(bx.hi)
    return Box(np.min(los, axis=0), np.max(his, axis=0))


class _Pointwise:
    """u, grad_H u and the weight at a node set, computed once."""

    def __init__(self, u: ScalarField, nodes: np.ndarray, weights: np.ndarray, beta: float):
        self.nodes, self.weights = nodes, weights
        self.U = u(nodes)
        self.G = horizontal_from_partials(nodes, u.partials(nodes)).as_array()
        self.W = np.ones(len(nodes)) if beta == 0 else np.asarray(hnorm(nodes)) ** (-beta)

    def tm(self, values, alpha: float, Q: int) -> float:
        return weighted_sum(self.weights, self.W * zeta(Q, alpha * np.abs(values) ** (Q / (Q - 1.0))))

    def integral(self, values) -> float:
        return weighted_sum(self.weights, values)


def _ball_quantities(pw: _Pointwise, center, r: float, params: TMParams, dim: GroupDim):
    Q = dim.Q
    phi2 = squared_cutoff(center, r)
    P = phi2(pw.nodes)
    GP = horizontal_from_partials(pw.nodes, phi2.partials(pw.nodes)).as_array()
    grad_w = np.sqrt(np.sum((P[:, None] * pw.G + pw.U[:, None] * GP) ** 2, axis=1))
    inside = np.asarray(hdist(pw.nodes, center)) < 2.0 * r
    grad_u = np.sqrt(np.sum(pw.G ** 2, axis=1))
    phi = np.sqrt(P)
    return {
        "local_tm": pw.tm(P * pw.U, params.alpha, Q),
        "local_grad_Q": pw.integral(grad_w ** Q),
        "grad_u_ball": pw.integral(np.where(inside, grad_u ** Q, 0.0)),
        "u_ball": pw.integral(np.where(inside, np.abs(pw.U) ** Q, 0.0)),
        "split_rhs": 2.0 ** Q * pw.integral(phi * grad_u ** Q) + (8.0 / r) ** Q * pw.integral(phi * np.abs(pw.U) ** Q),
    }


def glue_experiment(u: ScalarField, params: TMParams, dim: Optional[GroupDim] = None, r: Optional[float] = None,
                    rule: Optional[QuadratureRule] = None, net: Optional[Net] = None, order: int = 10,
                    tol: float = 1e-9) -> GlueRun:
    dim = dim or GroupDim.of(u.n)
    Q = dim.Q
    params.check_against(dim)
    r = r_selector(params, dim) if r is None else float(r)
    if not r > 0:
        raise GluingError("r must be positive")
    rule = rule or support_rule(u, params.beta, order)
    tn = tau_norm(u, params.tau, rule)
    if tn > 1 + tol:
        raise GluingError(f"||u||_(1,tau) = {tn} exceeds 1")
    if net is None:
        base = support_box(u)
        region = Box(np.array(base.lo) - 2 * r, np.array(base.hi) + 2 * r)
        net = greedy_net(region, r, r=r, extra_candidates=rule.nodes)

    # balls of radius 2r that can meet supp u
    reach = np.zeros(len(net.centers), dtype=bool)
    for b in u.support:
        reach |= np.asarray(hdist(net.centers, b.center.coords)) < 2.0 * r + b.radius
    active = np.flatnonzero(reach)

    parts = [(rule.nodes, rule.weights)]
    if rule.companion is not None:
        parts.append((rule.companion.nodes, rule.companion.weights))
    pws = [_Pointwise(u, nd, wt, params.beta) for nd, wt in parts]
    pw = pws[0]

    mk = minkowski_constant(r, params.tau, Q)
    alpha_eff = params.alpha * mk ** dim.Qprime
    records = []
    local_err = []
    for idx, i in enumerate(active):
        c = net.centers[i]
        q = _ball_quantities(pw, c, r, params, dim)
        qc = _ball_quantities(pws[-1], c, r, params, dim) if len(pws) > 1 else q
        tilde_grad = q["local_grad_Q"] / mk ** Q
        ratio = q["local_tm"] / tilde_grad if tilde_grad > 0 else 0.0
        records.append(BallRecord(
            index=int(i), center=c.tolist(), case="far" if hnorm(c) > 6.0 * (2.0 * r) else "near",
            local_tm=q["local_tm"], local_tm_error=abs(q["local_tm"] - qc["local_tm"]),
            local_grad_Q=q["local_grad_Q"], minkowski_norm=q["local_grad_Q"] ** (1.0 / Q),
            minkowski_rhs=q["grad_u_ball"] ** (1.0 / Q) + (4.0 / r) * q["u_ball"] ** (1.0 / Q),
            local_ratio=ratio, tilde_grad_Q=tilde_grad, split_lhs=q["local_grad_Q"], split_rhs=q["split_rhs"]))
        local_err.append(records[-1].local_tm_error)

    global_tm = pw.tm(pw.U, params.alpha, Q)
    global_err = abs(global_tm - pws[-1].tm(pws[-1].U, params.alpha, Q)) if len(pws) > 1 else 0.0
    sum_local = math.fsum(b.local_tm for b in records)
    combined = global_err + math.fsum(local_err)
    grad_u_Q = pw.integral(np.sum(pw.G ** 2, axis=1) ** (Q / 2.0))
    u_Q = pw.integral(np.abs(pw.U) ** Q)
    grad_sum = math.fsum(b.local_grad_Q for b in records)
    grad_bound = 96.0 ** Q * grad_u_Q + (384.0 / r) ** Q * u_Q
    mult = max_multiplicity(net, 2.0 * r, pw.nodes)
    cover = verify_cover(net, pw.nodes)
    sep = verify_separation(net)

    eps = 1e-9
    checks = [
        Check("net separation >= r", sep.passed, r, sep.min_distance),
        Check("every node of supp u covered by some B(xi_i, r)", cover.passed, cover.uncovered, 0),
        Check("global_tm <= sum local_tm + error", global_tm <= sum_local + combined + eps * sum_local,
              global_tm, sum_local + combined),
        Check("max minkowski_norm <= 1 + (4/r) tau^(-1/Q) + 1e-6",
              all(b.minkowski_norm <= mk + 1e-6 for b in records),
              max((b.minkowski_norm for b in records), default=0.0), mk + 1e-6),
        Check("minkowski step per ball", all(b.minkowski_norm <= b.minkowski_rhs * (1 + eps) + eps for b in records),
              max((b.minkowski_norm - b.minkowski_rhs for b in records), default=0.0), 0.0),
        Check("per-ball |a+b|^Q split", all(b.split_lhs <= b.split_rhs * (1 + eps) + eps for b in records),
              max((b.split_lhs - b.split_rhs for b in records), default=0.0), 0.0),
        Check("rescaled local gradient <= 1", all(b.tilde_grad_Q <= 1 + 1e-6 for b in records),
              max((b.tilde_grad_Q for b in records), default=0.0), 1.0),
        Check("effective exponent below threshold", alpha_eff < dim.threshold(params.beta),
              alpha_eff, dim.threshold(params.beta)),
        Check("2r-multiplicity <= 48^Q", mult <= 48 ** Q, mult, 48 ** Q),
        Check("sum of local gradients <= 96^Q grad + (384/r)^Q L^Q", grad_sum <= grad_bound * (1 + eps),
              grad_sum, grad_bound),
    ]
    return GlueRun(u.name, params, r, net, records, global_tm, sum_local, grad_sum, grad_bound, combined,
                   mk, printed_minkowski_constant(r, params.tau), mult, checks)


# ---------------------------------------------------------------------------
# presets

def two_bump_field(dim: GroupDim, separation: float = 30.0, bump_radius: float = 0.5) -> ScalarField:
    """Sum of two cutoffs (support radius 2 * bump_radius) centred at 0 and separation * e_x."""
    far = np.zeros(dim.ncoords)
    far[0] = separation
    return ball_cutoff(np.zeros(dim.ncoords), bump_radius) + ball_cutoff(far, bump_radius)


def preset_field(name: str, params: TMParams, dim: Optional[GroupDim] = None, k: int = 16, order: int = 10):
    """(tau-normalized field, its rule) for the named preset."""
    dim = dim or GroupDim.of(1)
    if name == "two-bump":
        u = two_bump_field(dim)
    elif name == "moser":
        u = moser_function(k, dim)
    elif name == "bump":
        u = ball_cutoff(np.zeros(dim.ncoords), 0.5)
    else:
        raise ValueError(f"unknown preset {name!r}")
    rule = support_rule(u, params.beta, order)
    return normalize(u, "tau-norm", params.tau, rule), rule


def preset_alpha(dim: GroupDim, beta: float, fraction: float = 0.5) -> float:
    return fraction * dim.threshold(beta)
