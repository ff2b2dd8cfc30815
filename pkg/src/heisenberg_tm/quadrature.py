"""Deterministic quadrature over boxes and gauge balls of H^n.

Haar measure on H^n is Lebesgue measure in global coordinates, so every rule
is a plain set of nodes and positive weights in R^{2n+1}.

Homogeneous polar coordinates about a centre c are

    xi = c o (rho sqrt(cos psi) omega, rho^2 sin psi),   omega in S^{2n-1},
    d xi = rho^{Q-1} cos^{n-1}(psi) d rho d psi d omega,

with psi in (-pi/2, pi/2). The gauge of the offset is exactly rho, so radial
breakpoints (kinks of piecewise profiles) become cell boundaries and a radial
singular weight rho^{-beta} is removed by the substitution w = rho^{Q-beta}.

For n >= 2 the angular integrals fall back to scrambled Sobol sampling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional

import numpy as np
from scipy import integrate as sp_integrate
from scipy.stats import qmc

from heisenberg_tm.hgroup import Box, GroupDim, HBall, HPoint, compose


class NonIntegrableError(ValueError):
    pass


class NonFiniteIntegrand(ValueError):
    def __init__(self, node):
        self.node = np.asarray(node)
        super().__init__(f"integrand is not finite at node {self.node.tolist()}")


@dataclass
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    region: object
    singular_point: Optional[np.ndarray]
    refinement_levels: int
    estimated_error: float
    descriptor: dict = field(default_factory=dict)
    companion: Optional["QuadratureRule"] = field(default=None, repr=False)

    def __len__(self):
        return len(self.weights)

    @property
    def total_weight(self) -> float:
        return math.fsum(self.weights)

    def to_json(self) -> dict:
        return {**self.descriptor, "num_nodes": len(self), "total_weight": self.total_weight,
                "estimated_error": self.estimated_error}


def _gauss01(order: int):
    g, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (g + 1.0), 0.5 * w


def _tensor_cells(lo: np.ndarray, hi: np.ndarray, order: int):
    """Tensor Gauss-Legendre nodes for a stack of cells lo, hi of shape (M, d)."""
    d = lo.shape[1]
    g, w = _gauss01(order)
    ref = np.array(list(product(g, repeat=d)))
    refw = np.prod(np.array(list(product(w, repeat=d))), axis=1)
    span = hi - lo
    nodes = lo[:, None, :] + span[:, None, :] * ref[None, :, :]
    weights = np.prod(span, axis=1)[:, None] * refw[None, :]
    return nodes.reshape(-1, d), weights.ravel()


def _psi_map(v):
    """psi = (pi/2) (3v - v^3)/2 flattens the sqrt(cos psi) endpoint behaviour."""
    return 0.25 * np.pi * (3.0 * v - v ** 3), 0.75 * np.pi * (1.0 - v * v)


def _offsets(rho, psi, theta):
    c = np.sqrt(np.cos(psi)) * rho
    return np.stack([c * np.cos(theta), c * np.sin(theta), rho * rho * np.sin(psi)], axis=-1)


def _radial_nodes(a: float, b: float, order: int, Q: int, power: float, from_zero: bool):
    """Nodes/weights for int_a^b g(rho) rho^(Q-1) d rho, exact in rho^(-power) on [0, b]."""
    g, w = _gauss01(order)
    if from_zero and power > 0:
        m = Q - power
        W = b ** m
        wn = W * g
        rho = wn ** (1.0 / m)
        return rho, rho ** power * W * w / m
    rho = a + (b - a) * g
    return rho, rho ** (Q - 1) * (b - a) * w


def _corner_polar(sp: np.ndarray, far: np.ndarray, order: int, Q: int, power: float):
    """Polar rule for a cell with the singular point sp at one corner (n = 1).

    The exit radius of a direction is min(e_x/(sqrt(cos psi)|cos theta|),
    e_y/(sqrt(cos psi)|sin theta|), sqrt(e_t/|sin psi|)); the angular domain is
    split where the active face changes so every piece is smooth.
    """
    ext = np.abs(far - sp)
    sgn = np.sign(far - sp)
    quad = (int(sgn[0]), int(sgn[1]))
    th0 = {(1, 1): 0.0, (-1, 1): 0.5 * np.pi, (-1, -1): np.pi, (1, -1): 1.5 * np.pi}[quad]
    phik = math.atan(ext[1] / ext[0]) if quad in ((1, 1), (-1, -1)) else math.atan(ext[0] / ext[1])
    g, w = _gauss01(order)
    nodes, weights = [], []
    for pa, pb in ((0.0, phik), (phik, 0.5 * np.pi)):
        for th, wth in zip(th0 + pa + (pb - pa) * g, (pb - pa) * w):
            m = min(ext[0] / abs(math.cos(th)) if abs(math.cos(th)) > 0 else np.inf,
                    ext[1] / abs(math.sin(th)) if abs(math.sin(th)) > 0 else np.inf)
            psik = math.atan(ext[2] / (m * m))
            for qa, qb, side in ((0.0, psik, 0), (psik, 0.5 * np.pi, 1)):
                for ps, wps in zip(qa + (qb - qa) * g, (qb - qa) * w):
                    rmax = m / math.sqrt(math.cos(ps)) if side == 0 else math.sqrt(ext[2] / math.sin(ps))
                    rho, wr = _radial_nodes(0.0, rmax, order, Q, power, from_zero=True)
                    p = np.full_like(rho, ps * sgn[2])
                    nodes.append(sp + _offsets(rho, p, np.full_like(rho, th)))
                    weights.append(wr * wth * wps)
    return np.concatenate(nodes), np.concatenate(weights)


def _box_core(region: Box, order: int, levels: int, sp, cells: int, power: float):
    lo, hi = np.array(region.lo), np.array(region.hi)
    d = lo.size
    axes = []
    for k in range(d):
        b = set(np.linspace(lo[k], hi[k], cells + 1).tolist())
        if sp is not None and lo[k] < sp[k] < hi[k]:
            b.add(float(sp[k]))
        axes.append(np.array(sorted(b)))
    idx = np.array(list(product(*[range(len(a) - 1) for a in axes])))
    clo = np.stack([axes[k][idx[:, k]] for k in range(d)], axis=1)
    chi = np.stack([axes[k][idx[:, k] + 1] for k in range(d)], axis=1)
    if sp is None:
        return _tensor_cells(clo, chi, order)
    touch = np.all((clo == sp) | (chi == sp), axis=1)
    nodes, weights = [], []
    if np.any(~touch):
        nd, wt = _tensor_cells(clo[~touch], chi[~touch], order)
        nodes.append(nd)
        weights.append(wt)
    Q = d + 1
    for l0, h0 in zip(clo[touch], chi[touch]):
        far = np.where(l0 == sp, h0, l0)
        for _ in range(levels):
            # parabolic halving: x, y halved, t quartered
            mid = sp + (far - sp) * np.r_[np.full(d - 1, 0.5), 0.25]
            kids = []
            for choice in product((0, 1), repeat=d):
                a = np.where(np.array(choice) == 0, sp, mid)
                b = np.where(np.array(choice) == 0, mid, far)
                if any(choice):
                    kids.append((np.minimum(a, b), np.maximum(a, b)))
            nd, wt = _tensor_cells(np.array([k[0] for k in kids]), np.array([k[1] for k in kids]), order)
            nodes.append(nd)
            weights.append(wt)
            far = mid
        nd, wt = _corner_polar(sp, far, order, Q, power)
        nodes.append(nd)
        weights.append(wt)
    return np.concatenate(nodes), np.concatenate(weights)


def box_rule(region: Box, base_order: int = 4, levels: int = 0, singular_point=None, cells: int = 4,
             singular_power: float = 0.0, seed: int = 0) -> QuadratureRule:
    """Composite tensor Gauss-Legendre rule on a box.

    With a singular point the grid is split through it and the cells touching
    it are parabolically halved ``levels`` times towards it (x, y halved, t
    quartered); the last cell is integrated in
    homogeneous polar coordinates, exactly in rho^(-singular_power). The
    singular point must lie on the centre axis x = y = 0.
    """
    if base_order < 2 or levels < 0 or cells < 1:
        raise ValueError("need base_order >= 2, levels >= 0, cells >= 1")
    if any(h <= l for l, h in zip(region.lo, region.hi)):
        raise ValueError("degenerate box")
    n = region.n
    sp = None if singular_point is None else np.asarray(singular_point, dtype=float)
    if sp is not None:
        if np.any(sp[:-1] != 0):
            raise ValueError("box_rule handles singular points on the centre axis only")
        if not region.contains(sp):
            sp = None
    desc = {"kind": "box", "region": region.to_json(), "base_order": base_order, "levels": levels,
            "cells": cells, "singular_point": None if sp is None else sp.tolist(),
            "singular_power": singular_power}
    if n >= 2:
        return _qmc_box(region, base_order, seed, desc)
    nodes, weights = _box_core(region, base_order, levels, sp, cells, singular_power)
    cn, cw = _box_core(region, base_order - 1, levels, sp, cells, singular_power)
    companion = QuadratureRule(cn, cw, region, sp, levels, 0.0, {**desc, "base_order": base_order - 1})
    err = max(abs(math.fsum(weights) - region.volume), abs(math.fsum(weights) - math.fsum(cw)))
    return QuadratureRule(nodes, weights, region, sp, levels, err, desc, companion)


def _radial_edges(R: float, breaks, grading: int):
    edges = {0.0, float(R)}
    edges.update(float(b) for b in breaks if 0 < b < R)
    e = sorted(edges)
    out = [0.0]
    for a, b in zip(e[:-1], e[1:]):
        if a > 0 and b / a > 2.0:
            m = int(math.ceil(math.log2(b / a)))
            out.extend((a * (b / a) ** (np.arange(1, m + 1) / m)).tolist())
        else:
            out.append(b)
    first = out[1]
    inner = [first * 2.0 ** -j for j in range(grading, 0, -1)]
    return np.array([0.0] + inner + out[1:])


def ball_rule(center, radius: float, dim: GroupDim = None, order: int = 8, radial_breaks=(),
              singular_power: float = 0.0, grading: Optional[int] = None, angular_order: Optional[int] = None,
              seed: int = 0, _companion: bool = True) -> QuadratureRule:
    """Rule for the gauge ball B_h(center, radius) in homogeneous polar coordinates.

    ``radial_breaks`` are gauge radii (relative to the centre) that become cell
    boundaries; intervals wider than a factor 2 are split geometrically. A
    positive ``singular_power`` makes the innermost shell exact for
    d_h(xi, center)^(-singular_power), preceded by ``grading`` dyadic shells.
    """
    c = np.asarray(center, dtype=float)
    n = (c.size - 1) // 2
    dim = dim or GroupDim.of(n)
    if not radius > 0:
        raise ValueError("ball radius must be positive")
    if singular_power >= dim.Q:
        raise NonIntegrableError(f"rho^-{singular_power} is not integrable at the centre when Q = {dim.Q}")
    if grading is None:
        grading = 6 if singular_power > 0 else 0
    angular_order = angular_order or order
    desc = {"kind": "ball", "center": c.tolist(), "radius": radius, "order": order,
            "radial_breaks": [float(b) for b in radial_breaks], "singular_power": singular_power,
            "grading": grading, "angular_order": angular_order}
    region = HBall(HPoint.from_coords(c), radius)
    edges = _radial_edges(radius, radial_breaks, grading)
    rho_l, wr_l = [], []
    for k, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        r, w = _radial_nodes(a, b, order, dim.Q, singular_power, from_zero=(k == 0))
        rho_l.append(r)
        wr_l.append(w)
    rho, wr = np.concatenate(rho_l), np.concatenate(wr_l)
    if n >= 2:
        rule = _qmc_ball(c, rho, wr, dim, angular_order, seed, region, desc)
    else:
        v, wv = np.polynomial.legendre.leggauss(angular_order)
        psi, dpsi = _psi_map(v)
        m = 2 * angular_order
        theta = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        R_, P_, T_ = np.meshgrid(rho, psi, theta, indexing="ij")
        W = wr[:, None, None] * (wv * dpsi)[None, :, None] * np.full(m, 2.0 * np.pi / m)[None, None, :]
        off = _offsets(R_.ravel(), P_.ravel(), T_.ravel())
        nodes = compose(np.broadcast_to(c, off.shape), off)
        rule = QuadratureRule(nodes, W.ravel(), region, c if singular_power > 0 else None, grading, 0.0, desc)
    if _companion:
        comp = ball_rule(c, radius, dim, max(order - 2, 2), radial_breaks, singular_power, grading,
                         max(angular_order - 2, 2), seed + 1, _companion=False)
        rule.companion = comp
        exact = dim.unit_ball_volume * radius ** dim.Q
        rule.estimated_error = max(abs(rule.total_weight - exact), abs(rule.total_weight - comp.total_weight))
    return rule


def _sobol(d: int, m: int, seed: int) -> np.ndarray:
    return qmc.Sobol(d, scramble=True, seed=seed).random_base2(m)


def _qmc_box(region: Box, base_order: int, seed: int, desc: dict) -> QuadratureRule:
    d = len(region.lo)
    m = 8 + 2 * base_order
    lo, hi = np.array(region.lo), np.array(region.hi)
    pts = lo + (hi - lo) * _sobol(d, m, seed)
    w = np.full(len(pts), region.volume / len(pts))
    comp_pts = lo + (hi - lo) * _sobol(d, m, seed + 1)
    comp = QuadratureRule(comp_pts, w.copy(), region, None, 0, 0.0, {**desc, "seed": seed + 1})
    return QuadratureRule(pts, w, region, None, 0, 0.0, {**desc, "qmc": True, "seed": seed}, comp)


def _qmc_ball(c, rho, wr, dim: GroupDim, angular_order: int, seed: int, region, desc) -> QuadratureRule:
    n = dim.n
    m = max(6, 2 * angular_order)
    u = _sobol(2 * n + 1, m, seed)
    psi = np.pi * (u[:, 0] - 0.5)
    from scipy.special import ndtri
    g = ndtri(np.clip(u[:, 1:], 1e-12, 1 - 1e-12))
    omega = g / np.linalg.norm(g, axis=1, keepdims=True)
    wdir = np.pi * dim.omega_2n_minus_1 * np.cos(psi) ** (n - 1) / len(u)
    R_ = np.repeat(rho, len(u))
    sc = np.sqrt(np.cos(np.tile(psi, len(rho)))) * R_
    off = np.concatenate([sc[:, None] * np.tile(omega, (len(rho), 1)),
                          (R_ * R_ * np.sin(np.tile(psi, len(rho))))[:, None]], axis=1)
    nodes = compose(np.broadcast_to(c, off.shape), off)
    W = (wr[:, None] * wdir[None, :]).ravel()
    return QuadratureRule(nodes, W, region, None, 0, 0.0, {**desc, "qmc": True, "seed": seed})


def _evaluate(f: Callable, nodes: np.ndarray, workers: int, chunk: int = 1 << 15) -> np.ndarray:
    if workers <= 1 or len(nodes) <= chunk:
        vals = np.asarray(f(nodes), dtype=float)
    else:
        parts = [nodes[i:i + chunk] for i in range(0, len(nodes), chunk)]
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = np.concatenate([np.asarray(v, dtype=float) for v in ex.map(f, parts)])
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise NonFiniteIntegrand(nodes[np.argmax(bad)])
    return vals


def weighted_sum(weights: np.ndarray, values: np.ndarray) -> float:
    """Correctly rounded sum of weights * values; independent of summation order."""
    return math.fsum((weights * values).tolist())


def integrate(f, rule: QuadratureRule, workers: int = 1):
    """Return (value, error_estimate) for f over the rule's region.

    The error estimate is the discrepancy against the rule's coarser companion
    (or the rule's own volume error when there is none).
    """
    value = weighted_sum(rule.weights, _evaluate(f, rule.nodes, workers))
    if rule.companion is not None:
        other = weighted_sum(rule.companion.weights, _evaluate(f, rule.companion.nodes, workers))
        err = abs(value - other)
    else:
        err = rule.estimated_error
    return value, err


def radial_kernel(dim: GroupDim, kernel: str) -> float:
    if kernel == "volume":
        return dim.Q * dim.unit_ball_volume
    if kernel == "gradient":
        return dim.sigma_Q
    raise ValueError(f"unknown radial kernel {kernel!r}")


def radial_reduce(f_profile: Callable, power: float = 0.0, R: float = 1.0, dim: GroupDim = None,
                  kernel: str = "volume", breaks=()) -> float:
    """C * int_0^R f(rho) rho^(Q-1-power) d rho by adaptive 1D quadrature.

    kernel="volume" gives int g(|xi|_h) |xi|_h^-power d xi  (C = Q |B_h(0,1)|);
    kernel="gradient" gives int g(|xi|_h) |grad_H |xi|_h|^Q |xi|_h^-power d xi  (C = sigma_Q).
    """
    dim = dim or GroupDim.of(1)
    C = radial_kernel(dim, kernel)
    expo = dim.Q - 1 - power
    pts = sorted({0.0, float(R), *[float(b) for b in breaks if 0 < b < R]})
    if expo <= -1:
        _check_divergence(f_profile, expo, pts[1])
    total = 0.0
    for k, (a, b) in enumerate(zip(pts[:-1], pts[1:])):
        if k == 0:
            val, _ = sp_integrate.quad(f_profile, a, b, weight="alg", wvar=(expo, 0.0), limit=200,
                                       epsabs=1e-14, epsrel=1e-12)
        else:
            val, _ = sp_integrate.quad(lambda r: f_profile(r) * r ** expo, a, b, limit=200,
                                       epsabs=1e-14, epsrel=1e-12)
        total += val
    return C * total


def _check_divergence(f: Callable, expo: float, a: float, depth: int = 40):
    """Dyadic shells toward 0; a non-decaying shell sequence means divergence."""
    shells = []
    for j in range(depth - 4, depth):
        lo, hi = a * 2.0 ** -(j + 1), a * 2.0 ** -j
        shells.append(sp_integrate.quad(lambda r: f(r) * r ** expo, lo, hi)[0])
    s = np.abs(shells)
    if s[-1] > 0 and s[-1] >= 0.99 * s[0]:
        raise NonIntegrableError("radial integral diverges at the origin under dyadic refinement")


def union_rule(rules) -> QuadratureRule:
    """Concatenate rules for regions with disjoint interiors."""
    rules = list(rules)
    if len(rules) == 1:
        return rules[0]
    sp = [r.singular_point for r in rules if r.singular_point is not None]
    comps = [r.companion for r in rules]
    companion = None
    if all(c is not None for c in comps):
        companion = QuadratureRule(np.concatenate([c.nodes for c in comps]),
                                   np.concatenate([c.weights for c in comps]),
                                   tuple(c.region for c in comps), sp[0] if sp else None,
                                   max(c.refinement_levels for c in comps), 0.0,
                                   {"kind": "union", "parts": [c.descriptor for c in comps]})
    return QuadratureRule(np.concatenate([r.nodes for r in rules]), np.concatenate([r.weights for r in rules]),
                          tuple(r.region for r in rules), sp[0] if sp else None,
                          max(r.refinement_levels for r in rules), math.fsum(r.estimated_error for r in rules),
                          {"kind": "union", "parts": [r.descriptor for r in rules]}, companion)
