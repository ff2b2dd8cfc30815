"""Concentrating log-profile family and the growing/bounded scan around the sharp exponent."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from heisenberg_tm.calculus import RadialField
from heisenberg_tm.functional import FunctionalReport, TMParams, normalize, tm_functional
from heisenberg_tm.hgroup import GroupDim
from heisenberg_tm.quadrature import ball_rule

DEFAULT_K_GRID = (4, 6, 8, 11, 16, 23, 32, 45, 64, 91, 128, 181, 256)
SCAN_COLUMNS = ("alpha", "beta", "tau", "k", "tm_value", "slope", "slope_se", "classification")


def moser_profile(k: float, dim: GroupDim):
    """(profile, derivative) of the k-th member as functions of rho."""
    if not k >= 2:
        raise ValueError(f"concentration index must be >= 2, got {k}")
    Q = dim.Q
    lk = math.log(k)
    a = dim.sigma_Q ** (-1.0 / Q)
    top = a * lk ** ((Q - 1.0) / Q)
    slope = a / lk ** (1.0 / Q)

    def f(rho):
        rho = np.asarray(rho, dtype=float)
        mid = (rho > 1.0 / k) & (rho <= 1.0)
        safe = np.where(mid, rho, 1.0)
        return np.where(rho <= 1.0 / k, top, np.where(mid, -slope * np.log(safe), 0.0))

    def df(rho):
        rho = np.asarray(rho, dtype=float)
        mid = (rho > 1.0 / k) & (rho < 1.0)
        safe = np.where(mid, rho, 1.0)
        return np.where(mid, -slope / safe, 0.0)

    return f, df


def moser_function(k: float, dim: Optional[GroupDim] = None) -> RadialField:
    """u_k(xi) = profile_k(|xi|_h); kinks at 1/k and 1 are registered for quadrature."""
    dim = dim or GroupDim.of(1)
    f, df = moser_profile(k, dim)
    return RadialField(np.zeros(dim.ncoords), f, df, radius=1.0, kinks=(1.0 / k, 1.0), name=f"moser(k={k:g})")


def moser_rule(k: float, dim: GroupDim, beta: float = 0.0, order: int = 10, angular_order: int = 16):
    return ball_rule(np.zeros(dim.ncoords), 1.0, dim, order=order, radial_breaks=(1.0 / k,),
                     singular_power=beta, angular_order=angular_order)


def blowup_curve(params: TMParams, k_list, dim: Optional[GroupDim] = None, order: int = 10,
                 workers: int = 1) -> list:
    """tm_functional along the tau-normalized family, one report per k."""
    dim = dim or GroupDim.of(1)
    out = []
    for k in k_list:
        u = moser_function(k, dim)
        rule = moser_rule(k, dim, params.beta, order)
        un = normalize(u, "tau-norm", params.tau, rule, workers)
        out.append(tm_functional(un, params, rule, workers, k=int(k) if float(k).is_integer() else k))
    return out


@dataclass
class GrowthFit:
    slope: float
    slope_se: float
    naive_slope: float
    classification: str

    def to_json(self) -> dict:
        return {"slope": self.slope, "slope_se": self.slope_se, "naive_slope": self.naive_slope,
                "classification": self.classification}


def classify_growth(k_values, tm_values, sigmas: float = 3.0) -> GrowthFit:
    """Least-squares fit of log tm = c0 + s log k + c1/log k + c2/log^2 k.

    GROWING iff the power-law slope s exceeds ``sigmas`` standard errors. The
    inverse-log terms absorb the slow 1/log k drift that subcritical curves
    show on a finite grid; with fewer than six points only c0 + s log k is fit.
    """
    k = np.asarray(k_values, dtype=float)
    y = np.log(np.asarray(tm_values, dtype=float))
    if len(k) < 4:
        raise ValueError("growth classification needs at least 4 points")
    L = np.log(k)
    cols = [np.ones_like(L), L] + ([1.0 / L, 1.0 / L ** 2] if len(k) >= 6 else [])
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = len(k) - A.shape[1]
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.pinv(A.T @ A)
    se = math.sqrt(max(cov[1, 1], 0.0))
    naive = float(np.polyfit(L, y, 1)[0])
    slope = float(coef[1])
    return GrowthFit(slope, se, naive, "GROWING" if slope > sigmas * se else "BOUNDED")


@dataclass
class ScanReport:
    beta: float
    tau: float
    threshold: float
    k_grid: tuple
    alphas: list
    curves: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    bracket: Optional[tuple] = None
    flag: Optional[str] = None

    @property
    def bracket_contains_threshold(self) -> bool:
        return self.bracket is not None and self.bracket[0] < self.threshold < self.bracket[1]

    def values(self, alpha) -> np.ndarray:
        return np.array([r.tm_value for r in self.curves[alpha]])

    def to_json(self) -> dict:
        return {"beta": self.beta, "tau": self.tau, "threshold": self.threshold, "k_grid": list(self.k_grid),
                "bracket": None if self.bracket is None else list(self.bracket), "flag": self.flag,
                "bracket_contains_threshold": self.bracket_contains_threshold,
                "alphas": [{"alpha": a, **self.fits[a].to_json(),
                            "tm_values": self.values(a).tolist()} for a in self.alphas]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SCAN_COLUMNS)
        for a in self.alphas:
            fit = self.fits[a]
            for rep in self.curves[a]:
                w.writerow([repr(a), repr(self.beta), repr(self.tau), rep.k, repr(rep.tm_value),
                            repr(fit.slope), repr(fit.slope_se), fit.classification])
        return buf.getvalue()


def threshold_scan(beta: float, tau: float, alpha_grid, k_max: int = 256, dim: Optional[GroupDim] = None,
                   k_grid=None, order: int = 10, workers: int = 1) -> ScanReport:
    """Classify each alpha as GROWING or BOUNDED and bracket the transition."""
    dim = dim or GroupDim.of(1)
    ks = tuple(k for k in (k_grid or DEFAULT_K_GRID) if k <= k_max)
    alphas = sorted(float(a) for a in alpha_grid)
    rep = ScanReport(beta, tau, dim.threshold(beta), ks, alphas)
    for a in alphas:
        curve = blowup_curve(TMParams(a, beta, tau), ks, dim, order, workers)
        rep.curves[a] = curve
        rep.fits[a] = classify_growth(ks, [c.tm_value for c in curve])
    if len(alphas) < 2:
        rep.flag = "single alpha: no bracket"
        return rep
    grow = [a for a in alphas if rep.fits[a].classification == "GROWING"]
    bounded = [a for a in alphas if rep.fits[a].classification == "BOUNDED"]
    if not grow or not bounded:
        rep.flag = "grid does not straddle the transition"
        return rep
    lo, hi = max(bounded), min(grow)
    if lo > hi:
        rep.flag = "classification is not monotone in alpha"
        lo = max(b for b in bounded if b < hi) if any(b < hi for b in bounded) else None
        if lo is None:
            return rep
    rep.bracket = (lo, hi)
    return rep
