"""Greedy separated nets on boxes of H^n with cover and multiplicity checks.

Centres are binned by their first horizontal pair (x_1, y_1) on a square grid
of side rho: hdist(a, b) < s forces |x_1 - x_1'| < s and |y_1 - y_1'| < s, so
a query at radius s only visits ceil(s / rho) rings of cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from heisenberg_tm.hgroup import Box, HPoint, hdist


@njit(cache=True)
def _dist4(a, b, n):
    """hdist(a, b)^4 for flat coordinate vectors."""
    e = 0.0
    cross = 0.0
    for i in range(n):
        dx = a[i] - b[i]
        dy = a[n + i] - b[n + i]
        e += dx * dx + dy * dy
        cross += b[i] * a[n + i] - b[n + i] * a[i]
    dt = a[2 * n] - b[2 * n] + 2.0 * cross
    return e * e + dt * dt


@njit(cache=True)
def _cell(p, n, x0, y0, side, nx, ny):
    cx = int(math.floor((p[0] - x0) / side))
    cy = int(math.floor((p[n] - y0) / side))
    return min(max(cx, 0), nx - 1), min(max(cy, 0), ny - 1)


@njit(cache=True)
def _greedy_kernel(cand, n, rho, x0, y0, nx, ny):
    d = cand.shape[1]
    head = -np.ones(nx * ny, dtype=np.int64)
    nxt = -np.ones(cand.shape[0], dtype=np.int64)
    centers = np.empty((cand.shape[0], d))
    m = 0
    r4 = rho ** 4
    last = -1
    for k in range(cand.shape[0]):
        p = cand[k]
        if last >= 0 and _dist4(p, centers[last], n) < r4:
            continue
        cx, cy = _cell(p, n, x0, y0, rho, nx, ny)
        ok = True
        for ix in range(max(cx - 1, 0), min(cx + 2, nx)):
            if not ok:
                break
            for iy in range(max(cy - 1, 0), min(cy + 2, ny)):
                j = head[ix * ny + iy]
                while j >= 0:
                    if _dist4(p, centers[j], n) < r4:
                        ok = False
                        last = j
                        break
                    j = nxt[j]
                if not ok:
                    break
        if ok:
            centers[m] = p
            c = cx * ny + cy
            nxt[m] = head[c]
            head[c] = m
            m += 1
    return centers[:m].copy()


@njit(cache=True)
def _build_bins(centers, n, side, x0, y0, nx, ny):
    head = -np.ones(nx * ny, dtype=np.int64)
    nxt = -np.ones(centers.shape[0], dtype=np.int64)
    for j in range(centers.shape[0] - 1, -1, -1):
        cx, cy = _cell(centers[j], n, x0, y0, side, nx, ny)
        c = cx * ny + cy
        nxt[j] = head[c]
        head[c] = j
    return head, nxt


@njit(cache=True)
def _count_within(p, centers, head, nxt, n, side, x0, y0, nx, ny, radius, stop_at_one):
    cx = int(math.floor((p[0] - x0) / side))
    cy = int(math.floor((p[n] - y0) / side))
    ring = int(math.ceil(radius / side))
    r4 = radius ** 4
    cnt = 0
    for ix in range(max(cx - ring, 0), min(cx + ring + 1, nx)):
        for iy in range(max(cy - ring, 0), min(cy + ring + 1, ny)):
            j = head[ix * ny + iy]
            while j >= 0:
                if _dist4(p, centers[j], n) < r4:
                    cnt += 1
                    if stop_at_one:
                        return cnt
                j = nxt[j]
    return cnt


@njit(cache=True)
def _count_samples(samples, centers, head, nxt, n, side, x0, y0, nx, ny, radius, stop_at_one):
    out = np.empty(samples.shape[0], dtype=np.int64)
    for k in range(samples.shape[0]):
        out[k] = _count_within(samples[k], centers, head, nxt, n, side, x0, y0, nx, ny, radius, stop_at_one)
    return out


@njit(cache=True, inline="always")
def _d4_1(px, py, pt, cx, cy, ct):
    dx = px - cx
    dy = py - cy
    e = dx * dx + dy * dy
    dt = pt - ct + 2.0 * (cx * py - cy * px)
    return e * e + dt * dt


@njit(cache=True)
def _scan1(lo, step, counts, CX, CY, CT, m, head, nxt, x0, y0, nx, ny, side, radius, add):
    """Visit the n = 1 lattice lo + i*step with t varying fastest.

    Consecutive points along t are (step_t)^(1/2) apart in the gauge, so the
    last-hit cache almost always answers; x-fastest order misses often away
    from the origin because of the twist term.

    A point with no centre closer than ``radius`` is counted; with ``add`` it
    is appended as a new centre (greedy fill). Returns (m, uncovered, first, full).
    """
    r4 = radius ** 4
    ring = int(math.ceil(radius / side))
    last = -1
    bad = 0
    fx = fy = ft = np.nan
    for i in range(counts[0]):
        px = lo[0] + i * step[0]
        for j in range(counts[1]):
            py = lo[1] + j * step[1]
            for k in range(counts[2]):
                pt = lo[2] + k * step[2]
                if last >= 0 and _d4_1(px, py, pt, CX[last], CY[last], CT[last]) < r4:
                    continue
                cx = min(max(int(math.floor((px - x0) / side)), 0), nx - 1)
                cy = min(max(int(math.floor((py - y0) / side)), 0), ny - 1)
                found = -1
                for ix in range(max(cx - ring, 0), min(cx + ring + 1, nx)):
                    for iy in range(max(cy - ring, 0), min(cy + ring + 1, ny)):
                        q = head[ix * ny + iy]
                        while q >= 0:
                            if _d4_1(px, py, pt, CX[q], CY[q], CT[q]) < r4:
                                found = q
                                break
                            q = nxt[q]
                        if found >= 0:
                            break
                    if found >= 0:
                        break
                if found >= 0:
                    last = found
                    continue
                if bad == 0:
                    fx, fy, ft = px, py, pt
                bad += 1
                if add:
                    if m == CX.shape[0]:
                        return m, bad, np.array([fx, fy, ft]), False
                    CX[m], CY[m], CT[m] = px, py, pt
                    c = cx * ny + cy
                    nxt[m] = head[c]
                    head[c] = m
                    last = m
                    m += 1
    return m, bad, np.array([fx, fy, ft]), True


def _columns(centers: np.ndarray, cap: int):
    CX, CY, CT = (np.empty(cap) for _ in range(3))
    m = len(centers)
    CX[:m], CY[:m], CT[:m] = centers[:, 0], centers[:, 1], centers[:, 2]
    return CX, CY, CT


def _bins_for(CX, CY, m, side, x0, y0, nx, ny):
    nxt = -np.ones(CX.shape[0], dtype=np.int64)
    cols = np.stack([CX[:m], CY[:m], np.zeros(m)], axis=1)
    head, nxt_m = _build_bins(cols, 1, side, x0, y0, nx, ny)
    nxt[:m] = nxt_m
    return head, nxt


def _axis(lo: float, hi: float, pitch: float) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    m = int(math.ceil((hi - lo) / pitch - 1e-12))
    return np.linspace(lo, hi, m + 1)


def lattice_pitches(rho: float, n: int):
    """Construction pitches: rho/4 horizontally, (rho/4)^2 along t."""
    return [rho / 4.0] * (2 * n) + [(rho / 4.0) ** 2]


def candidate_lattice(region: Box, rho: float) -> np.ndarray:
    """Lattice points of the box ordered lexicographically in (t, y, x)."""
    n = region.n
    axes = [_axis(l, h, p) for l, h, p in zip(region.lo, region.hi, lattice_pitches(rho, n))]
    # meshgrid with t slowest, then y block, then x block
    order = [2 * n] + list(range(2 * n - 1, -1, -1))
    grids = np.meshgrid(*[axes[k] for k in order], indexing="ij")
    out = np.empty((grids[0].size, 2 * n + 1))
    for g, k in zip(grids, order):
        out[:, k] = g.ravel()
    return out


@dataclass
class Net:
    centers: np.ndarray
    rho: float
    r: float
    region: Box
    _bins: dict = field(default_factory=dict, repr=False, compare=False)
    # centres contributed by the lattice scan, each repair pass and the extras
    stage_counts: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.region.n

    def __len__(self):
        return len(self.centers)

    def center_points(self):
        return [HPoint.from_coords(c) for c in self.centers]

    def _binned(self):
        if "b" not in self._bins:
            c = self.centers
            side = self.rho
            x0 = float(min(c[:, 0].min(), self.region.lo[0])) - side
            y0 = float(min(c[:, self.n].min(), self.region.lo[self.n])) - side
            nx = int(math.ceil((max(c[:, 0].max(), self.region.hi[0]) + side - x0) / side)) + 1
            ny = int(math.ceil((max(c[:, self.n].max(), self.region.hi[self.n]) + side - y0) / side)) + 1
            head, nxt = _build_bins(c, self.n, side, x0, y0, nx, ny)
            self._bins["b"] = (head, nxt, side, x0, y0, nx, ny)
        return self._bins["b"]

    def counts(self, samples, radius: float, stop_at_one: bool = False) -> np.ndarray:
        s = np.ascontiguousarray(np.atleast_2d(np.asarray(samples, dtype=float)))
        head, nxt, side, x0, y0, nx, ny = self._binned()
        return _count_samples(s, self.centers, head, nxt, self.n, side, x0, y0, nx, ny, float(radius), stop_at_one)

    def to_json(self) -> dict:
        return {"rho": self.rho, "r": self.r, "region": self.region.to_json(),
                "num_centers": len(self), "stage_counts": list(self.stage_counts),
                "centers": self.centers.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "Net":
        return cls(np.array(d["centers"], dtype=float), d["rho"], d["r"],
                   Box(d["region"]["lo"], d["region"]["hi"]))


DEFAULT_REPAIR = ((8, 0.5), (4, 0.0))


def _lattice_spec(region: Box, rho: float, refine: int, offset: float):
    step = np.array(lattice_pitches(rho, 1)) / float(refine)
    counts = np.array([int(math.floor((h - l) / s - offset + 1e-9)) + 1 if h > l else 1
                       for l, h, s in zip(region.lo, region.hi, step)], dtype=np.int64)
    return np.array(region.lo) + offset * step, step, counts


def _repair_pass(centers, region: Box, rho: float, refine: int, offset: float, x0, y0, nx, ny):
    lo, step, counts = _lattice_spec(region, rho, refine, offset)
    cap = len(centers) + 1024
    while True:
        CX, CY, CT = _columns(centers, cap)
        head, nxt = _bins_for(CX, CY, len(centers), rho, x0, y0, nx, ny)
        m, _, _, done = _scan1(lo, step, counts, CX, CY, CT, len(centers), head, nxt, x0, y0, nx, ny,
                               float(rho), float(rho), True)
        if done:
            return np.stack([CX[:m], CY[:m], CT[:m]], axis=1)
        cap *= 2


def greedy_net(region: Box, rho: float, r=None, extra_candidates=None, repair=DEFAULT_REPAIR) -> Net:
    """Maximal rho-separated subset of the candidate lattice, scanned in (t, y, x) order.

    A lattice-maximal set covers only up to lattice resolution, so for n = 1
    further greedy passes run over the refined lattices listed in ``repair``
    as (refinement factor, offset in units of the refined step). Each pass
    accepts only points still at distance >= rho from every centre, so
    separation is preserved. The default ends with the lattice four times
    finer than the construction lattice, which makes the net maximal there.
    ``extra_candidates`` are offered last, in the order given.
    """
    if not rho > 0:
        raise ValueError(f"separation must be positive, got {rho}")
    n = region.n
    cand = candidate_lattice(region, rho)
    x0, y0 = region.lo[0] - rho, region.lo[n] - rho
    xs = [region.hi[0] + rho]
    ys = [region.hi[n] + rho]
    extra = None
    if extra_candidates is not None and len(extra_candidates):
        extra = np.atleast_2d(np.asarray(extra_candidates, dtype=float))
        x0, y0 = min(x0, extra[:, 0].min()), min(y0, extra[:, n].min())
        xs.append(extra[:, 0].max())
        ys.append(extra[:, n].max())
    nx = int(math.ceil((max(xs) - x0) / rho)) + 1
    ny = int(math.ceil((max(ys) - y0) / rho)) + 1
    centers = _greedy_kernel(np.ascontiguousarray(cand), n, float(rho), x0, y0, nx, ny)
    added = [len(centers)]
    if n == 1:
        for refine, offset in (repair or ()):
            centers = _repair_pass(centers, region, rho, refine, offset, x0, y0, nx, ny)
            added.append(len(centers) - sum(added))
    if extra is not None:
        both = np.concatenate([centers, extra])
        centers = _greedy_kernel(np.ascontiguousarray(both), n, float(rho), x0, y0, nx, ny)
        added.append(len(centers) - sum(added))
    net = Net(centers, float(rho), float(rho if r is None else r), region)
    net.stage_counts = added
    return net


@dataclass
class SeparationReport:
    passed: bool
    min_distance: float
    closest_pair: tuple
    disjoint_sixth_balls: bool

    def to_json(self) -> dict:
        return {"passed": self.passed, "min_distance": self.min_distance,
                "closest_pair": list(self.closest_pair), "disjoint_sixth_balls": self.disjoint_sixth_balls}


@dataclass
class CoverReport:
    passed: bool
    num_samples: int
    uncovered: int
    first_uncovered: list

    def to_json(self) -> dict:
        return {"passed": self.passed, "num_samples": self.num_samples, "uncovered": self.uncovered,
                "first_uncovered": self.first_uncovered}


def verify_separation(net: Net) -> SeparationReport:
    """Exact pairwise check that all centres are at least rho apart.

    A point common to B_h(a, rho/6) and B_h(b, rho/6) would give
    d(a, b) <= 3 (rho/6 + rho/6) < rho, so separation implies the rho/6 balls
    are disjoint; :func:`sixth_ball_overlap_samples` spot-checks this.
    """
    c = net.centers
    if len(c) < 2:
        return SeparationReport(True, math.inf, (-1, -1), True)
    head, nxt, side, x0, y0, nx, ny = net._binned()
    best, pair = math.inf, (-1, -1)
    for i in range(len(c)):
        near = _neighbours(c[i], c, head, nxt, net.n, side, x0, y0, nx, ny, 2.0 * net.rho)
        near = near[near != i]
        if near.size:
            d = np.asarray(hdist(c[near], c[i]))
            j = int(np.argmin(d))
            if d[j] < best:
                best, pair = float(d[j]), (min(i, int(near[j])), max(i, int(near[j])))
    # if nothing within 2 rho, the minimum is at least 2 rho
    best = best if math.isfinite(best) else 2.0 * net.rho
    ok = best >= net.rho
    return SeparationReport(bool(ok), best, pair, bool(ok))


@njit(cache=True)
def _neighbours(p, centers, head, nxt, n, side, x0, y0, nx, ny, radius):
    cx = int(math.floor((p[0] - x0) / side))
    cy = int(math.floor((p[n] - y0) / side))
    ring = int(math.ceil(radius / side))
    out = []
    for ix in range(max(cx - ring, 0), min(cx + ring + 1, nx)):
        for iy in range(max(cy - ring, 0), min(cy + ring + 1, ny)):
            j = head[ix * ny + iy]
            while j >= 0:
                out.append(j)
                j = nxt[j]
    return np.array(out, dtype=np.int64)


def sixth_ball_overlap_samples(net: Net, samples) -> int:
    """Number of samples lying in two or more balls B_h(xi_i, rho/6)."""
    return int(np.sum(net.counts(samples, net.rho / 6.0) >= 2))


def verify_cover(net: Net, samples, radius=None) -> CoverReport:
    """Every sample must lie in some open ball B_h(xi_i, radius) (default rho)."""
    s = np.atleast_2d(np.asarray(samples, dtype=float))
    hit = net.counts(s, net.rho if radius is None else radius, stop_at_one=True)
    bad = np.flatnonzero(hit == 0)
    first = s[bad[0]].tolist() if bad.size else []
    return CoverReport(bool(bad.size == 0), len(s), int(bad.size), first)


def verify_cover_lattice(net: Net, refine: int = 4) -> CoverReport:
    """Cover check on a lattice ``refine`` times finer than the construction lattice,
    over the region shrunk by one construction pitch (n = 1)."""
    if net.n != 1:
        raise ValueError("lattice cover scan is implemented for n = 1; use verify_cover with samples")
    p = lattice_pitches(net.rho, 1)
    inner = net.region.shrink(p[0], p[-1])
    lo, step, counts = _lattice_spec(inner, net.rho, refine, 0.0)
    head, nxt, side, x0, y0, nx, ny = net._binned()
    c = net.centers
    CX, CY, CT = (np.ascontiguousarray(c[:, k]) for k in range(3))
    _, bad, first, _ = _scan1(lo, step, counts, CX, CY, CT, len(c), head, nxt, x0, y0, nx, ny,
                              side, float(net.rho), False)
    total = int(np.prod(counts))
    return CoverReport(bool(bad == 0), total, int(bad), [] if bad == 0 else first.tolist())


def multiplicity_bound(r: float, rho: float, Q: int) -> float:
    return (24.0 * r / rho) ** Q


def multiplicity(net: Net, r: float, xi) -> int:
    """Number of balls B_h(xi_i, r) containing xi."""
    if r < net.rho:
        raise ValueError(f"multiplicity radius {r} is below the net separation {net.rho}")
    return int(net.counts(np.asarray(xi, dtype=float), r)[0])


def max_multiplicity(net: Net, r: float, samples) -> int:
    if r < net.rho:
        raise ValueError(f"multiplicity radius {r} is below the net separation {net.rho}")
    c = net.counts(samples, r)
    return int(c.max()) if c.size else 0


def uniform_samples(region: Box, m: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(region.lo, region.hi, size=(m, len(region.lo)))
