"""Experiment harness: one subcommand per pipeline, JSON config, CSV + JSON outputs.

Exit codes: 0 all invariants hold, 2 invariant failure, 3 config error,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

# default scan grid at beta = 0; for beta > 0 it is multiplied by (1 - beta/Q)
BASE_ALPHA_GRID = (6.0, 7.5, 8.0, 8.58, 9.0, 10.7)

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "n": 1,
    "seed": 0,
    "workers": 1,
    "output_dir": "out",
    "quadrature": {"base_order": 10, "angular_order": 16, "levels": 8},
    "params": {"alpha": 1.0, "beta": 0.0, "tau": 1.0},
    "geometry": {"samples": 1000000, "commutator_points": 10000, "inject_duplicate": False},
    "covering": {"box_half": 5.0, "rhos": [0.5, 1.0, 2.0], "multiplicity_samples": 100000,
                 "random_samples": 1000000},
    "cutoff": {"radii": [1.0, 5.0, 10.0], "samples": 100000},
    "functional": {"field": "bump", "k": 16, "normalize": "tau-norm"},
    "moser": {"alpha_grid": None, "k_max": 256, "k_grid": None},
    "glue": {"preset": "two-bump", "k": 16, "r": None, "alpha_fraction": 0.5},
}


class ConfigError(ValueError):
    pass


class NumericError(RuntimeError):
    pass


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        where = f"{path}{k}"
        if k not in base:
            raise ConfigError(f"{where}: unknown field")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{where}: expected an object")
            out[k] = _merge(base[k], v, where + ".")
        else:
            out[k] = v
    return out


def _num(cfg, path: str, lo=None, hi=None, integer=False, lo_open=False):
    cur = cfg
    for p in path.split("."):
        cur = cur[p]
    ok = isinstance(cur, (int, float)) and not isinstance(cur, bool) and math.isfinite(cur)
    if ok and integer:
        ok = float(cur).is_integer()
    if ok and lo is not None:
        ok = cur > lo if lo_open else cur >= lo
    if ok and hi is not None:
        ok = cur < hi
    if not ok:
        rng = f" in {'(' if lo_open else '['}{lo}, {hi if hi is not None else 'inf'})" if lo is not None else ""
        raise ConfigError(f"{path}: expected {'an integer' if integer else 'a number'}{rng}, got {cur!r}")
    return cur


def validate(cfg: dict, command: str) -> dict:
    n = _num(cfg, "n", 1, integer=True)
    Q = 2 * n + 2
    _num(cfg, "seed", 0, integer=True)
    _num(cfg, "workers", 1, integer=True)
    _num(cfg, "quadrature.base_order", 2, integer=True)
    _num(cfg, "quadrature.angular_order", 2, integer=True)
    _num(cfg, "quadrature.levels", 0, integer=True)
    _num(cfg, "params.alpha", 0, lo_open=True)
    _num(cfg, "params.beta", 0)
    _num(cfg, "params.tau", 0, lo_open=True)
    if command in ("functional", "moser-scan", "glue") and cfg["params"]["beta"] >= Q:
        # reported as non-integrable by the pipeline, not as a schema error
        pass
    if command == "covering":
        _num(cfg, "covering.box_half", 0, lo_open=True)
        rhos = cfg["covering"]["rhos"]
        if not isinstance(rhos, list) or not rhos or not all(isinstance(r, (int, float)) and r > 0 for r in rhos):
            raise ConfigError("covering.rhos: expected a nonempty list of positive numbers")
    if command == "cutoff-check":
        radii = cfg["cutoff"]["radii"]
        if not isinstance(radii, list) or not radii or not all(isinstance(r, (int, float)) and r > 0 for r in radii):
            raise ConfigError("cutoff.radii: expected a nonempty list of positive numbers")
        _num(cfg, "cutoff.samples", 1, integer=True)
    if command == "functional":
        if cfg["functional"]["field"] not in ("bump", "moser", "two-bump"):
            raise ConfigError("functional.field: expected one of bump, moser, two-bump")
        if cfg["functional"]["normalize"] not in ("tau-norm", "gradient-only", "none"):
            raise ConfigError("functional.normalize: expected tau-norm, gradient-only or none")
        _num(cfg, "functional.k", 2)
    if command == "moser-scan":
        grid = cfg["moser"]["alpha_grid"]
        if grid is None:
            grid = cfg["moser"]["alpha_grid"] = [a * (1 - cfg["params"]["beta"] / Q) for a in BASE_ALPHA_GRID]
        if not isinstance(grid, list) or not grid or not all(isinstance(a, (int, float)) and a > 0 for a in grid):
            raise ConfigError("moser.alpha_grid: expected a nonempty list of positive numbers")
        _num(cfg, "moser.k_max", 4, integer=True)
    if command == "glue":
        if cfg["glue"]["preset"] not in ("two-bump", "moser", "bump"):
            raise ConfigError("glue.preset: expected one of two-bump, moser, bump")
        if cfg["glue"]["r"] is not None:
            _num(cfg, "glue.r", 0, lo_open=True)
        _num(cfg, "glue.alpha_fraction", 0, 1, lo_open=True)
    if command in ("functional", "moser-scan", "glue", "cutoff-check", "covering") and n != 1:
        raise ConfigError("n: quadrature-based subcommands run at n = 1 only")
    return cfg


def load_config(args) -> dict:
    over = {}
    if args.config:
        try:
            over = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"config: cannot read {args.config}: {e}")
        if not isinstance(over, dict):
            raise ConfigError("config: top level must be an object")
    cfg = _merge(DEFAULTS, over)
    if args.out is not None:
        cfg["output_dir"] = args.out
    if args.workers is not None:
        cfg["workers"] = args.workers
    if args.seed is not None:
        cfg["seed"] = args.seed
    for name in ("alpha", "beta", "tau"):
        v = getattr(args, name)
        if v is not None:
            cfg["params"][name] = v
    if args.r is not None:
        cfg["glue"]["r"] = args.r
    if args.kmax is not None:
        cfg["moser"]["k_max"] = args.kmax
    return validate(cfg, args.command)


# ---------------------------------------------------------------------------
# output helpers

class Outputs:
    def __init__(self, cfg: dict, command: str):
        self.dir = Path(cfg["output_dir"])
        self.dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.command = command
        self.verdicts = []

    def verdict(self, name: str, passed: bool, detail: str = ""):
        self.verdicts.append({"name": name, "passed": bool(passed), "detail": detail})
        print(f"{'PASS' if passed else 'FAIL'} {name}" + (f" ({detail})" if detail else ""))

    def notice(self, text: str):
        print(f"NOTE {text}")

    def json(self, name: str, payload: dict):
        doc = {"command": self.command, "config": self.cfg, **payload}
        (self.dir / name).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")

    def csv(self, name: str, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
        (self.dir / name).write_text(buf.getvalue())

    def text(self, name: str, s: str):
        (self.dir / name).write_text(s)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not serializable: {type(o)}")


# ---------------------------------------------------------------------------
# subcommands

def cmd_geometry(cfg, out: Outputs):
    from heisenberg_tm.calculus import Polynomial, PolynomialField, commutator_residual, dist_gradient
    from heisenberg_tm.hgroup import GroupDim, UndefinedInput, hnorm, product_norm_ratio, quasi_triangle_defect
    from heisenberg_tm.quadrature import ball_rule

    n = cfg["n"]
    d = 2 * n + 1
    rng = np.random.default_rng(cfg["seed"])
    m = cfg["geometry"]["samples"]
    a, b, c = (rng.uniform(-3, 3, size=(m, d)) for _ in range(3))
    if cfg["geometry"]["inject_duplicate"]:
        a[0] = b[0] = c[0]
    summary = {}
    try:
        defect = quasi_triangle_defect(a, b, c)
        summary["max_quasi_triangle_defect"] = float(np.max(defect))
        out.verdict("quasi-triangle defect <= 3", np.max(defect) <= 3.0, f"max {np.max(defect):.6f}")
    except UndefinedInput as e:
        summary["max_quasi_triangle_defect"] = None
        out.verdict("quasi-triangle defect <= 3", False, str(e))
    try:
        pr = product_norm_ratio(a, b)
        summary["max_product_norm_ratio"] = float(np.max(pr))
        out.verdict("product-norm ratio <= 3", np.max(pr) <= 3.0, f"max {np.max(pr):.6f}")
    except UndefinedInput as e:
        summary["max_product_norm_ratio"] = None
        out.verdict("product-norm ratio <= 3", False, str(e))

    # distance gradient identities
    x0 = rng.uniform(-3, 3, size=(m, d))
    xi = rng.uniform(-3, 3, size=(m, d))
    same = np.all(x0 == xi, axis=1)
    xi[same] += 1.0
    g = dist_gradient(x0, xi)
    rel = np.abs(g.E ** 2 + g.F ** 2 - g.rho ** 4) / g.rho ** 4
    gn = g.grad.norm
    summary["max_EF_identity_rel_error"] = float(rel.max())
    summary["max_grad_rho"] = float(gn.max())
    out.verdict("E^2 + F^2 = rho^4", rel.max() <= 1e-10, f"max rel {rel.max():.2e}")
    out.verdict("|grad rho| <= 1", gn.max() <= 1 + 1e-12, f"max {gn.max():.15f}")
    # equality and centre-axis cases
    base = rng.uniform(-3, 3, size=(1000, d))
    off = np.zeros((1000, d))
    off[:, :2 * n] = rng.uniform(-2, 2, size=(1000, 2 * n))
    from heisenberg_tm.hgroup import compose
    eq = dist_gradient(base, compose(base, off))
    axis_off = np.zeros((1000, d))
    axis_off[:, -1] = rng.uniform(0.5, 2, size=1000) * rng.choice([-1, 1], size=1000)
    ax = dist_gradient(base, compose(base, axis_off))
    e1 = np.max(np.abs(eq.grad.norm - 1.0))
    e0 = np.max(ax.grad.norm)
    out.verdict("equality case F = 0 gives |grad rho| = 1", e1 <= 1e-12, f"max dev {e1:.2e}")
    out.verdict("centre-axis case gives |grad rho| = 0", e0 <= 1e-12, f"max {e0:.2e}")

    # commutator on a polynomial corpus
    pts = rng.uniform(-2, 2, size=(cfg["geometry"]["commutator_points"], d))
    fd_pts = pts[:200]
    h = 1e-3 * (1.0 + np.asarray(hnorm(fd_pts)))
    worst = worst_fd = 0.0
    for poly in polynomial_corpus(n, rng):
        f = PolynomialField(poly)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                worst = max(worst, float(np.max(np.abs(commutator_residual(i, j, f, pts)))))
                res = commutator_residual(i, j, f, fd_pts, h=h)
                worst_fd = max(worst_fd, float(np.max(np.abs(res))))
    summary["max_commutator_residual"] = worst
    summary["max_commutator_residual_fd"] = worst_fd
    out.verdict("[X_i, Y_j] + 4 delta_ij T = 0 (exact)", worst <= 1e-6, f"max {worst:.2e}")
    out.verdict("[X_i, Y_j] + 4 delta_ij T = 0 (finite differences)", worst_fd <= 1e-6, f"max {worst_fd:.2e}")

    if n == 1:
        dim = GroupDim.of(1)
        rule = ball_rule(np.zeros(3), 1.0, dim)
        vol = rule.total_weight
        out.verdict("|B_h(0,1)| = pi^2/2", abs(vol / (math.pi ** 2 / 2) - 1) <= 1e-4, f"{vol:.10f}")
        summary["unit_ball_volume"] = vol
    else:
        out.notice(f"n = {n}: quadrature-dependent checks skipped")
    out.json("geometry.json", {"summary": summary, "verdicts": out.verdicts})


def polynomial_corpus(n: int, rng):
    """Monomials up to degree 3 plus a few random combinations."""
    from itertools import product as iproduct
    from heisenberg_tm.calculus import Polynomial
    d = 2 * n + 1
    polys = []
    for exps in iproduct(range(4), repeat=d):
        if sum(exps) <= 3:
            polys.append(Polynomial.monomial(n, exps))
    for _ in range(3):
        p = Polynomial(n)
        for q in polys:
            p = p + q.scale(float(rng.normal()))
        polys.append(p)
    return polys


def cmd_covering(cfg, out: Outputs):
    from heisenberg_tm.covering import (greedy_net, max_multiplicity, multiplicity_bound,
                                        sixth_ball_overlap_samples, uniform_samples, verify_cover,
                                        verify_cover_lattice, verify_separation)
    from heisenberg_tm.hgroup import Box
    c = cfg["covering"]
    box = Box.cube(float(c["box_half"]), cfg["n"])
    rows, nets = [], {}
    for rho in c["rhos"]:
        rho = float(rho)
        net = greedy_net(box, rho)
        sep = verify_separation(net)
        cov = verify_cover_lattice(net)
        rnd = verify_cover(net, uniform_samples(box.shrink(rho / 4, (rho / 4) ** 2), c["random_samples"],
                                                cfg["seed"]))
        samples = np.concatenate([uniform_samples(box, c["multiplicity_samples"], cfg["seed"] + 1), net.centers])
        overlap = sixth_ball_overlap_samples(net, samples)
        mult = {}
        for f in (1, 2, 4):
            mult[f] = max_multiplicity(net, f * rho, samples)
        out.verdict(f"rho={rho:g} separation", sep.passed, f"min distance {sep.min_distance:.6g}")
        out.verdict(f"rho={rho:g} rho/6 balls disjoint", sep.disjoint_sixth_balls and overlap == 0,
                    f"{overlap} overlapping samples")
        out.verdict(f"rho={rho:g} fine-lattice cover", cov.passed, f"{cov.uncovered} of {cov.num_samples} uncovered")
        out.verdict(f"rho={rho:g} random-sample cover", rnd.passed, f"{rnd.uncovered} of {rnd.num_samples} uncovered")
        for f in (1, 2, 4):
            bound = multiplicity_bound(f * rho, rho, 2 * cfg["n"] + 2)
            out.verdict(f"rho={rho:g} multiplicity at r={f}rho", mult[f] <= bound, f"{mult[f]} <= {bound:.0f}")
        rows.append([rho, len(net), sep.min_distance, cov.num_samples, cov.uncovered, rnd.uncovered,
                     mult[1], mult[2], mult[4]])
        nets[f"{rho:g}"] = {**net.to_json(), "separation": sep.to_json(), "lattice_cover": cov.to_json(),
                           "random_cover": rnd.to_json(), "max_multiplicity": {str(k): v for k, v in mult.items()}}
    out.csv("covering.csv", ["rho", "num_centers", "min_separation", "lattice_samples", "lattice_uncovered",
                             "random_uncovered", "max_mult_r_eq_rho", "max_mult_r_eq_2rho", "max_mult_r_eq_4rho"],
            rows)
    out.json("covering.json", {"nets": nets, "verdicts": out.verdicts})


def cmd_cutoff(cfg, out: Outputs):
    from heisenberg_tm.calculus import fd_hgrad, hgrad_norm
    from heisenberg_tm.cutoff import ball_cutoff
    from heisenberg_tm.hgroup import compose, hdist
    rng = np.random.default_rng(cfg["seed"])
    m = cfg["cutoff"]["samples"]
    rows = []
    for r in cfg["cutoff"]["radii"]:
        r = float(r)
        center = rng.uniform(-2, 2, size=3)
        phi = ball_cutoff(center, r)
        u = rng.normal(size=(m, 3))
        u /= np.asarray(np.sqrt(np.hypot(np.sum(u[:, :2] ** 2, 1), u[:, 2])))[:, None]
        rad = 2.5 * r * rng.uniform(0, 1, size=m)
        pts = compose(np.broadcast_to(center, (m, 3)), u * np.stack([rad, rad, rad ** 2], 1))
        val = phi(pts)
        gn = hgrad_norm(phi, pts)
        dist = np.asarray(hdist(pts, center))
        inside, outside = dist < r, dist > 2 * r
        away = (np.abs(dist - r) > 0.05 * r) & (np.abs(dist - 2 * r) > 0.05 * r) & (dist > 0.05 * r)
        sub = np.flatnonzero(away)[:2000]
        fd = fd_hgrad(phi, pts[sub], h=1e-5 * r).norm
        fd_err = float(np.max(np.abs(fd - gn[sub]))) if sub.size else 0.0
        out.verdict(f"r={r:g} range in [0,1]", val.min() >= 0 and val.max() <= 1, "")
        out.verdict(f"r={r:g} |grad phi| <= 2/r", gn.max() <= 2 / r + 1e-9, f"max {gn.max():.6g} vs {2 / r:.6g}")
        out.verdict(f"r={r:g} plateau", np.all(val[inside] == 1) and np.all(gn[inside] == 0),
                    f"{int(inside.sum())} samples")
        out.verdict(f"r={r:g} support", np.all(val[outside] == 0), f"{int(outside.sum())} samples")
        out.verdict(f"r={r:g} chain rule vs finite differences", fd_err <= 1e-6 / r, f"max {fd_err:.2e}")
        rows.append([r, m, float(gn.max()), 2.0 / r, int(inside.sum()), int(outside.sum()), fd_err])
    out.csv("cutoff.csv", ["r", "samples", "max_grad", "grad_bound", "plateau_samples", "exterior_samples",
                           "fd_max_error"], rows)
    out.json("cutoff.json", {"verdicts": out.verdicts})


def _field(cfg, name, k):
    from heisenberg_tm.cutoff import ball_cutoff
    from heisenberg_tm.gluing import two_bump_field
    from heisenberg_tm.hgroup import GroupDim
    from heisenberg_tm.moser import moser_function
    dim = GroupDim.of(cfg["n"])
    if name == "moser":
        return moser_function(k, dim)
    if name == "two-bump":
        return two_bump_field(dim)
    return ball_cutoff(np.zeros(dim.ncoords), 0.5)


def cmd_functional(cfg, out: Outputs):
    from heisenberg_tm.functional import TMParams, normalize, reports_to_csv, support_rule, tm_functional
    q = cfg["quadrature"]
    p = cfg["params"]
    params = TMParams(p["alpha"], p["beta"], p["tau"])
    fc = cfg["functional"]
    u = _field(cfg, fc["field"], fc["k"])
    rule = support_rule(u, params.beta, q["base_order"], q["angular_order"])
    if fc["normalize"] != "none":
        u = normalize(u, fc["normalize"], params.tau, rule, cfg["workers"])
    k = fc["k"] if fc["field"] == "moser" else None
    rep = tm_functional(u, params, rule, cfg["workers"], k=k)
    # refinement study: the same support rule at higher radial and angular order
    fine = support_rule(u, params.beta, q["base_order"] + 4, q["angular_order"] + 4)
    rep_fine = tm_functional(u, params, fine, cfg["workers"], k=k)
    drift = abs(rep_fine.tm_value - rep.tm_value)
    err = max(rep_fine.quadrature_error, drift)
    rel = err / max(rep_fine.tm_value, 1e-300)
    out.verdict("tm_value finite and nonnegative", math.isfinite(rep_fine.tm_value) and rep_fine.tm_value >= 0,
                f"{rep_fine.tm_value:.12g} +- {err:.2e}")
    out.verdict("stable under quadrature refinement", rel <= 1e-6 or err <= 1e-10, f"relative {rel:.2e}")
    if rel > 1e-6 and err > 1e-10:
        raise NumericError(f"quadrature did not converge: relative error {rel:.2e}")
    rep_fine.extra["base_rule_tm_value"] = rep.tm_value
    rep_fine.extra["own_rule_error"] = rep_fine.quadrature_error
    rep_fine.quadrature_error = err
    out.text("functional.csv", reports_to_csv([rep_fine]))
    out.json("functional.json", {"report": rep_fine.to_json(), "num_nodes": len(fine), "verdicts": out.verdicts})


def cmd_moser(cfg, out: Outputs):
    from heisenberg_tm.hgroup import GroupDim
    from heisenberg_tm.moser import DEFAULT_K_GRID, threshold_scan
    dim = GroupDim.of(cfg["n"])
    p = cfg["params"]
    mc = cfg["moser"]
    scan = threshold_scan(p["beta"], p["tau"], mc["alpha_grid"], mc["k_max"], dim,
                          k_grid=mc["k_grid"] or DEFAULT_K_GRID, order=cfg["quadrature"]["base_order"],
                          workers=cfg["workers"])
    for a in scan.alphas:
        f = scan.fits[a]
        print(f"alpha={a:g}: {f.classification} slope {f.slope:+.4f} +- {f.slope_se:.4f}")
    if scan.flag:
        out.notice(scan.flag)
    br = "none" if scan.bracket is None else f"[{scan.bracket[0]:g}, {scan.bracket[1]:g}]"
    out.verdict("bracket contains alpha_Q(1 - beta/Q)", scan.bracket_contains_threshold,
                f"bracket {br}, threshold {scan.threshold:.6f}")
    out.text("moser_scan.csv", scan.to_csv())
    out.json("moser_scan.json", {"scan": scan.to_json(), "verdicts": out.verdicts})


def cmd_glue(cfg, out: Outputs):
    from heisenberg_tm.functional import TMParams
    from heisenberg_tm.gluing import glue_experiment, preset_field
    from heisenberg_tm.hgroup import GroupDim
    dim = GroupDim.of(cfg["n"])
    p = cfg["params"]
    gc = cfg["glue"]
    alpha = gc["alpha_fraction"] * dim.threshold(p["beta"])
    params = TMParams(alpha, p["beta"], p["tau"])
    u, rule = preset_field(gc["preset"], params, dim, gc["k"], cfg["quadrature"]["base_order"])
    run = glue_experiment(u, params, dim, gc["r"], rule=rule)
    for c in run.checks:
        out.verdict(c.name, c.passed, f"{c.lhs:.6g} <= {c.rhs:.6g}")
    out.text("glue.csv", run.to_csv())
    out.json("glue.json", {"run": run.to_json(), "verdicts": out.verdicts})


COMMANDS = {
    "geometry-check": cmd_geometry,
    "covering": cmd_covering,
    "cutoff-check": cmd_cutoff,
    "functional": cmd_functional,
    "moser-scan": cmd_moser,
    "glue": cmd_glue,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heisenberg-tm", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--beta", type=float)
    ap.add_argument("--tau", type=float)
    ap.add_argument("--r", type=float)
    ap.add_argument("--kmax", type=int)
    return ap


def main(argv=None) -> int:
    from heisenberg_tm.quadrature import NonFiniteIntegrand, NonIntegrableError
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Outputs(cfg, args.command)
    try:
        COMMANDS[args.command](cfg, out)
    except (NonIntegrableError, NonFiniteIntegrand, NumericError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"invariant failure: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK if out.passed else EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
