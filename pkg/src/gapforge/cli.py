"""Command-line runner: ``gapforge <subcommand> [--config FILE] [--key value ...]``.

Every subcommand reads a flat ``key = value`` config (see
:mod:`gapforge.config`), lets flags override it, and writes into ``out``:

* ``report.json``: the resolved config followed by the results,
* one or more CSV tables,
* a gnuplot pair ``<name>.dat`` / ``<name>.plt``.

Exit status: 0 on success, 2 when a bound is vacuous or a check/flag
failed, 1 on errors (bad config, solver failure).
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import io
from .config import (Key, literal, p_auto_float, p_bool, p_choice, p_float, p_float_list, p_int,
                     p_int_list, p_opt_float, p_str)
from .errors import GapforgeError

CHARTS = ("euclidean", "poincare-disk", "sphere-stereographic")


def _out(name):
    return Key(p_str, f"gapforge-out/{name}", "output directory")


SCHEMAS = {
    "horoconvex-bound": {
        "dims": Key(p_int_list, [2, 3, 4, 5], "dimensions, e.g. 2..5"),
        "diams": Key(p_float_list, [0.5, 1.0, 2.0, 4.0], "hyperbolic diameters"),
        "C": Key(p_auto_float, "auto", "free constant of rho_bar or 'auto'"),
        "n": Key(p_int, 500, "shooting mesh cells"),
        "out": _out("horoconvex-bound"),
    },
    "bound": {
        "pipeline": Key(p_choice("conformally-flat", "sphere", "s1xsn"), "conformally-flat", ""),
        "factor": Key(literal(cfgmod.parse_factor), "poincare", "conformal factor literal"),
        "domain": Key(p_str, "ball:0,0;0.5", "domain literal"),
        "chart": Key(p_choice(*CHARTS), "poincare-disk", "chart of the domain literal"),
        "N": Key(p_int, 2, "dimension"),
        "K": Key(p_float, 1.0, "sphere curvature (sphere pipeline)"),
        "small_horoconvex": Key(p_bool, False, "search the stereographic radius R"),
        "lambda1_source": Key(p_choice("fallback", "computed", "user"), "fallback", ""),
        "lambda1": Key(p_opt_float, None, "user upper bound for lambda_1"),
        "C": Key(p_auto_float, "auto", ""),
        "n": Key(p_int, 2000, "shooting mesh cells"),
        "samples": Key(p_int, 41, "sample grid per axis"),
        "h": Key(p_float, 1 / 64, "2D grid spacing when lambda_1 is computed"),
        "out": _out("bound"),
    },
    "model1d": {
        "rho": Key(literal(cfgmod.parse_profile), "const:1", "const:c or quadratic:sigma,C"),
        "V": Key(literal(cfgmod.parse_profile), "const:0", "const:v"),
        "D": Key(p_float, math.pi, "interval length"),
        "n": Key(p_int, 400, "interior nodes of the finite-difference grid"),
        "out": _out("model1d"),
    },
    "pde-gap": {
        "domain": Key(p_str, "box:0,0;1,1", "domain literal"),
        "chart": Key(p_choice(*CHARTS[:2]), "euclidean", ""),
        "weight": Key(literal(cfgmod.parse_weight), "const:1", "const:c or a conformal factor literal"),
        "V": Key(p_float, 0.0, "constant potential"),
        "h": Key(p_float, 1 / 64, "grid spacing"),
        "extrapolate": Key(p_bool, True, "Richardson with h/2"),
        "out": _out("pde-gap"),
    },
    "appendix-collapse": {
        "L": Key(p_float, 0.8, "rectangle half-width"),
        "r": Key(p_float_list, [0.2, 0.1, 0.05, 0.025], "half-heights"),
        "cells": Key(p_int, 16, "grid cells across the height"),
        "out": _out("appendix-collapse"),
    },
    "two-point-check": {
        "space": Key(p_choice("euclidean", "sphere"), "euclidean", ""),
        "N": Key(p_int, 2, "dimension"),
        "K": Key(p_float, 1.0, "curvature for the sphere"),
        "field": Key(p_choice("random-cubic", "half-square-norm", "height", "linear"), "random-cubic", ""),
        "scale": Key(p_float, 0.5, "coefficient scale of random cubics"),
        "pairs": Key(p_int, 100, ""),
        "h": Key(p_float, 1e-3, "finite-difference step"),
        "seed": Key(p_int, 0, ""),
        "out": _out("two-point-check"),
    },
    "sde-couple": {
        "scenario": Key(p_choice("square", "gaussian", "free", "sphere-cap"), "square", ""),
        "M": Key(p_int, 10_000, "trajectories"),
        "dt": Key(p_opt_float, None, "time step (scenario default when none)"),
        "T_max": Key(p_opt_float, None, "horizon (scenario default when none)"),
        "alpha": Key(p_int, 0, "attraction switch (0 or 1)"),
        "seed": Key(p_int, 0, ""),
        "out": _out("sde-couple"),
    },
    "verify": {
        "suite": Key(p_str, "all", "suite name or 'all'"),
        "fast": Key(p_bool, False, "reduced sample sizes"),
        "seed": Key(p_int, 0, ""),
        "out": _out("verify"),
    },
}


# ------------------------------------------------------------------------------
# helpers
# ------------------------------------------------------------------------------

def _emit(values, sub, results):
    out = Path(values["out"])
    io.write_json(out / "report.json", {"subcommand": sub, "config": values, "results": results})
    return out


def _report_row(rep):
    return [rep.N, rep.D_H, rep.D, rep.R_E, rep.r_in, rep.lambda1_upper, rep.lambda_bar0, rep.C,
            rep.sigma, rep.V_bar, rep.min_rho_bar, rep.max_rho, rep.log_gap_bar, rep.correction,
            rep.bound, rep.log_bound, rep.positive, rep.flags.get("condition2")]


_REPORT_COLS = ["N", "D_H", "D", "R_E", "r_in", "lambda1_upper", "lambda_bar0", "C", "sigma", "V_bar",
                "min_rho_bar", "max_rho", "log_gap_bar", "correction", "bound", "log_bound", "positive",
                "condition2"]


def _report_ok(rep) -> bool:
    """Positive bound and no boolean flag reporting a failed condition."""
    return rep.positive and all(v is not False for v in rep.flags.values())


# ------------------------------------------------------------------------------
# subcommands
# ------------------------------------------------------------------------------

def cmd_horoconvex_bound(v):
    from .moduli import horoconvex_sweep

    reps = horoconvex_sweep(v["dims"], v["diams"], C=v["C"], n=v["n"])
    out = _emit(v, "horoconvex-bound", [r.to_dict() for r in reps])
    io.write_csv(out / "horoconvex_bound.csv", _REPORT_COLS, [_report_row(r) for r in reps])
    blocks, names = [], []
    for N in v["dims"]:
        rows = [(r.D_H, r.log_bound if r.log_bound is not None else float("nan")) for r in reps if r.N == N]
        blocks.append(rows)
        names.append(f"N={N}")
    io.write_gnuplot(out / "horoconvex_bound", ["D_H", "log_bound"], blocks, blocks=names,
                     title="horoconvex gap bound", xlabel="hyperbolic diameter", ylabel="log(bound)")
    return 0 if all(_report_ok(r) for r in reps) else 2


def cmd_bound(v):
    from .moduli import conformally_flat_bound, s1xsn_modulus, sphere_deformation_bound

    dom = cfgmod.parse_domain(v["domain"], v["chart"])
    if v["pipeline"] == "conformally-flat":
        rep = conformally_flat_bound(cfgmod.parse_factor(v["factor"]), dom, v["N"], v["lambda1_source"],
                                     v["lambda1"], C=v["C"], n=v["n"], samples=v["samples"], h=v["h"])
    elif v["pipeline"] == "s1xsn":
        rep = s1xsn_modulus(v["N"], dom, v["lambda1_source"], v["lambda1"],
                            C=None if v["C"] == "auto" else v["C"], n=v["n"], samples=v["samples"], h=v["h"])
    else:
        rep = sphere_deformation_bound(cfgmod.parse_factor(v["factor"]), dom, v["N"], v["K"],
                                       small_horoconvex=v["small_horoconvex"], samples=v["samples"])
    out = _emit(v, "bound", rep.to_dict())
    io.write_csv(out / "bound.csv", _REPORT_COLS, [_report_row(rep)])
    curve = rep.extra.get("log_bound_by_C")
    rows = [tuple(p) for p in curve] if curve else [(rep.C if rep.C is not None else float("nan"),
                                                     rep.log_bound if rep.log_bound is not None else float("nan"))]
    io.write_gnuplot(out / "bound", ["C", "log_bound"], rows, title=f"{v['pipeline']} bound",
                     xlabel="C", ylabel="log(bound)")
    return 0 if _report_ok(rep) else 2


def cmd_model1d(v):
    from .model1d import (Modulus1D, closed_form_gap_bound, eigenvalue_bracket, log_derivative_psi,
                          neumann_ratio_eigen, solve_1d)

    prof = cfgmod.parse_profile(v["rho"])
    Vp = cfgmod.parse_profile(v["V"])
    if Vp["sigma"] != 0:
        raise GapforgeError("the potential must be constant (const:v)")
    m = Modulus1D.quadratic(v["D"], prof["sigma"], prof["C"], Vp["C"])
    sp = solve_1d(m, v["n"])
    l1, l2, g = sp.best()
    res = {"lambda1": l1, "lambda2": l2, "gap": g, "neumann_ratio_eigenvalue": neumann_ratio_eigen(sp),
           "bracket1": eigenvalue_bracket(m, 1), "bracket2": eigenvalue_bracket(m, 2),
           "modulus": m.describe()}
    try:
        res["closed_form_gap_bound"] = closed_form_gap_bound(m)
    except GapforgeError as exc:
        res["closed_form_gap_bound"] = None
        res["closed_form_note"] = str(exc)
    out = _emit(v, "model1d", res)
    s, psi = log_derivative_psi(sp)
    rows = list(zip(sp.s, sp.phi1, sp.phi2, np.interp(sp.s, s, psi)))
    io.write_csv(out / "model1d.csv", ["s", "phi1", "phi2", "psi"], rows)
    io.write_gnuplot(out / "model1d", ["s", "phi1", "phi2", "psi"], rows, series=((1, 2), (1, 3)),
                     title="model eigenfunctions", xlabel="s", ylabel="phi")
    cf = res["closed_form_gap_bound"]
    return 0 if cf is None or g >= cf - 1e-9 else 2


def cmd_pde_gap(v):
    from .eigsolve import solve_weighted_2d

    dom = cfgmod.parse_domain(v["domain"], v["chart"])
    res = solve_weighted_2d(dom, rho=cfgmod.parse_weight(v["weight"]), V=v["V"], h=v["h"],
                            extrapolate=v["extrapolate"])
    l1, l2, g = res.best()
    out = _emit(v, "pde-gap", {"lambda1": l1, "lambda2": l2, "gap": g, "lambda1_h": res.lam1,
                               "lambda2_h": res.lam2, "levels": res.levels,
                               "residuals": list(res.residuals)})
    res.to_csv(out / "eigenfunctions.csv")
    rows = [(float(h), a, b, b - a) for h, (a, b) in sorted(res.levels.items(), key=lambda kv: -float(kv[0]))]
    io.write_csv(out / "levels.csv", ["h", "lambda1", "lambda2", "gap"], rows)
    io.write_gnuplot(out / "pde_gap", ["h", "lambda1", "lambda2", "gap"], rows, series=((1, 4),),
                     title="gap versus grid spacing", xlabel="h", ylabel="gap")
    return 0


def cmd_appendix_collapse(v):
    from .eigsolve import appendix_collapse

    rows = appendix_collapse(v["L"], tuple(v["r"]), v["cells"])
    L = v["L"]
    limit = (16 - L * L) / (16 - 4 * L * L)
    table = [(r.r, r.h, r.lam1, r.gap, r.log_gap, r.control_gap, r.heights["side"], r.heights["neck"],
              r.heights["ratio"], limit) for r in rows]
    cols = ["r", "h", "lambda1", "gap", "log_gap", "control_gap", "side_height", "neck_height", "ratio",
            "ratio_limit"]
    decreasing = all(b.log_gap < a.log_gap for a, b in zip(rows, rows[1:]))
    out = _emit(v, "appendix-collapse", {"rows": rows, "ratio_limit": limit, "gaps_decreasing": decreasing})
    io.write_csv(out / "appendix_collapse.csv", cols, table)
    io.write_gnuplot(out / "appendix_collapse", cols, table, series=((1, 5),), title="collapsing rectangles",
                     xlabel="r", ylabel="log gap")
    return 0 if decreasing else 2


def cmd_two_point_check(v):
    from .geometry import SpaceForm
    from .twopoint import ScalarField, TwoPointContext, hessian_identity_residual

    rng = np.random.default_rng(v["seed"])
    N = v["N"]
    sp = SpaceForm(N) if v["space"] == "euclidean" else SpaceForm(N, v["K"], "sphere-stereographic")
    dim = sp.model_dim

    def make_field():
        f = v["field"]
        if f == "random-cubic":
            return ScalarField.random_cubic(dim, rng, v["scale"])
        if f == "half-square-norm":
            return ScalarField.half_square_norm(dim)
        if f == "height":
            return ScalarField.height(dim)
        return ScalarField.linear(rng.normal(size=dim))

    rows = []
    for i in range(v["pairs"]):
        ctx = TwoPointContext(sp, make_field())
        while True:
            x = rng.uniform(-0.6, 0.6, N)
            dirn = rng.normal(size=N)
            y = x + rng.uniform(0.2, 0.6) * dirn / np.linalg.norm(dirn)
            if np.linalg.norm(y) < 0.9:
                break
        c = hessian_identity_residual(ctx, x, y, h=v["h"])
        rows.append((i, c.lhs, c.rhs, c.residual, c.residual_half, c.order))
    r1 = sum(r[3] for r in rows)
    r2 = sum(r[4] for r in rows)
    order = math.log2(r1 / r2) if r1 > 0 and r2 > 0 else float("nan")
    worst = max(r[3] for r in rows)
    ok = worst <= 1e-4 and (v["field"] != "random-cubic" or 1.6 <= order <= 2.4)
    out = _emit(v, "two-point-check", {"aggregate_order": order, "max_residual": worst, "pairs": len(rows),
                                       "passed": ok})
    cols = ["pair", "lhs", "rhs", "residual", "residual_half", "order"]
    io.write_csv(out / "two_point.csv", cols, rows)
    io.write_gnuplot(out / "two_point", cols, rows, series=((1, 4), (1, 5)), logscale_y=True,
                     title="identity residuals", xlabel="pair", ylabel="residual")
    return 0 if ok else 2


def _scenario(v):
    from .diffusion import DiffusionConfig
    from .domains import Domain
    from .geometry import SpaceForm
    from .verify import gaussian_drift_config, square_config

    sc, M, seed = v["scenario"], v["M"], v["seed"]
    if sc == "square":
        cfg = square_config(seed, M=M, T_max=v["T_max"] or 5.0, checkpoints=(0.0, 0.02, 0.05, 0.1))
    elif sc == "gaussian":
        cfg = gaussian_drift_config(seed, M=M)
    elif sc == "free":
        a = np.linspace(0.3, 1.0, M)
        x0 = np.column_stack([-a, np.zeros(M)])
        cfg = DiffusionConfig(SpaceForm(2), Domain.box([-50, -50], [50, 50]), x0, -x0, alpha=v["alpha"],
                              dt=1e-3, T_max=0.2, M=M, seed=seed, record_increments=True)
    else:
        # starts stay well inside the cap so rejected boundary exits do not bias the bins
        a = np.linspace(0.05, 0.4, M)
        x0 = np.column_stack([-a, np.zeros(M), np.zeros(M)])
        cfg = DiffusionConfig(SpaceForm(3, 1.0, "sphere-stereographic"),
                              Domain.ball([0, 0, 0], 0.8, chart="sphere-stereographic"), x0, -x0,
                              alpha=v["alpha"], dt=1e-3, T_max=0.03, M=M, seed=seed, record_increments=True)
    if v["dt"] is not None:
        cfg.dt = v["dt"]
        cfg.eps_couple = 2 * math.sqrt(2 * cfg.dt)
    if v["T_max"] is not None:
        cfg.T_max = v["T_max"]
    return cfg


def cmd_sde_couple(v):
    from .diffusion import drift_audit, phi_decay_audit, simulate_coupled
    from .model1d import Modulus1D, shoot_1d

    cfg = _scenario(v)
    st = simulate_coupled(cfg)
    res = {"dt": cfg.dt, "T_max": cfg.T_max, "eps_couple": cfg.eps_couple, "M": cfg.M,
           "coupled_fraction": st.coupled_fraction, "excluded": st.n_excluded, "substeps": st.substeps,
           "max_tau": float(st.tau.max())}
    ok = st.n_excluded == 0
    out = Path(v["out"])
    out.mkdir(parents=True, exist_ok=True)
    st.to_csv(out / "trajectories.csv")
    if cfg.record_increments:
        rep = drift_audit(st, cfg)
        res["drift"] = rep
        io.write_csv(out / "drift_bins.csv", ["xi_mid", "n", "mean_rate", "predicted", "z"], rep.bins)
        io.write_gnuplot(out / "drift", ["xi_mid", "n", "mean_rate", "predicted", "z"], rep.bins,
                         series=((1, 3), (1, 4)), title="half-distance drift", xlabel="xi", ylabel="drift")
        ok &= rep.worst_z < 4
        if v["scenario"] == "gaussian":
            ok &= -2.2 <= rep.slope <= -1.8
    else:
        spec = shoot_1d(Modulus1D.quadratic(math.sqrt(2)))
        dec = phi_decay_audit(cfg, spec, require_audit=False, stats=st)
        res["decay"] = dec
        res["decay_ok"] = dec.ok
        res["decay_note"] = "log-concavity of the square's ground state is analytic (product of sines)"
        rows = [(r.t, r.mean, r.se, r.envelope) for r in dec.rows]
        io.write_csv(out / "decay.csv", ["t", "mean_Phi", "se", "envelope"], rows)
        io.write_gnuplot(out / "decay", ["t", "mean_Phi", "se", "envelope"], rows, series=((1, 2), (1, 4)),
                         title="Phi decay", xlabel="t", ylabel="E Phi")
        ok &= dec.ok and st.coupled_fraction == 1.0
    _emit(v, "sde-couple", res)
    return 0 if ok else 2


def cmd_verify(v):
    from . import verify

    results = verify.run(v["suite"], fast=v["fast"], seed=v["seed"])
    for r in results:
        print(r.line())
    summary = verify.summarize(results)
    out = _emit(v, "verify", summary)
    rows = [(r.name, r.suite, r.passed, r.known_failure, r.summary) for r in results]
    io.write_csv(out / "verify.csv", ["name", "suite", "passed", "known_failure", "summary"], rows)
    io.write_gnuplot(out / "verify", ["index", "passed"], [(i, int(r.passed)) for i, r in enumerate(results)],
                     title="verification outcomes", xlabel="check", ylabel="passed")
    return 0 if all(r.passed for r in results) else 2


COMMANDS = {
    "horoconvex-bound": cmd_horoconvex_bound,
    "bound": cmd_bound,
    "model1d": cmd_model1d,
    "pde-gap": cmd_pde_gap,
    "appendix-collapse": cmd_appendix_collapse,
    "two-point-check": cmd_two_point_check,
    "sde-couple": cmd_sde_couple,
    "verify": cmd_verify,
}


HELP = {
    "horoconvex-bound": "sweep horoconvex gap bounds over dimensions and diameters",
    "bound": "one conformally-flat, sphere or s1xsn gap-bound pipeline",
    "model1d": "eigenpairs and bounds of the 1D comparison model",
    "pde-gap": "2D weighted Dirichlet gap on a domain",
    "appendix-collapse": "gaps of collapsing rectangles in the Poincare disk",
    "two-point-check": "finite-difference check of the second-variation identity",
    "sde-couple": "mirror-coupled diffusions and their audits",
    "verify": "run invariant suites and acceptance criteria",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gapforge", description="Fundamental-gap bounds and numerical checks.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, help=HELP[name], description=HELP[name])
        sp.add_argument("--config", help="key = value config file")
        for key, spec in schema.items():
            extra = {"nargs": "?", "const": "true"} if spec.parse is p_bool else {}
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar="VALUE",
                            help=f"{spec.help} (default: {spec.default})".strip(), **extra)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    schema = SCHEMAS[args.command]
    try:
        text = source = None
        if args.config:
            source = args.config
            text = Path(args.config).read_text()
        overrides = {k: getattr(args, k) for k in schema}
        values = cfgmod.resolve(schema, text, source, overrides)
        if args.command == "verify":
            from .verify import suites
            if values["suite"] != "all" and values["suite"] not in suites():
                raise cfgmod.ConfigError(f"unknown suite {values['suite']!r}; available: all, {', '.join(suites())}")
        return COMMANDS[args.command](values)
    except (GapforgeError, OSError, ValueError) as exc:
        print(f"gapforge {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
