"""Command-line front end: solve / scan / witness / stationary / gn.

Exit codes classify the solve regimes so shell pipelines can branch on them:
0 converged ground state, 1 usage or configuration error, 2 vanishing
(zero energy level, no minimizer), 3 energy unbounded from below.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .energy import estimate_gn_constant
from .graphs import build_halfline, build_line, build_tadpole
from .minimize import MinimizeConfig, MinimizeReport, minimize
from .stationary import ShootingError, shoot, shoot_at_mass, sweep_lambda, verify_against_minimizer
from .thresholds import (
    MU_WITNESS,
    optimal_witness,
    scan_mass,
    scan_json_payload,
    unbounded_witness,
    vanishing_family,
    write_scan_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VANISHING = 2
EXIT_UNBOUNDED = 3


def _add_graph_args(p, R_default=50.0):
    p.add_argument("--L", type=float, default=1.0, help="loop length")
    p.add_argument("--R", type=float, default=R_default, help="half-line truncation")
    p.add_argument("--h", type=float, default=0.01, help="grid spacing")


def _add_solver_args(p):
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--tol-energy", type=float, default=1e-11)
    p.add_argument("--tol-grad", type=float, default=2e-7)
    p.add_argument("--attain-tol", type=float, default=1e-6)
    p.add_argument("--energy-floor", type=float, default=-1e3)
    p.add_argument("--tail-window-frac", type=float, default=0.2)
    p.add_argument("--tail-mass-threshold", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="graphnls",
        description="Mass-constrained NLS ground states on tadpole metric graphs "
                    "with core-localized nonlinearity.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimize at one mass and classify the regime")
    p.add_argument("--mu", type=float, required=True)
    _add_graph_args(p)
    _add_solver_args(p)
    p.add_argument("--init", default=None,
                   help="preset name (default: multistart over all presets)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="solve_report.json")
    p.add_argument("--emit-plot", action="store_true")
    p.add_argument("--no-crosscheck", action="store_true",
                   help="skip the shooting cross-validation")

    p = sub.add_parser("scan", help="sweep the mass and bracket the onset of "
                                    "negative energy levels")
    p.add_argument("--mu-min", type=float, default=1.40)
    p.add_argument("--mu-max", type=float, default=2.72)
    p.add_argument("--steps", type=int, default=30)
    _add_graph_args(p)
    _add_solver_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="scan workers (default: GRAPHNLS_THREADS or 1)")
    p.add_argument("--outdir", default=".")
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.add_argument("--emit-plot", action="store_true")

    p = sub.add_parser("witness", help="closed-form witness profiles")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--kind", choices=("optimal", "unbounded", "vanishing"),
                   default="optimal")
    p.add_argument("--lam", type=float, default=1e4, help="unbounded: bump scale")
    p.add_argument("--n", type=int, default=10, help="vanishing: plateau extent")
    p.add_argument("--R", type=float, default=50.0)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--output", default=None)

    p = sub.add_parser("stationary", help="shooting solver at fixed lam, fixed "
                                          "mass, or along a lam sweep")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--lam-min", type=float, default=None)
    p.add_argument("--lam-max", type=float, default=None)
    p.add_argument("--lam-steps", type=int, default=25)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--output", default=None)

    p = sub.add_parser("gn", help="estimate a Gagliardo-Nirenberg constant")
    p.add_argument("--variant", choices=("p6", "infty"), default="p6")
    p.add_argument("--oracle", choices=("line", "halfline", "tadpole"),
                   default="line")
    p.add_argument("--seeds", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--R", type=float, default=30.0)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--output", default=None)

    return ap


def _config_dict(args, keys):
    return {k: getattr(args, k.replace("-", "_")) for k in keys}


def _minimize_config(args) -> MinimizeConfig:
    return MinimizeConfig(
        mu=getattr(args, "mu", None) or getattr(args, "mu_min"),
        max_iter=args.max_iter,
        tol_energy=args.tol_energy,
        tol_grad=args.tol_grad,
        attain_tol=args.attain_tol,
        energy_floor=args.energy_floor,
        tail_window_frac=args.tail_window_frac,
        tail_mass_threshold=args.tail_mass_threshold,
    )


def _report_payload(report: MinimizeReport, config: dict) -> dict:
    g = report.profile.graph
    return {
        "config": config,
        "regime": report.regime,
        "final_energy": report.final_energy,
        "lambda": report.lambda_est,
        "converged": report.converged,
        "vanishing_detected": report.vanishing_detected,
        "unbounded_detected": report.unbounded_detected,
        "tail_mass_fraction": report.tail_mass_fraction,
        "kirchhoff_residual": report.kirchhoff_res,
        "iterations": report.iterations,
        "max_mass_drift": report.max_mass_drift,
        "preset": report.preset,
        "energy_trace": [float(v) for v in report.energy_trace],
        "profile": {
            "h": g.h,
            "edges": [
                {
                    "length": e.length,
                    "is_compact_core": e.is_compact_core,
                    "is_halfline": e.is_halfline,
                    "values": [float(v) for v in report.profile.edge_values(i)],
                }
                for i, e in enumerate(g.edges)
            ],
        },
    }


def _write_json(payload: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_solve(args) -> int:
    config = _config_dict(args, [
        "mu", "L", "R", "h", "max_iter", "tol_energy", "tol_grad", "attain_tol",
        "energy_floor", "tail_window_frac", "tail_mass_threshold", "init", "seed",
    ])
    config["command"] = "solve"
    graph = build_tadpole(args.L, args.R, args.h)
    report = minimize(graph, _minimize_config(args), init=args.init)
    payload = _report_payload(report, config)

    if report.regime == "ground-state" and not args.no_crosscheck:
        cv = verify_against_minimizer(report, tol=1e-3)
        payload["cross_validation"] = {
            "matched": cv.matched,
            "distance": cv.distance,
            "lambda": cv.lam,
            "reason": cv.reason,
        }

    _write_json(payload, args.output)
    if args.emit_plot:
        from .plotting import render_solve_figure

        png = str(Path(args.output).with_suffix(".png"))
        render_solve_figure(report, png)
        print(f"wrote {png}")
    print(f"regime={report.regime} energy={report.final_energy:.6g} "
          f"lambda={report.lambda_est:.6g} preset={report.preset} "
          f"report={args.output}")
    return {"ground-state": EXIT_OK, "vanishing": EXIT_VANISHING,
            "unbounded": EXIT_UNBOUNDED}[report.regime]


def cmd_scan(args) -> int:
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("GRAPHNLS_THREADS", "1"))
    config = _config_dict(args, [
        "mu_min", "mu_max", "steps", "L", "R", "h", "max_iter", "tol_energy",
        "tol_grad", "attain_tol", "energy_floor", "tail_window_frac",
        "tail_mass_threshold", "seed", "format",
    ])
    config["command"] = "scan"
    config["threads"] = threads
    try:
        report = scan_mass(
            args.mu_min, args.mu_max, args.steps, _minimize_config(args),
            L=args.L, R=args.R, h=args.h, threads=threads,
        )
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    wrote = []
    if args.format in ("csv", "both"):
        csv_path = outdir / "scan.csv"
        write_scan_csv(report, csv_path)
        wrote.append(str(csv_path))
    if args.format in ("json", "both"):
        json_path = outdir / "scan.json"
        _write_json(scan_json_payload(report, config), json_path)
        wrote.append(str(json_path))
    if args.emit_plot:
        from .plotting import render_scan_figure, scan_plot_script

        script_path = outdir / "scan_plot.py"
        script_path.write_text(scan_plot_script("scan.csv", "scan.png"))
        wrote.append(str(script_path))
        png_path = outdir / "scan.png"
        render_scan_figure(report, png_path)
        wrote.append(str(png_path))

    lo = "none" if report.bracket_lower is None else f"{report.bracket_lower:.6g}"
    hi = "none" if report.bracket_upper is None else f"{report.bracket_upper:.6g}"
    print(f"bracket=({lo}, {hi}] points={len(report.points)} "
          f"violations={len(report.monotonicity_violations)}")
    for path in wrote:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_witness(args) -> int:
    config = _config_dict(args, ["mu", "L", "kind", "lam", "n", "R", "h"])
    config["command"] = "witness"
    if args.kind == "optimal":
        w = optimal_witness(args.mu, args.L)
        if w is None:
            print("none (mu < sqrt(3))")
            payload = {"config": config, "witness": None,
                       "threshold": MU_WITNESS}
        else:
            print(f"c={w.c:.10g} alpha={w.alpha:.10g} E={w.energy:.10g}")
            payload = {"config": config,
                       "witness": {"c": w.c, "alpha": w.alpha, "energy": w.energy}}
    elif args.kind == "unbounded":
        graph = build_tadpole(args.L, args.R, args.h)
        try:
            _u, e = unbounded_witness(args.mu, args.lam, graph)
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_USAGE
        print(f"lam={args.lam:.6g} E={e:.6g}")
        payload = {"config": config, "energy": e}
    else:
        graph = build_tadpole(args.L, args.R, args.h)
        try:
            u = vanishing_family(args.mu, args.n, graph)
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_USAGE
        from .energy import energy_localized

        e = energy_localized(u).total
        print(f"n={args.n} E={e:.6g} (exact {args.mu / (args.n - 1/3):.6g})")
        payload = {"config": config, "energy": e,
                   "exact_energy": args.mu / (args.n - 1.0 / 3.0)}
    if args.output:
        _write_json(payload, args.output)
        print(f"wrote {args.output}")
    return EXIT_OK


def _solution_payload(sol) -> dict:
    return {
        "lambda": sol.lam,
        "a": sol.a,
        "b": sol.b,
        "mass": sol.mass,
        "energy": sol.energy,
        "match_value": sol.match_value,
        "match_slope": sol.match_slope,
        "loop_length": sol.loop_length,
    }


def cmd_stationary(args) -> int:
    config = _config_dict(args, ["L", "lam", "mu", "lam_min", "lam_max",
                                 "lam_steps", "steps"])
    config["command"] = "stationary"
    try:
        if args.lam is not None:
            sol = shoot(args.lam, args.L, steps=args.steps)
            payload = {"config": config, "solution": _solution_payload(sol)}
            print(f"lam={sol.lam:.6g} a={sol.a:.6g} b={sol.b:.6g} "
                  f"mass={sol.mass:.6g} E={sol.energy:.6g}")
        elif args.mu is not None:
            sol = shoot_at_mass(args.mu, args.L, steps=args.steps)
            payload = {"config": config, "solution": _solution_payload(sol)}
            print(f"lam={sol.lam:.6g} a={sol.a:.6g} b={sol.b:.6g} "
                  f"mass={sol.mass:.6g} E={sol.energy:.6g}")
        elif args.lam_min is not None and args.lam_max is not None:
            lams = np.geomspace(args.lam_min, args.lam_max, args.lam_steps)
            sols = sweep_lambda(args.L, lams, steps=args.steps)
            rows = [_solution_payload(s) for s in sols if s is not None]
            payload = {"config": config, "solutions": rows}
            print(f"solved {len(rows)}/{len(lams)} points; "
                  f"mass range [{min(r['mass'] for r in rows):.4g}, "
                  f"{max(r['mass'] for r in rows):.4g}]" if rows else "no solutions")
        else:
            print("error: provide --lam, --mu, or --lam-min/--lam-max",
                  file=sys.stderr)
            return EXIT_USAGE
    except ShootingError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        _write_json(payload, args.output)
        print(f"wrote {args.output}")
    return EXIT_OK


def cmd_gn(args) -> int:
    config = _config_dict(args, ["variant", "oracle", "seeds", "seed", "L", "R", "h"])
    config["command"] = "gn"
    if args.oracle == "line":
        graph = build_line(args.R, args.h)
    elif args.oracle == "halfline":
        graph = build_halfline(args.R, args.h)
    else:
        graph = build_tadpole(args.L, args.R, args.h)
    est = estimate_gn_constant(graph, args.variant, args.seeds, seed=args.seed)
    print(f"estimate {est:.6g}")
    if args.output:
        _write_json({"config": config, "estimate": est}, args.output)
        print(f"wrote {args.output}")
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; remap to this taxonomy
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        handler = {
            "solve": cmd_solve,
            "scan": cmd_scan,
            "witness": cmd_witness,
            "stationary": cmd_stationary,
            "gn": cmd_gn,
        }[args.command]
        return handler(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
