"""Command-line entry point: ``vfsolve {solve,pareto-curve,experiment,verify}``.

Settings come from an INI file (``--config``, section ``[vfsolve]``) and
are overridden by ``--set key=value`` and the dedicated flags.  Exit codes:
0 success, 1 solver failure, 2 verification failure, 3 config error.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiment as ex
from .errors import ConfigError, SolverError, VfsolveError
from .pareto import BRACKET_EXHAUSTED, CONVERGED, MAX_ITER, solve_constrained
from .penalties import misfit_value
from .spg import solve_subproblem
from .value_fn import evaluate

EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, EXIT_CONFIG = 0, 1, 2, 3


def _common(p):
    p.add_argument("--config", "-c", help="INI file with a [vfsolve] section")
    p.add_argument("--set", "-s", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--output", "-o", help="output directory (config key output_dir)")
    p.add_argument("--seed", type=int)
    p.add_argument("--instance", choices=ex.INSTANCES)
    p.add_argument("--misfit", help="misfit descriptor, replaces the configured list")
    p.add_argument("--quiet", "-q", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vfsolve", description="Value-function solves, Pareto curves and robust recovery experiments.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("solve", help="evaluate v(b, tau) or solve the residual-constrained problem")
    _common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tau", type=float, help="evaluate the level-constrained problem at this budget")
    g.add_argument("--sigma", type=float, help="misfit target (default: the true-error misfit)")
    p.add_argument("--trace", action="store_true", help="write the iterate log as trace.csv")

    p = sub.add_parser("pareto-curve", help="sample v and dv/dtau on a grid of budgets")
    _common(p)
    p.add_argument("--taus", help="comma list or start:stop:count")

    p = sub.add_parser("experiment", help="robust basis-pursuit comparison over seeds and misfits")
    _common(p)
    p.add_argument("--replicates", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("verify", help="oracle comparison suite and inverse-function checks")
    _common(p)
    p.add_argument("--cases", type=int, default=40, help="random cases per oracle family")
    return parser


def load_config(args) -> ex.ExperimentConfig:
    cfg = ex.ExperimentConfig.load(args.config) if args.config else ex.ExperimentConfig()
    values = {}
    for item in args.set:
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        values[key] = value
    flags = {"output_dir": args.output, "seed": args.seed, "instance": args.instance,
             "misfits": args.misfit, "taus": getattr(args, "taus", None),
             "replicates": getattr(args, "replicates", None), "workers": getattr(args, "workers", None),
             "tau": getattr(args, "tau", None), "sigma": getattr(args, "sigma", None)}
    values.update({k: str(v) for k, v in flags.items() if v is not None})
    return ex.ExperimentConfig.from_mapping(values, base=cfg) if values else cfg


def _say(args, msg):
    if not args.quiet:
        print(msg)


def cmd_solve(cfg, args) -> int:
    rho = cfg.misfit_objects()[0]
    problem, bundle = ex.build_problem(cfg, rho)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.tau is not None:
        s = evaluate(problem, cfg.tau, cfg.spg_tol, cfg.spg_options())
        if args.trace:
            log = solve_subproblem(problem, cfg.tau, cfg.spg_options(), trace=True).log
            with open(out / "trace.csv", "w") as fh:
                fh.write("iter,f,pg_norm,step\n")
                for it, f, pg, step in log:
                    fh.write(f"{it},{f!r},{pg!r},{step!r}\n")
        summary = {"mode": "level-constrained", "misfit": str(rho), "tau": cfg.tau, "v": s.v,
                   "mu": s.mu if np.isfinite(s.mu) else None, "branch": s.branch, "gap": s.gap,
                   "differentiable": s.differentiable, "status": s.status, "iterations": s.iterations,
                   "x": s.x.tolist()}
        ex.write_json(out / "summary.json", summary)
        _say(args, f"v={s.v:.12g} mu={s.mu:.6g} branch={s.branch} status={s.status}")
        return EXIT_OK if s.status in ("converged", "nonsmooth-stop") else EXIT_SOLVER
    if cfg.sigma is not None:
        sigma = cfg.sigma
    elif bundle is not None:
        sigma = bundle.sigmas[cfg.misfits[0]]
    else:
        raise ConfigError("solve needs --tau or --sigma for this instance")
    x, trace = solve_constrained(problem, sigma, cfg.pareto_options())
    ex.write_trace_csv(out / "trace.csv", trace)
    summary = {"mode": "residual-constrained", "misfit": str(rho), "sigma": sigma, "tau": trace.tau,
               "status": trace.status, "newton_iterations": trace.iterations,
               "inner_iterations": trace.inner_iterations,
               "misfit_value": misfit_value(rho, problem.residual(x)), "x": x.tolist()}
    if bundle is not None:
        ex.write_signals_csv(out / "signals.csv", bundle.x0, x, bundle.w + bundle.zeta, problem.residual(x))
        nrm = float(np.linalg.norm(bundle.x0))
        summary["relative_error"] = float(np.linalg.norm(x - bundle.x0)) / nrm if nrm > 0 else None
    ex.write_json(out / "summary.json", summary)
    _say(args, f"tau={trace.tau:.12g} status={trace.status} newton={trace.iterations}")
    return EXIT_OK if trace.status in (CONVERGED, BRACKET_EXHAUSTED) else EXIT_SOLVER


def cmd_pareto_curve(cfg, args) -> int:
    problem, _ = ex.build_problem(cfg, cfg.misfit_objects()[0])
    taus = cfg.taus or ex.default_taus(problem)
    rows = ex.pareto_curve(problem, taus, cfg.spg_tol, cfg.spg_options())
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ex.write_curve_csv(out / "curve.csv", rows)
    _say(args, f"wrote {len(rows)} rows to {out / 'curve.csv'}")
    return EXIT_OK


def cmd_experiment(cfg, args) -> int:
    summary = ex.run_experiment(cfg)
    failed = False
    for s in summary["seeds"]:
        for r in s["runs"]:
            # a collapsed bracket still returns a feasible point; only these are failures
            failed |= r["status"] in ("failed", MAX_ITER)
            err = "failed" if r["relative_error"] is None else f"{r['relative_error']:.4f}"
            _say(args, f"seed={s['seed']} misfit={r['misfit']} error={err} status={r['status']}")
    for text, stats in summary["aggregate"].items():
        med = stats["median_error"]
        _say(args, f"median {text}: {'n/a' if med is None else f'{med:.4f}'}")
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_verify(cfg, args) -> int:
    report = ex.verify_all(cfg, cases=args.cases)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "verification.json").write_text(json.dumps(report, indent=2) + "\n")
    bad = [c for c in report["checks"] if not c["passed"]]
    for c in bad:
        tag = "WARN" if c.get("advisory") else "FAIL"
        _say(args, f"{tag} {c['name']}: oracle={c['oracle']} library={c['library']} err={c['abs_err']}")
    _say(args, f"{len(report['checks']) - len(bad)}/{len(report['checks'])} checks passed")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


COMMANDS = {"solve": cmd_solve, "pareto-curve": cmd_pareto_curve,
            "experiment": cmd_experiment, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.verb](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, VfsolveError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
