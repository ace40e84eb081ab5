"""Command-line entry point.

    rod solve CONFIG [--out DIR]     single case from a TOML config
    rod bench CASE [--out DIR]       benchmark study of a case
    rod converge CASE [--out DIR]    spatial-convergence study
    rod stats CASE [--out DIR]       Newton iteration/rate statistics

Exit code 0 on success; on failure the error name goes to stderr.
"""

import argparse
import dataclasses
import os
import sys

from . import benchmarks, csvio
from .benchmarks import CASES, Q2_MX_FULL
from .config import load_config
from .errors import RodError
from .newton import SolverConfig, min_increment_search, newton_solve
from .assembly import StaticProblem


def _case_setup(case_id, params):
    factory = CASES[case_id]
    return factory(**params) if params else factory()


def _cmd_solve(args):
    cfg = load_config(args.config)
    case = _case_setup(cfg.case_id, cfg.case_params)
    if cfg.law is not None:
        case = dataclasses.replace(case, law=cfg.law)
    disc = cfg.discretization
    q0 = disc.initialize_from_curve(case.curve)
    problem = StaticProblem(disc, case.law, q0, case.load, case.constraints)
    tol = cfg.tolerance if cfg.tolerance is not None else case.tolerance
    if cfg.auto_increments:
        n_inc = min_increment_search(
            problem,
            SolverConfig(tolerance=tol, max_iterations=cfg.max_iterations),
        )
        print(f"auto increments: {n_inc}")
    else:
        n_inc = cfg.n_increments if cfg.n_increments is not None else case.n_increments
    x, report = newton_solve(
        problem,
        SolverConfig(
            tolerance=tol, n_increments=n_inc, max_iterations=cfg.max_iterations
        ),
    )
    benchmarks.write_run_outputs(args.out, problem, x, report)
    print(
        f"{cfg.case_id}: converged, {n_inc} increments, "
        f"mean iterations {report.iteration_mean():.2f}; outputs in {args.out}"
    )


def _cmd_bench(args):
    out = args.out
    if args.case == "bend45":
        benchmarks.run_bend45(out=out, **_quick_bend45(args.quick))
    elif args.case == "helix":
        kw = {"rhos": (1.0e1,)} if args.quick else {}
        benchmarks.run_helix(out=out, **kw)
    elif args.case == "helical_rollup":
        kw = (
            {"formulations": (benchmarks.Q1_MX_FULL,), "increments": {"MX": 90}}
            if args.quick
            else {}
        )
        benchmarks.run_helical_rollup(out=out, **kw)
    elif args.case == "ring":
        benchmarks.run_ring(out=out, n_increments=40 if args.quick else 120)
    elif args.case == "cantilever":
        benchmarks.run_cantilever(out=out)
    else:
        raise ValueError(f"unknown case {args.case!r}")


def _quick_bend45(quick):
    if not quick:
        return {}
    return {
        "rhos": (1.0e2,),
        "formulations": (benchmarks.Q1_MX_FULL, benchmarks.Q1_DB_FULL),
        "node_counts": (9, 17, 33),
        "reference_nodes": 129,
    }


def _cmd_converge(args):
    out = os.path.join(args.out, args.case)
    os.makedirs(out, exist_ok=True)
    if args.case == "bend45":
        benchmarks.run_bend45(out=args.out, **_quick_bend45(args.quick))
        return
    case = _case_setup(args.case, {})
    node_counts = (11, 21, 41) if args.case != "cantilever" else (5, 9, 17)
    reference = 81 if args.case != "cantilever" else 33
    rows = benchmarks.refinement_self_check(
        case, Q2_MX_FULL, node_counts, reference_nodes=reference
    )
    csvio.write_convergence(os.path.join(out, "convergence.csv"), rows)


def _cmd_stats(args):
    case = _case_setup(args.case, {})
    problem = case.problem(Q2_MX_FULL)
    x, report = newton_solve(problem, case.solver_config())
    out = os.path.join(args.out, args.case)
    os.makedirs(out, exist_ok=True)
    csvio.write_newton(os.path.join(out, "newton.csv"), report)
    gm = report.rate_geometric_mean()
    gs = report.rate_geometric_std()
    print(
        f"{args.case}: iterations mean {report.iteration_mean():.3f} "
        f"std {report.iteration_std():.3f}; rate geometric mean "
        f"{gm if gm is None else f'{gm:.3e}'} geometric std "
        f"{gs if gs is None else f'{gs:.3f}'} "
        f"(max_iterations {report.max_iterations})"
    )


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rod", description="Cosserat rod finite element benchmarks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a single configured case")
    p_solve.add_argument("config")
    p_solve.add_argument("--out", default="rod_out")

    for name in ("bench", "converge", "stats"):
        p = sub.add_parser(name)
        p.add_argument("case", choices=sorted(CASES))
        p.add_argument("--out", default="rod_out")
        p.add_argument("--quick", action="store_true")

    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            _cmd_solve(args)
        elif args.command == "bench":
            _cmd_bench(args)
        elif args.command == "converge":
            _cmd_converge(args)
        elif args.command == "stats":
            _cmd_stats(args)
    except RodError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
