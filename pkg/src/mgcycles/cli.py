"""Command-line interface: ``mgcycles {assemble,solve,bench,poly,theory}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .aggregation import (DEFAULT_COARSEST_SIZE, DEFAULT_MAX_LEVELS, DEFAULT_THETA,
                          build_hierarchy)
from .bench import (SUITES, emit, load_config, parse_bounds, parse_config,
                    result_row, run_suite)
from .cycles import CycleKind, CycleSpec, stationary_solve
from .poly import SpectralBounds, curves_csv, solve_threshold
from .problems import Example, ProblemSpec, assemble, rhs_for, true_solution
from .spectral import DEFAULT_STEPS, make_cycle
from .sparse import read_matrix_market, read_vector, write_matrix_market, write_vector

log = logging.getLogger("mgcycles")


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _add_problem(p):
    p.add_argument("--example", choices=[e.value for e in Example], default="poisson")
    p.add_argument("--m", type=int, default=64, help="mesh intervals per side (h = 1/m)")


def _add_setup(p):
    p.add_argument("--theta", type=float, default=DEFAULT_THETA,
                   help="strength threshold for aggregation")
    p.add_argument("--coarsest-size", type=int, default=DEFAULT_COARSEST_SIZE)
    p.add_argument("--max-levels", type=int, default=DEFAULT_MAX_LEVELS)


def _bounds_arg(text):
    try:
        return parse_bounds(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def cmd_assemble(args) -> int:
    A = assemble(ProblemSpec(args.example, args.m))
    x = true_solution(A.n_rows)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.example}_m{args.m}"
    write_matrix_market(out / f"{stem}.mtx", A, comment=f"{args.example}, m={args.m}")
    write_vector(out / f"{stem}_rhs.txt", rhs_for(A, x))
    write_vector(out / f"{stem}_solution.txt", x)
    print(f"wrote {stem}.mtx ({A.n_rows} unknowns, {A.nnz} nonzeros) to {out}")
    return 0


def cmd_solve(args) -> int:
    if args.matrix:
        A = read_matrix_market(args.matrix)
        b = read_vector(args.rhs) if args.rhs else rhs_for(A, true_solution(A.n_rows))
        example, m = Path(args.matrix).stem, 0
    else:
        A = assemble(ProblemSpec(args.example, args.m))
        b = rhs_for(A, true_solution(A.n_rows))
        example, m = args.example, args.m
    H = build_hierarchy(A, args.theta, args.coarsest_size, args.max_levels)
    spec = CycleSpec(args.cycle, args.k, args.bounds, init=args.init)
    cycle = make_cycle(H, spec, args.lanczos_steps, args.seed)
    if args.summary:
        sys.stderr.write(H.summary_csv(cycle.level_bounds if spec.kind.uses_bounds else None))
    rep = stationary_solve(A.csr, cycle, b, args.tol, args.max_iters)
    row = result_row(example, m, spec, rep)
    if args.format == "text":
        text = (f"{row.example} m={m} {CycleKind(row.cycle).label} k={row.k} "
                f"{row.bounds or '-'}: {row.status.value}, {row.iterations} iterations, "
                f"factor {row.avg_factor:.6f}\n")
        if args.history:
            text += "".join(f"{i} {r:.6e}\n" for i, r in enumerate(rep.residual_history))
    else:
        text = emit([row], args.format)
    _write(text, args.out)
    return 0


def cmd_bench(args) -> int:
    overrides = dict(
        examples=tuple(args.example) if args.example else None,
        ms=tuple(args.m) if args.m else None,
        tol=args.tol, max_iters=args.max_iters, theta=args.theta,
        coarsest_size=args.coarsest_size, max_levels=args.max_levels,
        seed=args.seed, lanczos_steps=args.lanczos_steps, jobs=args.jobs,
    )
    if args.config:
        config = load_config(args.config, **overrides)
    else:
        config = parse_config("", **overrides)
    extra = []
    for name in args.suite or []:
        extra += SUITES[name]
    if extra:
        config = replace(config, cycles=tuple(extra) + config.cycles)
    rows = run_suite(config)
    _write(emit(rows, args.format), args.out)
    return 0


def cmd_poly(args) -> int:
    bounds = SpectralBounds(args.lambda_min, args.lambda_max)
    _write(curves_csv(args.k, bounds, args.step), args.out)
    return 0


def cmd_theory(args) -> int:
    lines = ["family,k,delta,delta_TG,residual"]
    for fam in ("H", "N"):
        for k in args.k:
            r = solve_threshold(fam, k)
            lines.append(f"{fam},{k},{r.delta:.10f},{r.delta_TG:.10f},{r.residual:.2e}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mgcycles",
                                 description="Momentum-accelerated multigrid cycles")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", help="write a model problem in Matrix Market format")
    _add_problem(p)
    p.add_argument("--out", help="output directory (default: current)")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("solve", help="run one cycle configuration")
    _add_problem(p)
    _add_setup(p)
    p.add_argument("--matrix", help="Matrix Market file instead of a model problem")
    p.add_argument("--rhs", help="right-hand side file (with --matrix)")
    p.add_argument("--cycle", choices=[c.value for c in CycleKind], default="n")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--bounds", type=_bounds_arg, default=SpectralBounds(0.0, 1.0),
                   help="'estimate' or 'fixed:<min>,<max>' (default fixed:0,1)")
    p.add_argument("--init", choices=["sd", "sd_euclid", "poly"], default="sd",
                   help="second iterate of the momentum solvers")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iters", type=int, default=999)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lanczos-steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--format", choices=["text", "csv", "markdown"], default="text")
    p.add_argument("--history", action="store_true", help="print the residual history")
    p.add_argument("--summary", action="store_true",
                   help="print the hierarchy summary (CSV) to stderr")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a suite of configurations")
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--suite", action="append", choices=sorted(SUITES))
    p.add_argument("--example", action="append", choices=[e.value for e in Example])
    p.add_argument("--m", action="append", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--coarsest-size", type=int)
    p.add_argument("--max-levels", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--lanczos-steps", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--format", choices=["csv", "markdown"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("poly", help="error polynomial curves as CSV")
    p.add_argument("--k", type=int, nargs="+", default=[2, 3, 4, 5, 6, 7])
    p.add_argument("--lambda-min", type=float, default=0.1)
    p.add_argument("--lambda-max", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--out")
    p.set_defaults(func=cmd_poly)

    p = sub.add_parser("theory", help="two-grid thresholds for uniform convergence")
    p.add_argument("--k", type=int, nargs="+", default=[2, 3, 4, 5, 6, 7])
    p.add_argument("--out")
    p.set_defaults(func=cmd_theory)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
