"""Command-line front end.

Subcommands: ``run`` (one algorithm, seed sweep), ``bench`` (multi-algorithm
comparison against the PALM baseline), ``check-grad``, ``estimate-lipschitz``
and ``plot``.  A flat ``key=value`` config file (``--config``) supplies
defaults; explicit flags override it.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..core import Iterate, prox_generic
from ..diagnostics import fd_gradient_check
from ..rng import stream_rng
from ..solver import SolverConfig
from . import io, svgplot
from .runner import BENCH_ALGORITHMS, PROBLEM_KINDS, RunSpec, bench, build_problem, run_experiment

ALGO_CHOICES = ("palm", "ipalm", "spring-sgd", "spring-saga", "spring-sarah")


def _parse_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment; keys use flag names."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}: line {lineno}: expected key=value")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        key = key.replace("-", "_")
        low = raw.lower()
        if low in ("true", "yes", "on"):
            values[key] = True
        elif low in ("false", "no", "off"):
            values[key] = False
        else:
            try:
                values[key] = int(raw)
            except ValueError:
                try:
                    values[key] = float(raw)
                except ValueError:
                    values[key] = raw
    return values


def _problem_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--problem", default="toy-nmf", choices=PROBLEM_KINDS)
    p.add_argument("--data", dest="data", default=None, help="matrix file (CSV or SPMX) for nmf/pca")
    p.add_argument("--image", dest="image", default=None, help="blurred PGM image for bid")
    p.add_argument("--rank", type=int, default=5)
    p.add_argument("--sparsity", type=int, default=None, help="nonzeros per dictionary column")
    p.add_argument("--lam1", type=float, default=0.1)
    p.add_argument("--lam2", type=float, default=0.1)
    p.add_argument("--lam", type=float, default=5e-4)
    p.add_argument("--theta", type=float, default=1e3)
    p.add_argument("--tiles", type=int, default=16)
    p.add_argument("--kernel-size", type=int, default=5)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--config", default=None, help="key=value defaults file")
    return p


def _solver_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--algo", default="palm", choices=ALGO_CHOICES)
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", default="practical", choices=("practical", "theoretical", "fixed"))
    p.add_argument("--gamma-x", type=float, default=None, help="x step for --steps fixed")
    p.add_argument("--gamma-y", type=float, default=None, help="y step for --steps fixed")
    p.add_argument("--sarah-p", type=float, default=None)
    p.add_argument("--warm-start", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--tol", type=float, default=None, help="gradient-map early-exit tolerance")
    p.add_argument("--lipschitz-const", type=float, default=None)
    p.add_argument("--no-lipschitz-refresh", action="store_true")
    p.add_argument("--power-iters", type=int, default=5)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="springopt",
                                     description="stochastic proximal alternating minimization benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", parents=[_problem_parent(), _solver_parent()],
                           help="run one algorithm over a seed sweep")
    run_p.add_argument("--out", default="out")
    run_p.add_argument("--repeat", type=int, default=1)
    run_p.add_argument("--parallelism", type=int, default=1)
    run_p.add_argument("--deterministic-timing", action="store_true")

    bench_p = sub.add_parser("bench", parents=[_problem_parent(), _solver_parent()],
                             help="compare algorithms against the PALM baseline")
    bench_p.add_argument("--out", default="out")
    bench_p.add_argument("--repeat", type=int, default=1)
    bench_p.add_argument("--parallelism", type=int, default=1)
    bench_p.add_argument("--deterministic-timing", action="store_true")
    bench_p.add_argument("--algos", default=",".join(BENCH_ALGORITHMS),
                         help="comma-separated list; must include palm")

    grad_p = sub.add_parser("check-grad", parents=[_problem_parent()],
                            help="finite-difference check of the component gradients")
    grad_p.add_argument("--points", type=int, default=10)
    grad_p.add_argument("--h", type=float, default=1e-6)
    grad_p.add_argument("--grad-tol", type=float, default=1e-5)
    grad_p.add_argument("--seed", type=int, default=0)

    lip_p = sub.add_parser("estimate-lipschitz", parents=[_problem_parent()],
                           help="power-method Lipschitz estimates at the initial point")
    lip_p.add_argument("--batch", type=int, default=None, help="subsample size for stochastic estimates")
    lip_p.add_argument("--iterations", type=int, default=5)
    lip_p.add_argument("--seed", type=int, default=0)

    plot_p = sub.add_parser("plot", help="render trace CSVs as an SVG")
    plot_p.add_argument("traces", nargs="+")
    plot_p.add_argument("--mode", default="objective", choices=("objective", "gradmap"))
    plot_p.add_argument("--x", dest="xaxis", default="epoch", choices=("epoch", "sfo"))
    plot_p.add_argument("--out", default="plot.svg")

    return parser


def _solver_config(args) -> SolverConfig:
    fixed = None
    if args.steps == "fixed":
        if args.gamma_x is None or args.gamma_y is None:
            raise ValueError("--steps fixed needs --gamma-x and --gamma-y")
        fixed = (args.gamma_x, args.gamma_y)
    return SolverConfig(
        algorithm=args.algo,
        batch_size=args.batch,
        sarah_p=args.sarah_p,
        epochs=args.epochs,
        seed=args.seed,
        step_policy=args.steps,
        fixed_steps=fixed,
        warm_start=args.warm_start,
        grad_map_tolerance=args.tol,
        lipschitz_refresh=not args.no_lipschitz_refresh,
        lipschitz_const=args.lipschitz_const,
        power_iterations=args.power_iters,
    )


def _run_spec(args, config: SolverConfig) -> RunSpec:
    params = {
        "rank": args.rank,
        "lam1": args.lam1,
        "lam2": args.lam2,
        "lam": args.lam,
        "theta": args.theta,
        "tiles": args.tiles,
        "kernel_size": args.kernel_size,
        "data_seed": args.data_seed,
    }
    if args.sparsity is not None:
        params["sparsity"] = args.sparsity
    return RunSpec(
        problem=args.problem,
        config=config,
        out_dir=getattr(args, "out", "out"),
        repeat=getattr(args, "repeat", 1),
        problem_params=params,
        data_path=args.data,
        image_path=args.image,
        deterministic_timing=getattr(args, "deterministic_timing", False),
        parallelism=getattr(args, "parallelism", 1),
    )


def _feasible_points(args, count: int):
    problem, init_fn = build_problem(_run_spec(args, SolverConfig(algorithm="palm")))
    rng = np.random.default_rng(args.seed)
    for i in range(count):
        z = init_fn(args.seed + i)
        x = prox_generic(problem.prox_x, 1.0, z.x + 0.05 * rng.standard_normal(problem.dim_x))
        y = prox_generic(problem.prox_y, 1.0, z.y + 0.05 * rng.standard_normal(problem.dim_y))
        yield problem, Iterate(x, y)


def cmd_run(args) -> int:
    summary = run_experiment(_run_spec(args, _solver_config(args)))
    for r in summary["runs"]:
        print(
            f"{summary['algorithm']} seed={r['seed']} status={r['status']} "
            f"objective={r['final_objective']:.6g} sfo={r['sfo_calls']}"
        )
    print(f"traces written to {args.out}")
    return 0


def cmd_bench(args) -> int:
    algos = tuple(a.strip() for a in args.algos.split(",") if a.strip())
    result = bench(_run_spec(args, _solver_config(args)), algorithms=algos)
    for row in result["rows"]:
        extra = ""
        if row["algorithm"] != "palm":
            extra = f" epochs_to_palm={row['epochs_to_palm_objective']:.4g}"
        print(
            f"{row['algorithm']:<14s} seed={row['seed']} status={row['status']} "
            f"objective={row['final_objective']:.6g} sfo={row['sfo_calls']}{extra}"
        )
    print(f"bench summary written to {Path(args.out) / 'bench_summary.csv'}")
    return 0


def cmd_check_grad(args) -> int:
    worst = 0.0
    for problem, z in _feasible_points(args, args.points):
        worst = max(worst, fd_gradient_check(problem, z, h=args.h))
    print(f"max relative gradient error over {args.points} points: {worst:.3e}")
    if worst > args.grad_tol:
        print(f"FAIL: exceeds tolerance {args.grad_tol:g}", file=sys.stderr)
        return 1
    return 0


def cmd_estimate_lipschitz(args) -> int:
    problem, init_fn = build_problem(_run_spec(args, SolverConfig(algorithm="palm")))
    if problem.lipschitz_x is None:
        raise ValueError(f"problem {args.problem!r} does not expose Lipschitz hooks")
    z = init_fn(args.seed)
    rng = stream_rng(args.seed, "power_init")
    lx = problem.lipschitz_x(z.x, z.y, None, rng, args.iterations)
    ly = problem.lipschitz_y(z.x, z.y, None, rng, args.iterations)
    print(f"full-batch estimates: L_x={lx:.6g} L_y={ly:.6g}")
    if args.batch is not None:
        batch_rng = stream_rng(args.seed, "lip_batch")
        batch = np.sort(batch_rng.choice(problem.n, size=args.batch, replace=False))
        sx = problem.lipschitz_x(z.x, z.y, batch, rng, args.iterations)
        sy = problem.lipschitz_y(z.x, z.y, batch, rng, args.iterations)
        print(f"stochastic estimates (b={args.batch}): L_x={sx:.6g} L_y={sy:.6g}")
    return 0


def cmd_plot(args) -> int:
    traces = [(Path(p).stem, io.read_trace_csv(p)) for p in args.traces]
    svgplot.emit_plot(traces, args.out, mode=args.mode, xaxis=args.xaxis)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "bench": cmd_bench,
    "check-grad": cmd_check_grad,
    "estimate-lipschitz": cmd_estimate_lipschitz,
    "plot": cmd_plot,
}


def cli_dispatch(argv: list[str]) -> int:
    """Parse and execute; returns the process exit code (0/1/2)."""
    parser = build_parser()
    try:
        if "--config" in argv:
            cfg_path = argv[argv.index("--config") + 1]
            defaults = _parse_config_file(cfg_path)
            for action in parser._subparsers._group_actions[0].choices.values():
                known = {a.dest for a in action._actions}
                action.set_defaults(**{k: v for k, v in defaults.items() if k in known})
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    except (IndexError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # runtime failure contract: exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
