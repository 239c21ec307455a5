"""zfbound command line.

Usage:
    zfbound solve  --config configs/default.toml --seed 3
    zfbound sweep  --config configs/table2_min_rate.toml --out results/table2
    zfbound scan   --config configs/fig1_scan.toml --mus 0:2:41 --out results/scan
    zfbound oracle --config configs/table1_small.toml --out results/oracle

Exit codes: 0 on success, 1 on configuration errors, 2 on numerical failures.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from rich.console import Console
from rich.table import Table

from .bench import prepare_realization, run_scenario, scan_dual
from .config import load_config
from .dual import solve_dual, write_trace
from .exceptions import ConfigurationError, ZFBoundError
from .model import Allocation
from .monitoring import configure_logging
from .oracle import exact_enumeration
from .recovery import gap_percent, recover_feasible
from .types import ScenarioConfig
from .weights import weight_adjust

console = Console()


def _float_list(text: str) -> list[float]:
    """Parse ``a,b,c`` or ``start:stop:count``."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(x) for x in np.linspace(float(start), float(stop), int(count))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a,b,c or start:stop:count, got {text!r}")


def _load(args: argparse.Namespace) -> ScenarioConfig:
    return load_config(
        args.config,
        seed=args.seed,
        realizations=args.realizations,
        threads=args.threads,
        emit_trace=True if args.emit_trace else None,
    )


def _gap_text(upper: float, value: float | None) -> str:
    if value is None:
        return "-"
    return f"{gap_percent(upper, value):.3f}"


def _allocation_table(alloc: Allocation, title: str) -> Table:
    table = Table(title=title, show_header=True, header_style="bold cyan")
    table.add_column("Subcarrier", justify="right")
    table.add_column("SDMA set")
    table.add_column("Tx power", justify="right")
    table.add_column("Rates (bps/Hz)")
    tx = np.sum(np.abs(alloc.beams) ** 2, axis=2)
    for n, members in enumerate(alloc.assignment):
        table.add_row(
            str(n),
            "{" + ",".join(str(k) for k in members) + "}",
            f"{tx[:, n].sum():.3f}",
            ", ".join(f"{k}:{alloc.rates[k, n]:.2f}" for k in members),
        )
    return table


def cmd_solve(args: argparse.Namespace) -> int:
    """Solve one realization with every method and print the bounds."""
    config = _load(args)
    instance, pre = prepare_realization(config, args.realization)
    dsol = solve_dual(instance, pre, config.solver)
    upper = dsol.upper_bound
    recovery = recover_feasible(dsol, instance, pre, config.recovery)
    weights = weight_adjust(instance, pre, config.weights, config.solver)
    oracle = exact_enumeration(instance, pre, config.oracle) if config.oracle.enabled else None

    results = {
        "upper_bound": upper,
        "dual_iterations": dsol.iterations,
        "dual_converged": dsol.converged,
        "recovery": recovery.allocation.objective if recovery.allocation else None,
        "recovery_stage": recovery.stage,
        "weight_adjust": weights.allocation.objective if weights.allocation else None,
        "weight_iterations": weights.iterations,
        "oracle": oracle.allocation.objective if oracle and oracle.allocation else None,
    }

    table = Table(title="Bounds", show_header=True, header_style="bold cyan")
    table.add_column("Method")
    table.add_column("Objective", justify="right")
    table.add_column("Gap %", justify="right")
    table.add_column("Detail")
    table.add_row(
        "dual bound",
        f"{upper:.4f}",
        "0.000",
        f"{dsol.iterations} iterations, {'converged' if dsol.converged else 'limit'}",
    )
    for name, detail in (
        ("recovery", recovery.stage),
        ("weight_adjust", f"{weights.iterations} iterations"),
        ("oracle", "" if oracle is None else f"{oracle.assignments_examined} assignments"),
    ):
        value = results[name]
        if name == "oracle" and oracle is None:
            continue
        table.add_row(
            name,
            "not found" if value is None else f"{value:.4f}",
            _gap_text(upper, value),
            detail,
        )
    console.print(table)
    if recovery.allocation is not None:
        console.print(_allocation_table(recovery.allocation, "Recovered allocation"))

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "solve.json").write_text(json.dumps(results, indent=2), encoding="utf-8")
        if config.emit_trace:
            write_trace(dsol.trace, out / "trace.csv")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    """Run a Monte Carlo sweep and write the summary, records and manifest."""
    config = _load(args)
    out = Path(args.out)
    report = run_scenario(config, trace_dir=out / "traces")
    report.render(console)
    paths = report.write(out)
    console.print(f"Summary written to {paths['summary']}")
    return 0


def cmd_scan(args: argparse.Namespace) -> int:
    """Evaluate the dual function on a multiplier grid."""
    config = _load(args)
    frame = scan_dual(
        config,
        lambdas=args.lambdas,
        mus=args.mus,
        realization=args.realization,
        user=args.user,
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out / "scan.csv", index=False, float_format="%.8g")
        console.print(f"Scan written to {out / 'scan.csv'}")
    else:
        console.print(frame.to_string(index=False))
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    """Exhaustive search on one small realization, with the dual bound."""
    config = _load(args)
    instance, pre = prepare_realization(config, args.realization)
    dsol = solve_dual(instance, pre, config.solver)
    result = exact_enumeration(instance, pre, config.oracle)
    objective = result.allocation.objective if result.allocation else None
    console.print(
        f"upper bound {dsol.upper_bound:.4f}, oracle "
        f"{'not found' if objective is None else f'{objective:.4f}'}, "
        f"gap {_gap_text(dsol.upper_bound, objective)} %, "
        f"{result.assignments_examined} assignments"
    )
    if result.allocation is not None:
        console.print(_allocation_table(result.allocation, "Optimal allocation"))

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        results = {
            "upper_bound": dsol.upper_bound,
            "oracle": objective,
            "gap_percent": None
            if objective is None
            else gap_percent(dsol.upper_bound, objective),
            "assignments_examined": result.assignments_examined,
            "assignment": None
            if result.allocation is None
            else [list(members) for members in result.allocation.assignment],
        }
        (out / "oracle.json").write_text(json.dumps(results, indent=2), encoding="utf-8")
        if config.emit_trace:
            write_trace(dsol.trace, out / "trace.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zfbound",
        description="zfbound: dual bounds for zero-forcing OFDMA-SDMA scheduling",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level (default: WARNING)",
    )
    parser.add_argument(
        "--log-format",
        default="console",
        choices=["console", "json"],
        help="Log output format (default: console)",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Scenario TOML file (default: built-in defaults)")
    common.add_argument("--seed", type=int, help="Override the scenario seed")
    common.add_argument("--realizations", type=int, help="Override the realization count")
    common.add_argument("--threads", type=int, help="Worker processes for sweeps")
    common.add_argument(
        "--emit-trace", action="store_true", help="Write per-iteration solver traces"
    )

    solve = subparsers.add_parser(
        "solve", parents=[common], help="Solve one realization with every method"
    )
    solve.add_argument("--realization", type=int, default=0, help="Realization index")
    solve.add_argument("--out", help="Directory for solve.json and the trace")
    solve.set_defaults(func=cmd_solve)

    sweep = subparsers.add_parser(
        "sweep", parents=[common], help="Run a Monte Carlo sweep"
    )
    sweep.add_argument("--out", default="results", help="Output directory")
    sweep.set_defaults(func=cmd_sweep)

    scan = subparsers.add_parser(
        "scan", parents=[common], help="Scan the dual function over a grid"
    )
    scan.add_argument(
        "--lambdas",
        type=_float_list,
        help="Power prices, a,b,c or start:stop:count (default: solved price)",
    )
    scan.add_argument(
        "--mus",
        type=_float_list,
        default=[0.0],
        help="Rate multipliers, a,b,c or start:stop:count",
    )
    scan.add_argument("--user", type=int, help="User whose multiplier is scanned")
    scan.add_argument("--realization", type=int, default=0, help="Realization index")
    scan.add_argument("--out", help="Directory for scan.csv (default: print)")
    scan.set_defaults(func=cmd_scan)

    oracle = subparsers.add_parser(
        "oracle", parents=[common], help="Exhaustive search on a small instance"
    )
    oracle.add_argument("--realization", type=int, default=0, help="Realization index")
    oracle.add_argument("--out", help="Directory for oracle.json and the trace")
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(log_level=args.log_level, output_format=args.log_format)
    try:
        return args.func(args)
    except ConfigurationError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return e.exit_code
    except ZFBoundError as e:
        print(f"Error [{e.code}]: {e}", file=sys.stderr)
        return e.exit_code
    except (ArithmeticError, np.linalg.LinAlgError, ValueError) as e:
        print(f"Numerical failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
