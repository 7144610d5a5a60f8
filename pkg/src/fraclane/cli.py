"""Command line front end.

Runs a built-in example problem or a TOML-defined one, at a single
resolution or as a sweep over levels, and writes residual tables as CSV
and full runs as JSON.  Exit status: 0 when every solve converged, 2 on
solver non-convergence, 1 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

from .analysis import ConvergenceTable, ResidualReport, residual_table, convergence_sweep
from .expressions import ParseError
from .expressions import parse as parse_expression
from .haar import Resolution
from .problems import (
    EXPERIMENT_IDS,
    CaseI,
    CaseII,
    ConfigError,
    FractionalOrders,
    ProblemSpec,
    ProblemValidationError,
    SingularTerm,
    get_experiment,
    load_config,
    validate,
)
from .solver import SolveResult, SolverConfig, newton_solve

__all__ = ["main", "build_parser", "emit_table_csv", "emit_run_json"]

_MAX_LEVEL = 10


class UsageError(Exception):
    """Bad flag combination or value; reported without a traceback."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="fraclane",
        description=(
            "Solve a coupled singular fractional boundary value problem by "
            "Haar wavelet collocation and report residual errors."
        ),
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--experiment", choices=EXPERIMENT_IDS,
                        help="built-in example problem")
    source.add_argument("--config", type=Path, metavar="PATH",
                        help="TOML problem definition")

    parser.add_argument("--J", type=int, default=None,
                        help="maximal resolution level (default 3)")
    parser.add_argument("--sweep-J", dest="sweep_J", metavar="LIST", default=None,
                        help="comma-separated ascending levels, e.g. 3,4,5")

    parser.add_argument("--alpha1", type=float, help="order of the leading derivative of y")
    parser.add_argument("--beta1", type=float, help="order of the lower derivative of y")
    parser.add_argument("--alpha2", type=float, help="order of the leading derivative of z")
    parser.add_argument("--beta2", type=float, help="order of the lower derivative of z")
    parser.add_argument("--classical", action="store_true",
                        help="classical limit preset: alpha1 = alpha2 = 2, beta1 = beta2 = 1")

    parser.add_argument("--k1", type=float, help="singular coefficient of the first equation")
    parser.add_argument("--gamma1", type=float, help="singular exponent of the first equation")
    parser.add_argument("--k2", type=float, help="singular coefficient of the second equation")
    parser.add_argument("--gamma2", type=float, help="singular exponent of the second equation")

    parser.add_argument("--nu1", type=float,
                        help="interior point tied to y(1) (four-point conditions only)")
    parser.add_argument("--nu2", type=float,
                        help="interior point tied to z(1) (four-point conditions only)")

    parser.add_argument("--f1", metavar="EXPR", help="replace the first right-hand side")
    parser.add_argument("--f2", metavar="EXPR", help="replace the second right-hand side")

    parser.add_argument("--table", type=Path, metavar="PATH",
                        help="write the nine-point residual table as CSV")
    parser.add_argument("--dense", type=Path, metavar="PATH",
                        help="write the dense-grid residual table as CSV")
    parser.add_argument("--json", dest="json_path", type=Path, metavar="PATH",
                        help="write the full run (coefficients, diagnostics, table) as JSON")

    parser.add_argument("--tol", type=float, default=1e-12,
                        help="residual max-norm tolerance (default 1e-12)")
    parser.add_argument("--max-iter", type=int, default=50,
                        help="iteration cap (default 50)")
    parser.add_argument("--fd-step", type=float, default=None,
                        help="finite difference step scale (default sqrt machine epsilon)")
    parser.add_argument("--damped", action="store_true",
                        help="halve steps that increase the residual norm")
    return parser


@dataclass(frozen=True)
class _Request:
    spec: ProblemSpec
    label: str
    levels: list[int]
    sweep: bool
    config: SolverConfig
    table_path: Optional[Path]
    dense_path: Optional[Path]
    json_path: Optional[Path]


def _parse_levels(args) -> tuple[list[int], bool]:
    if args.J is not None and args.sweep_J is not None:
        raise UsageError("use either --J or --sweep-J, not both")
    if args.sweep_J is not None:
        try:
            levels = [int(tok) for tok in args.sweep_J.split(",")]
        except ValueError:
            raise UsageError(f"--sweep-J expects comma-separated integers, got {args.sweep_J!r}") from None
        if not levels or any(lo >= hi for lo, hi in zip(levels, levels[1:])):
            raise UsageError("--sweep-J must list levels in strictly ascending order")
        sweep = True
    else:
        levels = [args.J if args.J is not None else 3]
        sweep = False
    for J in levels:
        if not 0 <= J <= _MAX_LEVEL:
            flag = "--sweep-J" if sweep else "--J"
            raise UsageError(f"{flag}: level {J} outside the supported range 0..{_MAX_LEVEL}")
    return levels, sweep


def _apply_overrides(spec: ProblemSpec, args) -> ProblemSpec:
    o = spec.orders
    if args.classical:
        o = FractionalOrders(alpha1=2.0, beta1=1.0, alpha2=2.0, beta2=1.0)
    o = FractionalOrders(
        alpha1=o.alpha1 if args.alpha1 is None else args.alpha1,
        beta1=o.beta1 if args.beta1 is None else args.beta1,
        alpha2=o.alpha2 if args.alpha2 is None else args.alpha2,
        beta2=o.beta2 if args.beta2 is None else args.beta2,
    )
    spec = replace(spec, orders=o)

    if args.k1 is not None or args.gamma1 is not None:
        spec = replace(spec, sing1=SingularTerm(
            k=spec.sing1.k if args.k1 is None else args.k1,
            gamma_exp=spec.sing1.gamma_exp if args.gamma1 is None else args.gamma1,
        ))
    if args.k2 is not None or args.gamma2 is not None:
        spec = replace(spec, sing2=SingularTerm(
            k=spec.sing2.k if args.k2 is None else args.k2,
            gamma_exp=spec.sing2.gamma_exp if args.gamma2 is None else args.gamma2,
        ))

    if args.nu1 is not None or args.nu2 is not None:
        bc = spec.boundary
        if not isinstance(bc, (CaseI, CaseII)):
            flag = "--nu1" if args.nu1 is not None else "--nu2"
            raise UsageError(f"{flag} applies only to four-point boundary conditions")
        bc = replace(
            bc,
            nu1=bc.nu1 if args.nu1 is None else args.nu1,
            nu2=bc.nu2 if args.nu2 is None else args.nu2,
        )
        spec = replace(spec, boundary=bc)

    for flag, source in (("--f1", args.f1), ("--f2", args.f2)):
        if source is None:
            continue
        try:
            tree = parse_expression(source)
        except ParseError as exc:
            raise UsageError(f"{flag}: {exc}") from exc
        if flag == "--f1":
            spec = replace(spec, f1=tree, f1_source=source)
        else:
            spec = replace(spec, f2=tree, f2_source=source)
    return validate(spec)


def _build_request(args) -> _Request:
    levels, sweep = _parse_levels(args)
    if sweep:
        for flag, value in (("--table", args.table), ("--dense", args.dense),
                            ("--json", args.json_path)):
            if value is not None:
                raise UsageError(f"{flag} requires a single-level run, not --sweep-J")
    if args.experiment is not None:
        spec = get_experiment(args.experiment)
        label = f"experiment {args.experiment}"
    else:
        spec = load_config(args.config)
        label = f"config {args.config}"
    spec = _apply_overrides(spec, args)
    if args.max_iter < 1:
        raise UsageError(f"--max-iter must be at least 1, got {args.max_iter}")
    config = SolverConfig(
        tol=args.tol,
        max_iter=args.max_iter,
        damping=args.damped,
        **({"fd_step_scale": args.fd_step} if args.fd_step is not None else {}),
    )
    return _Request(
        spec=spec,
        label=label,
        levels=levels,
        sweep=sweep,
        config=config,
        table_path=args.table,
        dense_path=args.dense,
        json_path=args.json_path,
    )


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def emit_table_csv(report: ResidualReport, path) -> None:
    """Write a residual report as CSV.

    Format contract: header x,r1,r2,r; one row per grid point at nine
    significant digits; final row E,,,<value>; LF line endings.
    """
    if report.grid.size == 0:
        raise ValueError("refusing to write an empty residual report")
    lines = ["x,r1,r2,r"]
    for x, r1, r2, r in zip(report.grid, report.r1, report.r2, report.r):
        lines.append(f"{_fmt(x)},{_fmt(r1)},{_fmt(r2)},{_fmt(r)}")
    lines.append(f"E,,,{_fmt(report.E)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_run_json(result: SolveResult, report: ResidualReport, config: SolverConfig, path) -> None:
    """Write one full run as a JSON document (schema version 1)."""
    spec = result.state.spec
    doc = {
        "schema_version": "1",
        "problem": {
            "name": spec.name,
            "f1": spec.f1_source,
            "f2": spec.f2_source,
            "sing1": {"k": spec.sing1.k, "gamma": spec.sing1.gamma_exp},
            "sing2": {"k": spec.sing2.k, "gamma": spec.sing2.gamma_exp},
            "boundary": {
                "mode": type(spec.boundary).__name__,
                "parameters": asdict(spec.boundary),
            },
        },
        "orders": asdict(spec.orders),
        "J": result.state.res.J,
        "coefficients": {
            "a": [float(v) for v in result.state.coeffs.a],
            "b": [float(v) for v in result.state.coeffs.b],
        },
        "initial_data": asdict(result.state.data),
        "diagnostics": {
            "converged": result.converged,
            "iterations": result.iterations,
            "residual_norm": result.residual_norm,
            "condition_estimate": result.condition,
            "tolerance": config.tol,
            "max_iterations": config.max_iter,
            "message": result.message,
        },
        "table": {
            "x": [float(v) for v in report.grid],
            "r1": [float(v) for v in report.r1],
            "r2": [float(v) for v in report.r2],
            "r": [float(v) for v in report.r],
        },
        "E": report.E,
        "E_dense": report.dense.E if report.dense is not None else None,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _print_problem_header(request: _Request) -> None:
    spec = request.spec
    o = spec.orders
    print(f"problem: {spec.name} ({request.label})")
    print(
        f"orders: alpha1={_fmt(o.alpha1)} beta1={_fmt(o.beta1)} "
        f"alpha2={_fmt(o.alpha2)} beta2={_fmt(o.beta2)}"
    )
    print(
        f"singular terms: k1={_fmt(spec.sing1.k)} gamma1={_fmt(spec.sing1.gamma_exp)} "
        f"k2={_fmt(spec.sing2.k)} gamma2={_fmt(spec.sing2.gamma_exp)}"
    )


def _run_single(request: _Request) -> int:
    res = Resolution(request.levels[0])
    result = newton_solve(request.spec, res, request.config)
    report = residual_table(result.state)

    _print_problem_header(request)
    print(f"J = {res.J}, basis size {res.basis_size}, unknowns {2 * res.basis_size}")
    status = "yes" if result.converged else "no"
    print(
        f"converged: {status}, iterations {result.iterations}, "
        f"residual {_fmt(result.residual_norm)}, condition {_fmt(result.condition)}"
    )
    d = result.state.data
    print(
        f"initial data: y0={_fmt(d.y0)} yp0={_fmt(d.yp0)} "
        f"z0={_fmt(d.z0)} zp0={_fmt(d.zp0)}"
    )
    print(f"E nine-point = {_fmt(report.E)}")
    print(f"E dense      = {_fmt(report.dense.E)}")

    if request.table_path is not None:
        emit_table_csv(report, request.table_path)
    if request.dense_path is not None:
        emit_table_csv(report.dense, request.dense_path)
    if request.json_path is not None:
        emit_run_json(result, report, request.config, request.json_path)

    if not result.converged:
        print(f"solver did not converge: {result.message}", file=sys.stderr)
        return 2
    return 0


def _run_sweep(request: _Request) -> int:
    table: ConvergenceTable = convergence_sweep(request.spec, request.levels, request.config)
    _print_problem_header(request)
    print(f"{'J':>3}  {'E':<15} {'iterations':>10}  {'condition':<13} converged")
    for row in table.rows:
        print(
            f"{row.J:>3}  {_fmt(row.E):<15} {row.iterations:>10}  "
            f"{_fmt(row.condition):<13} {'yes' if row.converged else 'no'}"
        )
    orders = table.empirical_orders()
    if orders:
        print("empirical orders: " + " ".join(_fmt(v) for v in orders))
    failed = [row for row in table.rows if not row.converged]
    for row in failed:
        print(f"J={row.J} did not converge: {row.message}", file=sys.stderr)
    return 2 if failed else 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        request = _build_request(args)
        if request.sweep:
            return _run_sweep(request)
        return _run_single(request)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ProblemValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
