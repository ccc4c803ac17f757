# Copyright 2026 refractlib developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""
Command-line front end.

    refractlib eval --config run.cfg
    refractlib table 1 --format json
    refractlib verify --config grid.cfg --paths 100000 --workers 8
    refractlib sweep --config sweep.cfg --out sweep.csv
    refractlib identities

Exit codes: 0 success, 1 verification or identity failure, 2 invalid input, 3 numerical failure.
"""

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple

from .config_node import ConfigNode
from .config_parser import ConfigParser, ConfigParserError
from .formatters import format_csv, format_errors, format_json
from .identities import run_identities
from .levy_model import RefractedModel
from .monte_carlo import Functional, simulate_functional
from .parisian_ruin import (
    ParisianQuery, RuinMethod, RuinResult, classical_ruin_u, classical_ruin_x, classical_ruin_y,
    exit_up_before_parisian, first_passage_up_u, overshoot_laplace_y, parisian_laplace,
    parisian_laplace_to_barrier, parisian_ruin_prob, tau_up_within_r
)
from .reference_tables import check_table, discrepancies, reference_table
from .refract_errors import NumericError, UnsupportedOperationError, ValidationError
from .run_spec import Command, GridPoint, Quantity, RunSpec, build_run_spec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

# A verification passes when this share of points is within Z_PASS standard errors and none beyond Z_HARD.
Z_PASS = 3.0
Z_HARD = 5.0
PASS_FRACTION = 0.95

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

# Monte Carlo counterpart of each quantity.
MC_FUNCTIONALS: Dict[Quantity, Functional] = {
    Quantity.PARISIAN: Functional.PARISIAN,
    Quantity.LAPLACE_BARRIER: Functional.DISCOUNTED_PARISIAN,
    Quantity.LAPLACE: Functional.DISCOUNTED_PARISIAN,
    Quantity.EXIT_UP: Functional.EXIT_BEFORE_PARISIAN,
    Quantity.FIRST_PASSAGE_UP: Functional.FIRST_PASSAGE_UP,
    Quantity.OVERSHOOT: Functional.OVERSHOOT_EXP,
    Quantity.TAU_UP: Functional.FIRST_PASSAGE_WITHIN_R,
}

COMMAND_NAMES: Dict[str, Command] = {command.name.lower(): command for command in Command}


def _query(spec: RunSpec, point: GridPoint, barrier: bool = True) -> ParisianQuery:
    return ParisianQuery(point.rm, point.x, point.r, spec.q, spec.a if barrier else math.inf)


def _check_range(spec: RunSpec, point: GridPoint, value: float) -> None:
    upper = 1.0
    if spec.quantity in (Quantity.LAPLACE, Quantity.LAPLACE_BARRIER):
        upper = math.exp(spec.q * point.r)

    if not 0.0 <= value <= upper:
        raise NumericError(
            f"{spec.quantity.name.lower()} fell outside [0, {upper:g}]", {"value": value, "x": point.x}
        )


def evaluate_point(spec: RunSpec, point: GridPoint) -> RuinResult:
    """
    Compute the configured quantity at one grid point.

    Raises:
        ValidationError: If the point does not fit the quantity.
        NumericError: If the value is out of range or a numerical step fails.
    """
    quantity = spec.quantity
    rm = point.rm
    if quantity == Quantity.PARISIAN:
        result = parisian_ruin_prob(_query(spec, point, barrier=False))

    elif quantity == Quantity.LAPLACE_BARRIER:
        result = parisian_laplace_to_barrier(_query(spec, point))

    elif quantity == Quantity.LAPLACE:
        result = parisian_laplace(_query(spec, point, barrier=False))

    elif quantity == Quantity.EXIT_UP:
        result = exit_up_before_parisian(_query(spec, point))

    elif quantity == Quantity.CLASSICAL_X:
        result = RuinResult(classical_ruin_x(rm.x_model, point.x), RuinMethod.CLOSED_FORM)

    elif quantity == Quantity.CLASSICAL_Y:
        result = RuinResult(classical_ruin_y(rm, point.x), RuinMethod.CLOSED_FORM)

    elif quantity == Quantity.CLASSICAL_U:
        result = RuinResult(classical_ruin_u(rm, point.x), RuinMethod.CLOSED_FORM)

    elif quantity == Quantity.FIRST_PASSAGE_UP:
        result = RuinResult(first_passage_up_u(rm, point.x, spec.b, spec.q), RuinMethod.CLOSED_FORM)

    elif quantity == Quantity.OVERSHOOT:
        result = RuinResult(overshoot_laplace_y(rm, point.x, spec.theta), RuinMethod.CLOSED_FORM)

    else:
        result = RuinResult(tau_up_within_r(rm.x_model, point.x, point.r), RuinMethod.QUADRATURE)

    _check_range(spec, point, result.value)
    return result


def _evaluate_task(task: Tuple[RunSpec, GridPoint]) -> RuinResult:
    return evaluate_point(*task)


def _evaluate_grid(spec: RunSpec, points: List[GridPoint]) -> List[RuinResult]:
    """Evaluate grid points, in parallel when more than one worker is configured; results keep grid order."""
    tasks = [(spec, point) for point in points]
    if spec.mc.workers == 1 or len(tasks) < 2:
        return [_evaluate_task(task) for task in tasks]

    with ProcessPoolExecutor(max_workers=spec.mc.workers) as executor:
        return list(executor.map(_evaluate_task, tasks))


def _point_parameters(spec: RunSpec, point: GridPoint) -> Dict[str, Any]:
    return {"x": point.x, "r": point.r, "delta": point.rm.delta, "q": spec.q}


def cmd_eval(spec: RunSpec, args: argparse.Namespace) -> Tuple[str, int]:
    """Evaluate a single query; JSON unless CSV is asked for."""
    point = spec.grid()[0]
    result = evaluate_point(spec, point)
    if spec.output_format == "csv":
        header = ["x", "r", "delta", "q", "value", "method"]
        row = [point.x, point.r, point.rm.delta, spec.q, result.value, result.method.name.lower()]
        return format_csv(header, [row]), EXIT_OK

    document = result.to_dict()
    document["parameters"] = spec.to_dict()
    document["parameters"].update(_point_parameters(spec, point))
    return format_json(document), EXIT_OK


def cmd_sweep(spec: RunSpec, args: argparse.Namespace) -> Tuple[str, int]:
    """Evaluate the Cartesian product of the grid as long-format rows."""
    points = spec.grid()
    results = _evaluate_grid(spec, points)
    if spec.output_format == "json":
        rows = []
        for point, result in zip(points, results):
            row = _point_parameters(spec, point)
            row.update(result.to_dict())
            rows.append(row)

        return format_json({"quantity": spec.quantity.name.lower(), "points": rows}), EXIT_OK

    header = ["x", "r", "delta", "q", "value", "method"]
    rows_out = [
        [point.x, point.r, point.rm.delta, spec.q, result.value, result.method.name.lower()]
        for point, result in zip(points, results)
    ]
    return format_csv(header, rows_out), EXIT_OK


def cmd_table(spec: RunSpec, args: argparse.Namespace) -> Tuple[str, int]:
    """
    Recompute a published table next to its printed values.

    With simulation settings (--paths or an Mc: section) doubtful cells are also simulated; the
    run fails when the recomputed values disagree with their simulations.  Cells that miss their
    printed value, or that the simulation rejects, are listed as discrepancies.
    """
    table = reference_table(spec.table)
    checks = check_table(spec.table, spec.mc if spec.mc_requested else None)
    rows = []
    for check in checks:
        rows.append({
            "x": check.cell.x,
            table.column_name: check.cell.column,
            "r_used": check.cell.r,
            "value": check.value,
            "reference": check.cell.reference,
            "relative_deviation": check.deviation,
            "mc": check.mc.value if check.mc is not None else None,
            "stderr": check.mc.stderr if check.mc is not None else None,
            "z_formula": check.z_formula,
            "z_printed": check.z_printed,
            "note": check.note,
        })

    reported = discrepancies(checks)
    for check in reported:
        logger.info("table %d, x=%g, %s=%g: %s", spec.table, check.cell.x, table.column_name, check.cell.column,
                    check.note)

    passed = verification_passed([check.z_formula for check in checks if check.z_formula is not None])
    exit_code = EXIT_OK if passed else EXIT_FAILURE
    if spec.output_format == "json":
        document = table.to_dict()
        if spec.mc_requested:
            document["mc"] = spec.mc.to_dict()

        document["passed"] = passed
        document["cells"] = rows
        document["discrepancies"] = [
            {
                "x": check.cell.x,
                table.column_name: check.cell.column,
                "relative_deviation": check.deviation,
                "note": check.note,
            }
            for check in reported
        ]
        return format_json(document), exit_code

    header = [
        "x", table.column_name, "r_used", "value", "reference", "relative_deviation", "mc", "stderr", "z_formula",
        "z_printed", "note"
    ]
    return format_csv(header, [[row[key] for key in header] for row in rows]), exit_code


def _z_score(formula: float, estimate: float, stderr: float) -> float:
    if stderr > 0:
        return (formula - estimate) / stderr

    return 0.0 if formula == estimate else math.inf


def verification_passed(z_scores: List[float]) -> bool:
    """True when at least 95% of points are within 3 standard errors and none beyond 5."""
    if not z_scores:
        return True

    within = sum(1 for z in z_scores if abs(z) <= Z_PASS)
    return within >= PASS_FRACTION * len(z_scores) and all(abs(z) <= Z_HARD for z in z_scores)


def cmd_verify(spec: RunSpec, args: argparse.Namespace) -> Tuple[str, int]:
    """Compare formula values with Monte Carlo estimates point by point."""
    if spec.quantity not in MC_FUNCTIONALS:
        raise ValidationError(
            f"quantity '{spec.quantity.name.lower()}' has no Monte Carlo counterpart", "quantity",
            spec.quantity.name.lower()
        )

    functional = MC_FUNCTIONALS[spec.quantity]
    scale = getattr(args, "formula_scale", 1.0)
    rows = []
    z_scores = []
    for point in spec.grid():
        formula = evaluate_point(spec, point).value * scale
        r = point.r if point.r is not None else 1.0
        barrier = spec.a if spec.quantity in (Quantity.LAPLACE_BARRIER, Quantity.EXIT_UP) else math.inf
        query = ParisianQuery(point.rm, point.x, r, spec.q, barrier)
        estimate = simulate_functional(query, functional, spec.mc, level=spec.b, theta=spec.theta)
        z = _z_score(formula, estimate.value, estimate.stderr)
        z_scores.append(z)
        note = "" if point.rm.x_model.has_bounded_variation else f"euler step {spec.mc.resolved_step(r):.3g}"
        if estimate.truncation_note:
            note = "; ".join(item for item in (note, f"{estimate.truncated} paths truncated") if item)

        rows.append({
            "x": point.x,
            "r": point.r,
            "delta": point.rm.delta,
            "q": spec.q,
            "formula": formula,
            "mc": estimate.value,
            "stderr": estimate.stderr,
            "z": z,
            "note": note,
        })

    passed = verification_passed(z_scores)
    logger.info("verification %s over %d points", "passed" if passed else "failed", len(rows))
    exit_code = EXIT_OK if passed else EXIT_FAILURE
    if spec.output_format == "json":
        document = {"quantity": spec.quantity.name.lower(), "mc": spec.mc.to_dict(), "passed": passed, "points": rows}
        return format_json(document), exit_code

    header = ["x", "r", "delta", "q", "formula", "mc", "stderr", "z", "note"]
    return format_csv(header, [[row[key] for key in header] for row in rows]), exit_code


def cmd_identities(spec: RunSpec, args: argparse.Namespace) -> Tuple[str, int]:
    """Run the identity audit suite on the configured model, or on the default models."""
    models: Optional[List[RefractedModel]] = None
    if spec.x_model is not None:
        models = [RefractedModel(spec.x_model, delta) for delta in spec.deltas]

    checks = run_identities(models)
    passed = all(check.passed for check in checks)
    exit_code = EXIT_OK if passed else EXIT_FAILURE
    if spec.output_format == "json":
        return format_json({"passed": passed, "checks": [check.to_dict() for check in checks]}), exit_code

    header = ["name", "parameters", "residual", "tolerance", "passed"]
    rows = [
        [
            check.name,
            ";".join(f"{key}={value:g}" for key, value in check.parameters.items()),
            check.residual,
            check.tolerance,
            check.passed,
        ]
        for check in checks
    ]
    return format_csv(header, rows), exit_code


COMMANDS: Dict[Command, Callable[[RunSpec, argparse.Namespace], Tuple[str, int]]] = {
    Command.EVAL: cmd_eval,
    Command.TABLE: cmd_table,
    Command.VERIFY: cmd_verify,
    Command.SWEEP: cmd_sweep,
    Command.IDENTITIES: cmd_identities,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Run configuration document")
    common.add_argument("--out", help="Output file (default: standard output)")
    common.add_argument("--format", choices=["csv", "json"], help="Output format")
    common.add_argument("--seed", type=int, help="Monte Carlo seed (unsigned 64-bit)")
    common.add_argument("--paths", type=int, help="Number of Monte Carlo paths")
    common.add_argument("--workers", type=int, help="Number of worker processes")
    common.add_argument(
        "--search-path", action="append", default=[],
        help="Directory searched for included configuration files (repeatable)"
    )
    common.add_argument(
        "--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: WARNING)"
    )

    parser = argparse.ArgumentParser(
        prog="refractlib",
        description="Parisian ruin probabilities for refracted Levy risk processes"
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("eval", parents=[common], help="Evaluate one query")
    table = commands.add_parser("table", parents=[common], help="Recompute a published table")
    table.add_argument("number", type=int, choices=[1, 2, 3, 4], help="Table number")
    verify = commands.add_parser("verify", parents=[common], help="Check formulas against Monte Carlo")
    verify.add_argument("--formula-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    commands.add_parser("sweep", parents=[common], help="Evaluate a parameter grid")
    commands.add_parser("identities", parents=[common], help="Run the identity audit suite")
    return parser


def _read_config(args: argparse.Namespace) -> Optional[ConfigNode]:
    if not args.config:
        return None

    parser = ConfigParser()
    return parser.parse_file(args.config, args.search_path)


def _write_error(error: Dict[str, Any]) -> None:
    sys.stderr.write(json.dumps(error) + "\n")


def _write_output(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return

    with open(path, "w", encoding="utf-8") as file:
        file.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the command line.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None.

    Returns:
        The process exit code.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT, stream=sys.stderr)

    command = COMMAND_NAMES[args.command]
    overrides = {
        "paths": args.paths,
        "seed": args.seed,
        "workers": args.workers,
        "format": args.format,
        "out": args.out,
        "table": getattr(args, "number", None),
    }

    try:
        spec = build_run_spec(command, _read_config(args), overrides)
        text, exit_code = COMMANDS[command](spec, args)
        _write_output(text, spec.output_path)
        return exit_code

    except ConfigParserError as e:
        logger.info("configuration errors:\n%s", format_errors(e.errors).rstrip("\n"))
        _write_error({
            "error": "ConfigParserError",
            "message": str(e),
            "errors": [
                {"message": error.message, "filename": error.filename, "line": error.line, "column": error.column}
                for error in e.errors
            ],
        })
        return EXIT_VALIDATION

    except (ValidationError, UnsupportedOperationError) as e:
        _write_error(e.to_dict())
        return EXIT_VALIDATION

    except NumericError as e:
        _write_error(e.to_dict())
        return EXIT_NUMERIC

    except OSError as e:
        _write_error({"error": type(e).__name__, "message": str(e)})
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
