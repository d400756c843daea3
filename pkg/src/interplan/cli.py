"""Command-line entry point: ``interplan <command> ...``.

Exit status is 0 on success, 1 for domain errors (invalid instance,
infeasible plan, solver failure) and 2 for usage errors, unreadable files
and schema mismatches.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from interplan.costs import cumulative_series
from interplan.feasibility import check_plan
from interplan.instance import (
    InstanceFormatError,
    InstanceValidationError,
    instance_violations,
    load_instance,
)
from interplan.optimizers import (
    DEFAULT_ORACLE_CAP,
    GaParams,
    NoFeasiblePlanError,
    OracleTooLargeError,
    solve_exhaustive,
    solve_ga,
)
from interplan.reporting import (
    InfeasiblePlanError,
    compare,
    dumps,
    load_plan,
    redistribute_extra_cost,
    save_plan,
)
from interplan.schedulers import individual_program

log = logging.getLogger("interplan")


class UsageError(Exception):
    pass


def _write_json(path: str, payload: Any) -> None:
    Path(path).write_text(dumps(payload), encoding="utf-8")


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON ({exc})") from None


def cmd_validate(args) -> int:
    errs = instance_violations(_read_json(args.instance))
    if errs:
        for e in errs:
            print(e)
        return 1
    inst = load_instance(args.instance)
    print(f"valid: {inst.N} objects, {inst.K} intervention types, T={inst.T}")
    return 0


def cmd_baseline(args) -> int:
    inst = load_instance(args.instance)
    save_plan(inst, individual_program(inst), args.output)
    return 0


def _ga_params(args) -> GaParams:
    fields: dict[str, Any] = {}
    if args.params:
        doc = _read_json(args.params)
        if not isinstance(doc, dict):
            raise InstanceFormatError(f"{args.params}: params file must be a JSON object")
        fields.update(doc)
    overrides = {
        "restarts": args.restarts,
        "base_seed": args.seed,
        "population_size": args.population,
        "max_generations": args.generations,
        "stall_generations": args.stall,
        "crossover_rate": args.crossover_rate,
        "mutation_rate_per_bit": args.mutation_rate,
        "regen_rate": args.regen_rate,
    }
    fields.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return GaParams.from_dict(fields)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid GA parameters: {exc}") from None


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    params = _ga_params(args)
    report = solve_ga(inst, params)
    _write_json(args.output, report.to_dict(inst))
    if args.series:
        cumulative_series(inst, report.best_plan).to_csv(args.series)
    print(f"best total {report.to_dict(inst)['best_cost']['total']} "
          f"({len(report.unique_plans)} unique plans) in {report.wall_time:.1f}s", file=sys.stderr)
    return 0


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    report = solve_exhaustive(inst, cap=args.cap)
    _write_json(args.output, report.to_dict(inst))
    if args.series:
        cumulative_series(inst, report.best_plan).to_csv(args.series)
    return 0


def cmd_compare(args) -> int:
    inst = load_instance(args.instance)
    table = compare(inst, load_plan(inst, args.baseline_plan), load_plan(inst, args.optimal_plan))
    payload = table.to_dict()
    payload["redistribution"] = {op: str(v) for op, v in redistribute_extra_cost(table).items()}
    _write_json(args.output, payload)
    if args.markdown:
        Path(args.markdown).write_text(table.to_markdown(), encoding="utf-8")
    return 0


def cmd_validate_plan(args) -> int:
    inst = load_instance(args.instance)
    report = check_plan(inst, load_plan(inst, args.plan))
    print(report.to_json())
    return 0 if report.feasible else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interplan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("baseline", help="write the individual program as a plan file")
    p.add_argument("instance")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("solve", help="multi-restart genetic algorithm")
    p.add_argument("instance")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--params", help="JSON file of GA parameters; flags override it")
    p.add_argument("--population", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--stall", type=int)
    p.add_argument("--crossover-rate", type=float)
    p.add_argument("--mutation-rate", type=float)
    p.add_argument("--regen-rate", type=float)
    p.add_argument("--series", help="write the best plan's cumulative costs as CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact enumeration for small instances")
    p.add_argument("instance")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_ORACLE_CAP)
    p.add_argument("--series")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="individual vs optimal cost table")
    p.add_argument("instance")
    p.add_argument("baseline_plan")
    p.add_argument("optimal_plan")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--markdown")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate-plan", help="list constraint violations of a plan")
    p.add_argument("instance")
    p.add_argument("plan")
    p.set_defaults(func=cmd_validate_plan)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, InstanceFormatError, UsageError) as exc:
        print(f"interplan: error: {exc}", file=sys.stderr)
        return 2
    except (InstanceValidationError, InfeasiblePlanError, OracleTooLargeError,
            NoFeasiblePlanError, ValueError) as exc:
        print(f"interplan: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
