"""Plan files, individual-vs-optimal comparison tables and extra-cost redistribution."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from interplan.costs import CostBreakdown, OperatorCost, total_cost
from interplan.feasibility import check_plan
from interplan.instance import (
    InstanceFormatError,
    ProblemInstance,
    SchedulePlan,
    format_money,
    money_decimal,
)


class InfeasiblePlanError(ValueError):
    def __init__(self, label: str, report):
        self.report = report
        kinds = ", ".join(f"{v.type_id}:{v.kind}" for v in report.items[:10])
        more = "" if report.count <= 10 else f", ... ({report.count} total)"
        super().__init__(f"{label} plan is infeasible: {kinds}{more}")


# ------------------------------------------------------------------ plan files

_INT_LIST = re.compile(r"\[\s*(-?\d+(?:,\s*-?\d+)*)\s*\]")


def dumps(payload: Any) -> str:
    """Indented JSON with integer lists kept on one line."""
    text = json.dumps(payload, indent=2)
    return _INT_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]", text) + "\n"


def plan_to_dict(instance: ProblemInstance, plan: SchedulePlan) -> dict[str, Any]:
    return {"horizon": instance.T, "interventions": plan.to_steps(instance)}


def plan_from_dict(instance: ProblemInstance, doc: Any) -> SchedulePlan:
    """Parse a sparse plan document; raises ``InstanceFormatError`` on schema problems.

    A solver report is accepted too, in which case its best plan is used.
    """
    if isinstance(doc, Mapping) and "best_plan" in doc and "interventions" not in doc:
        doc = {"horizon": doc.get("horizon"), "interventions": doc["best_plan"]}
    if not isinstance(doc, Mapping) or "horizon" not in doc or "interventions" not in doc:
        raise InstanceFormatError("plan file must be an object with 'horizon' and 'interventions'")
    if doc["horizon"] != instance.T:
        raise InstanceFormatError(f"plan horizon {doc['horizon']} does not match instance T={instance.T}")
    steps = doc["interventions"]
    if not isinstance(steps, Mapping):
        raise InstanceFormatError("'interventions' must map type ids to lists of steps")
    known = {t.id for t in instance.intervention_types}
    for type_id, ts in steps.items():
        if type_id not in known:
            raise InstanceFormatError(f"plan names unknown intervention type '{type_id}'")
        if not isinstance(ts, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in ts):
            raise InstanceFormatError(f"{type_id}: steps must be a list of integers")
    try:
        return SchedulePlan.from_steps(instance, steps)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None


def save_plan(instance: ProblemInstance, plan: SchedulePlan, path: str | Path) -> None:
    Path(path).write_text(dumps(plan_to_dict(instance, plan)), encoding="utf-8")


def load_plan(instance: ProblemInstance, path: str | Path) -> SchedulePlan:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON ({exc})") from None
    return plan_from_dict(instance, doc)


# ------------------------------------------------------------------ comparison

def _ratio_text(ratio: Fraction | None) -> str:
    if ratio is None:
        return "n/a"
    q = Decimal(ratio.numerator) / Decimal(ratio.denominator)
    return str(q.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    kind: str  # "intervention", "unavailability" or "total"
    operator: str | None
    individual: int  # tenths
    optimal: int

    @property
    def ratio(self) -> Fraction | None:
        if self.individual == 0:
            return None
        return Fraction(self.optimal, self.individual)

    @property
    def difference(self) -> int:
        return self.optimal - self.individual

    def to_dict(self) -> dict[str, Any]:
        diff = format_money(self.difference)
        return {
            "label": self.label,
            "kind": self.kind,
            "operator": self.operator,
            "individual": format_money(self.individual),
            "optimal": format_money(self.optimal),
            "ratio": _ratio_text(self.ratio),
            "difference": diff if self.difference <= 0 else "+" + diff,
        }


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]

    def row(self, kind: str, operator: str | None = None) -> ComparisonRow:
        for r in self.rows:
            if r.kind == kind and r.operator == operator:
                return r
        raise KeyError((kind, operator))

    def operators(self) -> list[str]:
        return [r.operator for r in self.rows if r.kind == "intervention" and r.operator is not None]

    def to_dict(self) -> dict[str, Any]:
        return {"rows": [r.to_dict() for r in self.rows]}

    def to_markdown(self) -> str:
        lines = [
            "| | Individual | Optimal | Ratio optimal/individual | Difference |",
            "|---|---:|---:|---:|---:|",
        ]
        for r in self.rows:
            d = r.to_dict()
            lines.append(f"| {r.label} | {d['individual']} | {d['optimal']} | {d['ratio']} | {d['difference']} |")
        return "\n".join(lines) + "\n"


def compare_breakdowns(individual: CostBreakdown, optimal: CostBreakdown) -> ComparisonTable:
    """Per-operator and total rows for intervention and unavailability costs."""
    ops = list(individual.per_operator) + [o for o in optimal.per_operator if o not in individual.per_operator]
    zero = OperatorCost()
    rows: list[ComparisonRow] = []
    for op in ops:
        a, b = individual.per_operator.get(op, zero), optimal.per_operator.get(op, zero)
        rows.append(ComparisonRow(f"Operator {op}", "intervention", op, a.intervention_cost, b.intervention_cost))
    rows.append(ComparisonRow("Total intervention cost", "intervention", None, individual.f1, optimal.f1))
    for op in ops:
        a, b = individual.per_operator.get(op, zero), optimal.per_operator.get(op, zero)
        rows.append(ComparisonRow(f"Operator {op}", "unavailability", op, a.unavailability_cost, b.unavailability_cost))
    rows.append(ComparisonRow("Total service unavailability cost", "unavailability", None, individual.f2, optimal.f2))
    rows.append(ComparisonRow("Total cost (intervention + service unavailability)", "total", None,
                              individual.total, optimal.total))
    return ComparisonTable(tuple(rows))


def compare(instance: ProblemInstance, baseline_plan: SchedulePlan, optimal_plan: SchedulePlan) -> ComparisonTable:
    for label, plan in (("baseline", baseline_plan), ("optimal", optimal_plan)):
        report = check_plan(instance, plan)
        if not report.feasible:
            raise InfeasiblePlanError(label, report)
    return compare_breakdowns(total_cost(instance, baseline_plan), total_cost(instance, optimal_plan))


def redistribute_extra_cost(table: ComparisonTable) -> dict[str, Decimal]:
    """Share the extra intervention cost of the optimal program among operators.

    Each operator carries a part of the increase proportional to what it
    would pay under its individual program. Shares are rounded to three
    decimals; the rounding remainder goes to the operator with the largest
    individual share so the shares add up to the increase exactly.
    """
    ops = table.operators()
    total = table.row("intervention")
    delta = total.difference
    if delta <= 0:
        return {op: Decimal("0.000") for op in ops}
    if total.individual == 0:
        raise ValueError("cannot redistribute: total individual intervention cost is zero")

    quantum = Decimal("0.001")
    delta_money = money_decimal(delta)
    shares: dict[str, Decimal] = {}
    for op in ops:
        exact = Fraction(delta, 10) * Fraction(table.row("intervention", op).individual, total.individual)
        shares[op] = (Decimal(exact.numerator) / Decimal(exact.denominator)).quantize(quantum, ROUND_HALF_UP)
    largest = max(ops, key=lambda op: table.row("intervention", op).individual)
    shares[largest] += delta_money - sum(shares.values())
    return shares
