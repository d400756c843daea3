"""Objective evaluation: direct intervention cost, clustered unavailability cost,
per-operator attribution and cumulative series.

All amounts are integer tenths (see :mod:`interplan.instance`).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from interplan.instance import ProblemInstance, SchedulePlan, as_matrix, format_money


@dataclass(frozen=True)
class OperatorCost:
    intervention_cost: int = 0
    unavailability_cost: int = 0

    @property
    def total(self) -> int:
        return self.intervention_cost + self.unavailability_cost


@dataclass(frozen=True)
class CostBreakdown:
    f1: int
    f2: int
    per_operator: dict[str, OperatorCost] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.f1 + self.f2

    def to_dict(self) -> dict:
        return {
            "f1": format_money(self.f1),
            "f2": format_money(self.f2),
            "total": format_money(self.total),
            "per_operator": {
                op: {
                    "intervention_cost": format_money(c.intervention_cost),
                    "unavailability_cost": format_money(c.unavailability_cost),
                }
                for op, c in self.per_operator.items()
            },
        }


def _step_index(instance: ProblemInstance, t: int) -> int:
    if not 1 <= t <= instance.T:
        raise ValueError(f"time step {t} outside 1..{instance.T}")
    return t - 1


def affected_mask(instance: ProblemInstance, plan) -> np.ndarray:
    """N x T boolean matrix: object j is out of service at step t."""
    m = as_matrix(plan, instance).astype(np.int64)
    targeted = instance.relation.astype(np.int64) @ m
    return (instance.interaction.T.astype(np.int64) @ targeted) > 0


def affected_objects(instance: ProblemInstance, plan, t: int) -> set[str]:
    """Ids of objects out of service at step ``t`` (1-based).

    These are the objects targeted by some type running at ``t`` plus every
    object a targeted object affects.
    """
    col = affected_mask(instance, plan)[:, _step_index(instance, t)]
    return {instance.objects[j].id for j in np.flatnonzero(col)}


def intervention_cost_f1(instance: ProblemInstance, plan) -> int:
    m = as_matrix(plan, instance)
    return int(instance.type_costs @ m.sum(axis=1, dtype=np.int64))


def unavailability_cost_f2(instance: ProblemInstance, plan) -> int:
    # each affected object is charged once per step, however many types hit it
    return int(instance.object_costs @ affected_mask(instance, plan).sum(axis=1, dtype=np.int64))


def total_cost(instance: ProblemInstance, plan) -> CostBreakdown:
    """f1, f2 and their attribution to operators.

    An execution's cost is split equally between the type's responsible
    operators (validation guarantees the share is a whole number of tenths).
    An affected object's unavailability cost is charged to its owner.
    """
    m = as_matrix(plan, instance)
    runs = m.sum(axis=1, dtype=np.int64)
    hits = affected_mask(instance, plan).sum(axis=1, dtype=np.int64)

    inter = {op.id: 0 for op in instance.operators}
    unav = {op.id: 0 for op in instance.operators}
    for k, typ in enumerate(instance.intervention_types):
        share = typ.cost // len(typ.responsible)
        for op in typ.responsible:
            inter[op] += share * int(runs[k])
    for j, obj in enumerate(instance.objects):
        unav[obj.owner] += obj.unavailability_cost * int(hits[j])

    per_op = {op.id: OperatorCost(inter[op.id], unav[op.id]) for op in instance.operators}
    return CostBreakdown(
        f1=int(instance.type_costs @ runs),
        f2=int(instance.object_costs @ hits),
        per_operator=per_op,
    )


@dataclass(frozen=True)
class CumulativeSeries:
    f1_cum: np.ndarray
    f2_cum: np.ndarray

    @property
    def total_cum(self) -> np.ndarray:
        return self.f1_cum + self.f2_cum

    def __len__(self) -> int:
        return len(self.f1_cum)

    def rows(self) -> list[tuple[int, str, str, str]]:
        return [
            (t + 1, format_money(a), format_money(b), format_money(a + b))
            for t, (a, b) in enumerate(zip(self.f1_cum.tolist(), self.f2_cum.tolist()))
        ]

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "f1_cum", "f2_cum", "total_cum"])
        writer.writerows(self.rows())
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def cumulative_series(instance: ProblemInstance, plan) -> CumulativeSeries:
    m = as_matrix(plan, instance)
    f1_step = instance.type_costs @ m.astype(np.int64)
    f2_step = instance.object_costs @ affected_mask(instance, plan).astype(np.int64)
    return CumulativeSeries(np.cumsum(f1_step), np.cumsum(f2_step))


def batch_totals(instance: ProblemInstance, plans: np.ndarray) -> np.ndarray:
    """Total cost (tenths) of a stack of plans with shape (P, K, T).

    Vectorised form used by the optimizers. ``reach`` folds the interaction
    and relation matrices into one N x K incidence so each plan needs a
    single product.
    """
    plans = np.asarray(plans)
    reach = instance.reach.astype(np.float64)
    runs = plans.sum(axis=2, dtype=np.int64)
    f1 = runs @ instance.type_costs
    # counts are small integers, exact in float64; BLAS beats int matmul here
    hit = np.matmul(reach, plans.astype(np.float64)) > 0.5
    f2 = hit.sum(axis=2, dtype=np.int64) @ instance.object_costs
    return f1 + f2
