"""Spacing constraints, central-schedule conformance and candidate ranking."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from interplan.instance import ProblemInstance, as_matrix
from interplan.schedulers import expand_central


@dataclass(frozen=True)
class Violation:
    type_id: str
    kind: Literal["gmin", "gmax", "central"]
    window: tuple[int, int] | None = None  # inclusive, 1-based
    step: int | None = None


@dataclass(frozen=True)
class ViolationReport:
    items: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def count(self) -> int:
        return len(self.items)

    @property
    def feasible(self) -> bool:
        return not self.items

    def to_dict(self) -> dict:
        items = []
        for v in self.items:
            d = {k: val for k, val in asdict(v).items() if val is not None}
            if "window" in d:
                d["window"] = list(d["window"])
            items.append(d)
        return {"feasible": self.feasible, "count": self.count, "items": items}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def window_sums(row: np.ndarray, width: int) -> np.ndarray:
    """Sums over ``row[t:t+width]`` for every window that fits; last axis is time."""
    csum = np.concatenate(
        [np.zeros(row.shape[:-1] + (1,), dtype=np.int64), np.cumsum(row, axis=-1, dtype=np.int64)],
        axis=-1,
    )
    return csum[..., width:] - csum[..., :-width]


def _gmin_width(g_min: int, horizon: int) -> int:
    # with g_min > T the whole horizon acts as one window: at most one run
    return min(g_min, horizon)


def check_gmin(instance: ProblemInstance, plan) -> list[Violation]:
    """Every ``g_min``-long window holds at most one execution of each type."""
    m = as_matrix(plan, instance)
    out = []
    for k, typ in enumerate(instance.intervention_types):
        w = _gmin_width(typ.g_min, instance.T)
        for t in np.flatnonzero(window_sums(m[k], w) > 1):
            out.append(Violation(typ.id, "gmin", window=(int(t) + 1, int(t) + w)))
    return out


def check_gmax(instance: ProblemInstance, plan) -> list[Violation]:
    """Every ``g_max``-long window holds at least one execution of each type.

    When ``T < g_max`` no window fits and the constraint is vacuous.
    """
    m = as_matrix(plan, instance)
    out = []
    for k, typ in enumerate(instance.intervention_types):
        if typ.g_max > instance.T:
            continue
        for t in np.flatnonzero(window_sums(m[k], typ.g_max) == 0):
            out.append(Violation(typ.id, "gmax", window=(int(t) + 1, int(t) + typ.g_max)))
    return out


def check_central(instance: ProblemInstance, plan) -> list[Violation]:
    """Central rows must match their fixed schedule; one violation per differing step."""
    m = as_matrix(plan, instance)
    out = []
    for k in instance.central_rows:
        typ = instance.intervention_types[k]
        expected = np.zeros(instance.T, dtype=np.uint8)
        expected[np.array(expand_central(typ.central, instance.T)) - 1] = 1
        for t in np.flatnonzero(m[k] != expected):
            out.append(Violation(typ.id, "central", step=int(t) + 1))
    return out


def check_plan(instance: ProblemInstance, plan) -> ViolationReport:
    return ViolationReport(
        tuple(check_gmin(instance, plan) + check_gmax(instance, plan) + check_central(instance, plan))
    )


def is_feasible(instance: ProblemInstance, plan) -> bool:
    return check_plan(instance, plan).feasible


def batch_violation_counts(instance: ProblemInstance, plans: np.ndarray) -> np.ndarray:
    """Spacing violation counts for a stack of plans shaped (P, K, T).

    Central conformance is not counted; the optimizers never vary those rows.
    """
    plans = np.asarray(plans)
    counts = np.zeros(plans.shape[0], dtype=np.int64)
    for k, typ in enumerate(instance.intervention_types):
        row = plans[:, k, :]
        counts += (window_sums(row, _gmin_width(typ.g_min, instance.T)) > 1).sum(axis=1)
        if typ.g_max <= instance.T:
            counts += (window_sums(row, typ.g_max) == 0).sum(axis=1)
    return counts


def row_feasible(steps: list[int], g_min: int, g_max: int, horizon: int) -> bool:
    """Gap-based test for one row, independent of the window formulation.

    Consecutive runs must be between ``g_min`` and ``g_max`` apart; when
    ``horizon >= g_max`` the first run must come by ``g_max`` and the last
    after ``horizon - g_max``.
    """
    steps = sorted(steps)
    for a, b in zip(steps, steps[1:]):
        if not g_min <= b - a <= g_max:
            return False
    if horizon >= g_max:
        if not steps or steps[0] > g_max or steps[-1] <= horizon - g_max:
            return False
    return True


@dataclass(frozen=True)
class Candidate:
    total: int
    violations: int
    bits: bytes = b""

    @property
    def feasible(self) -> bool:
        return self.violations == 0


def penalty_key(total: int, violations: int, bits: bytes = b"") -> tuple:
    """Sort key realising the feasibility-first ordering (smaller is better)."""
    if violations == 0:
        return (0, 0, total, bits)
    return (1, violations, total, bits)


def penalty_rank(a: Candidate, b: Candidate) -> int:
    """-1 if ``a`` beats ``b``, 1 if ``b`` beats ``a``, 0 if indistinguishable.

    Feasible beats infeasible; feasible pairs compare by cost; infeasible
    pairs by violation count, then cost. Plan bits break remaining ties.
    """
    ka = penalty_key(a.total, a.violations, a.bits)
    kb = penalty_key(b.total, b.violations, b.bits)
    return (ka > kb) - (ka < kb)
