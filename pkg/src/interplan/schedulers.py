"""Reference schedules: fixed rows of central types and the individual baseline."""

from __future__ import annotations

import numpy as np

from interplan.instance import CentralSpec, InterventionType, ProblemInstance, SchedulePlan


def expand_central(spec: CentralSpec, horizon: int) -> list[int]:
    """Steps ``start, start + interval, ...`` that fall within ``1..horizon``."""
    if spec.interval < 1:
        raise ValueError(f"central interval must be positive, got {spec.interval}")
    if not 1 <= spec.start <= horizon:
        raise ValueError(f"central start {spec.start} outside 1..{horizon}")
    return list(range(spec.start, horizon + 1, spec.interval))


def individual_steps(typ: InterventionType, horizon: int) -> list[int]:
    """Steps a single type runs at when planned in isolation.

    Central types keep their fixed schedule. Other types run every ``g_max``
    steps starting at ``g_max``: the fewest executions that keep every
    ``g_max`` window covered.
    """
    if typ.central is not None:
        return expand_central(typ.central, horizon)
    return list(range(typ.g_max, horizon + 1, typ.g_max))


def individual_program(instance: ProblemInstance) -> SchedulePlan:
    m = np.zeros((instance.K, instance.T), dtype=np.uint8)
    for k, typ in enumerate(instance.intervention_types):
        for t in individual_steps(typ, instance.T):
            m[k, t - 1] = 1
    return SchedulePlan(m)


def central_matrix(instance: ProblemInstance) -> np.ndarray:
    """K x T matrix holding only the fixed rows of central types."""
    m = np.zeros((instance.K, instance.T), dtype=np.uint8)
    for k in instance.central_rows:
        for t in expand_central(instance.intervention_types[k].central, instance.T):
            m[k, t - 1] = 1
    return m
