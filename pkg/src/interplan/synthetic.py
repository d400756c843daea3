"""Random small instances for property tests and solver cross-checks."""

from __future__ import annotations

import numpy as np

from interplan.instance import ProblemInstance, format_money, validate_instance


def random_instance_dict(
    rng: np.random.Generator,
    n_objects: tuple[int, int] = (1, 5),
    n_free_types: tuple[int, int] = (1, 3),
    horizon: tuple[int, int] = (2, 8),
    central_prob: float = 0.3,
    interaction_prob: float = 0.3,
) -> dict:
    """Raw instance document; bounds are inclusive ``(low, high)`` pairs.

    Intervention costs are multiples of 0.6 so any split among up to three
    operators stays exact. With probability ``central_prob`` one central
    type is added on top of the free ones.
    """
    n_ops = int(rng.integers(1, 4))
    ops = [f"O{i + 1}" for i in range(n_ops)]
    N = int(rng.integers(n_objects[0], n_objects[1] + 1))
    T = int(rng.integers(horizon[0], horizon[1] + 1))
    ids = [f"X{i + 1}" for i in range(N)]
    objects = []
    for i, oid in enumerate(ids):
        affects = [ids[j] for j in range(N) if j != i and rng.random() < interaction_prob]
        objects.append({
            "id": oid,
            "unavailability_cost": format_money(int(rng.integers(0, 301))),
            "owner": ops[int(rng.integers(n_ops))],
            "affects": affects,
        })

    def make_type(idx: int, central: bool) -> dict:
        g_min = int(rng.integers(1, 4))
        g_max = int(rng.integers(g_min, g_min + 4))
        size = int(rng.integers(1, min(N, 3) + 1))
        targets = sorted(rng.choice(N, size=size, replace=False).tolist())
        n_resp = int(rng.integers(1, n_ops + 1))
        responsible = sorted(rng.choice(n_ops, size=n_resp, replace=False).tolist())
        typ = {
            "id": f"K{idx}",
            "targets": [ids[t] for t in targets],
            "cost": format_money(6 * int(rng.integers(0, 21))),
            "g_min": g_min,
            "g_max": g_max,
            "responsible": [ops[r] for r in responsible],
        }
        if central:
            interval = int(rng.integers(g_min, g_max + 1))
            start = int(rng.integers(1, min(g_max, T) + 1))
            typ["central"] = {"start": start, "interval": interval}
        return typ

    K = int(rng.integers(n_free_types[0], n_free_types[1] + 1))
    types = [make_type(k + 1, False) for k in range(K)]
    if rng.random() < central_prob:
        pos = int(rng.integers(K + 1))
        types.insert(pos, make_type(K + 1, True))
    return {
        "horizon": T,
        "operators": [{"id": o, "name": o} for o in ops],
        "objects": objects,
        "intervention_types": types,
    }


def random_instance(rng: np.random.Generator, **kwargs) -> ProblemInstance:
    return validate_instance(random_instance_dict(rng, **kwargs))


def random_plans(instance: ProblemInstance, count: int, rng: np.random.Generator, density: float = 0.4) -> np.ndarray:
    """(count, K, T) uniformly random binary plans with the given fill rate."""
    return (rng.random((count, instance.K, instance.T)) < density).astype(np.uint8)


def random_feasible_row_plan(instance: ProblemInstance, rng: np.random.Generator) -> np.ndarray:
    """K x T plan whose rows all satisfy their spacing constraints.

    Central rows get their fixed schedule; other rows a random spacing.
    """
    from interplan.optimizers import random_feasible_row
    from interplan.schedulers import central_matrix

    m = central_matrix(instance)
    for k in instance.free_rows:
        typ = instance.intervention_types[k]
        m[k] = random_feasible_row(typ.g_min, typ.g_max, instance.T, rng)
    return m
