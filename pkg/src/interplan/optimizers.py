"""Exact enumeration for small instances and a multi-restart integer GA.

Both solvers vary only the rows of non-central types; central rows are
fixed to their expanded schedule before every evaluation.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from interplan.costs import CostBreakdown, batch_totals, total_cost
from interplan.feasibility import batch_violation_counts, is_feasible, window_sums
from interplan.instance import ProblemInstance, SchedulePlan, format_money
from interplan.schedulers import central_matrix, individual_program

log = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 24
THREADS_ENV = "INTERPLAN_THREADS"


class OracleTooLargeError(ValueError):
    pass


class NoFeasiblePlanError(RuntimeError):
    def __init__(self, violation_counts: Sequence[int]):
        self.violation_counts = list(violation_counts)
        super().__init__(
            "no feasible plan found in any restart; best violation counts per restart: "
            + ", ".join(map(str, self.violation_counts))
        )


@dataclass(frozen=True)
class GaParams:
    population_size: int = 200
    max_generations: int = 500
    stall_generations: int = 50
    crossover_rate: float = 0.8
    mutation_rate_per_bit: float | None = None  # None -> 1 / genome length
    restarts: int = 50
    base_seed: int = 0
    regen_rate: float = 0.5

    def __post_init__(self):
        for name in ("population_size", "max_generations", "stall_generations", "restarts"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError(f"crossover_rate must lie in [0, 1], got {self.crossover_rate}")
        if self.mutation_rate_per_bit is not None and not 0.0 <= self.mutation_rate_per_bit <= 1.0:
            raise ValueError(f"mutation_rate_per_bit must lie in [0, 1], got {self.mutation_rate_per_bit}")
        if not 0.0 <= self.regen_rate <= 1.0:
            raise ValueError(f"regen_rate must lie in [0, 1], got {self.regen_rate}")
        if not isinstance(self.base_seed, int) or not 0 <= self.base_seed < 2**64:
            raise ValueError(f"base_seed must be a 64-bit unsigned integer, got {self.base_seed!r}")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "GaParams":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown GA parameter(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class RestartResult:
    seed: int
    plan: np.ndarray  # full K x T matrix
    total: int
    violations: int
    generations: int

    @property
    def feasible(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "best_total": format_money(self.total),
            "feasible": self.feasible,
            "violations": self.violations,
            "generations": self.generations,
        }


@dataclass
class SolverReport:
    method: str
    best_plan: SchedulePlan
    best_cost: CostBreakdown
    unique_plans: list[tuple[SchedulePlan, int]]
    per_restart: list[RestartResult] = field(default_factory=list)
    wall_time: float = 0.0
    params: dict[str, Any] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, instance: ProblemInstance, include_timing: bool = False) -> dict[str, Any]:
        """JSON-ready form. Timing is left out by default so equal runs serialise identically."""
        d: dict[str, Any] = {
            "method": self.method,
            "horizon": instance.T,
            "params": self.params,
            "best_plan": self.best_plan.to_steps(instance),
            "best_cost": self.best_cost.to_dict(),
            "unique_plans": [
                {"total": format_money(total), "plan": plan.to_steps(instance)}
                for plan, total in self.unique_plans
            ],
            "per_restart": [r.to_dict() for r in self.per_restart],
        }
        if self.per_restart:
            d["spread"] = dedup_and_spread(self.per_restart).to_dict()
        d["metadata"] = self.metadata
        if include_timing:
            d["wall_time_s"] = round(self.wall_time, 3)
        return d


def _report_metadata(instance: ProblemInstance) -> dict[str, Any]:
    meta: dict[str, Any] = {"instance": instance.name} if instance.name else {}
    if instance.reference:
        # values published for this case but not reproducible as stated
        meta["reference_values"] = dict(instance.reference)
        meta["reference_values"]["reproduced"] = False
    return meta


def _assemble(instance: ProblemInstance, free: np.ndarray) -> np.ndarray:
    """Insert free rows (..., F, T) into full plans (..., K, T) with central rows fixed."""
    fixed = central_matrix(instance)
    full = np.broadcast_to(fixed, free.shape[:-2] + fixed.shape).copy()
    full[..., instance.free_rows, :] = free
    return full


# -------------------------------------------------------------- exhaustive

def feasible_rows(g_min: int, g_max: int, horizon: int, chunk: int = 1 << 16) -> np.ndarray:
    """All binary rows of length ``horizon`` meeting both window constraints."""
    keep = []
    weights = 1 << np.arange(horizon - 1, -1, -1, dtype=np.int64)
    w_min = min(g_min, horizon)
    for lo in range(0, 1 << horizon, chunk):
        codes = np.arange(lo, min(lo + chunk, 1 << horizon), dtype=np.int64)
        rows = ((codes[:, None] & weights) > 0).astype(np.uint8)
        ok = (window_sums(rows, w_min) <= 1).all(axis=1)
        if g_max <= horizon:
            ok &= (window_sums(rows, g_max) >= 1).all(axis=1)
        keep.append(rows[ok])
    return np.concatenate(keep)


def solve_exhaustive(
    instance: ProblemInstance, cap: int = DEFAULT_ORACLE_CAP, chunk: int = 50_000
) -> SolverReport:
    """Exact minimum by enumerating every assignment of the non-central rows.

    Rows are filtered one at a time (the spacing constraints are per-row)
    and the product of the surviving rows is then costed in chunks.
    Returns every equal-cost optimum, sorted by plan bits.
    """
    free_rows = instance.free_rows
    n_bits = len(free_rows) * instance.T
    if n_bits > cap:
        raise OracleTooLargeError(
            f"instance too large for oracle: {n_bits} free bits exceed the cap of {cap}"
        )
    start = time.perf_counter()
    T = instance.T
    options = [
        feasible_rows(instance.intervention_types[k].g_min, instance.intervention_types[k].g_max, T)
        for k in free_rows
    ]
    sizes = [len(o) for o in options]
    n_combos = int(np.prod(sizes, dtype=np.int64)) if sizes else 1

    best_total = None
    best_plans: list[np.ndarray] = []
    for lo in range(0, n_combos, chunk):
        idx = np.arange(lo, min(lo + chunk, n_combos), dtype=np.int64)
        free = np.empty((len(idx), len(free_rows), T), dtype=np.uint8)
        rem = idx
        for f in range(len(free_rows) - 1, -1, -1):
            rem, pick = np.divmod(rem, sizes[f])
            free[:, f, :] = options[f][pick]
        full = _assemble(instance, free)
        totals = batch_totals(instance, full)
        low = int(totals.min())
        if best_total is None or low < best_total:
            best_total, best_plans = low, []
        if low == best_total:
            best_plans.extend(full[totals == low])

    plans = sorted((SchedulePlan(p) for p in best_plans), key=SchedulePlan.bits)
    report = SolverReport(
        method="exhaustive",
        best_plan=plans[0],
        best_cost=total_cost(instance, plans[0]),
        unique_plans=[(p, best_total) for p in plans],
        wall_time=time.perf_counter() - start,
        params={"cap": cap, "free_bits": n_bits, "enumerated": n_combos},
        metadata=_report_metadata(instance),
    )
    assert report.best_cost.total == best_total
    return report


# ---------------------------------------------------------------------- GA

def random_feasible_row(g_min: int, g_max: int, horizon: int, rng: np.random.Generator) -> np.ndarray:
    """Random row satisfying both spacing constraints by construction.

    First run in ``1..min(g_max, T)``, then gaps drawn from ``[g_min, g_max]``
    until the horizon is passed.
    """
    row = np.zeros(horizon, dtype=np.uint8)
    t = int(rng.integers(1, min(g_max, horizon) + 1))
    while t <= horizon:
        row[t - 1] = 1
        t += int(rng.integers(g_min, g_max + 1))
    return row


def initial_population(instance: ProblemInstance, size: int, rng: np.random.Generator) -> np.ndarray:
    """(size, F, T) genomes: one third around the baseline, one third random
    feasible spacing, the rest uniform random bits.

    Slot 0 is always the unmodified individual baseline. The other baseline
    slots each swap one free row for a random feasible row.
    """
    free_rows = instance.free_rows
    F, T = len(free_rows), instance.T
    types = [instance.intervention_types[k] for k in free_rows]
    base = individual_program(instance).matrix[free_rows]
    pop = np.empty((size, F, T), dtype=np.uint8)

    n_base = max(1, size // 3)
    n_feas = size // 3
    pop[:n_base] = base
    for i in range(1, n_base):
        if F:
            f = int(rng.integers(F))
            pop[i, f] = random_feasible_row(types[f].g_min, types[f].g_max, T, rng)
    for i in range(n_base, n_base + n_feas):
        for f, typ in enumerate(types):
            pop[i, f] = random_feasible_row(typ.g_min, typ.g_max, T, rng)
    n_rand = size - n_base - n_feas
    pop[n_base + n_feas:] = rng.integers(0, 2, size=(n_rand, F, T), dtype=np.uint8)
    return pop


def _rank(genomes: np.ndarray, totals: np.ndarray, violations: np.ndarray) -> np.ndarray:
    """Position of each individual in the feasibility-first total order (0 = best)."""
    packed = np.packbits(genomes.reshape(len(genomes), -1), axis=1)
    infeasible = (violations > 0).astype(np.int64)
    keys = [packed[:, c] for c in range(packed.shape[1] - 1, -1, -1)]
    keys += [totals, violations * infeasible, infeasible]
    order = np.lexsort(keys)
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.arange(len(order))
    return rank


def _evaluate(instance: ProblemInstance, genomes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    full = _assemble(instance, genomes)
    return batch_totals(instance, full), batch_violation_counts(instance, full)


def _regenerate_tails(
    genomes: np.ndarray, spacing: Sequence[tuple[int, int]], rate: float, rng: np.random.Generator
) -> None:
    """Redraw the tail of one row per selected genome, in place.

    Each genome is selected with probability ``rate``. A random cut step is
    drawn; runs before it are kept and later runs are re-drawn with gaps in
    ``[g_min, g_max]``. A feasible row stays feasible, which single bit
    flips almost never achieve.
    """
    n, F, T = genomes.shape
    if F == 0:
        return
    for i in np.flatnonzero(rng.random(n) < rate):
        f = int(rng.integers(F))
        g_min, g_max = spacing[f]
        row = genomes[i, f]
        cut = int(rng.integers(T))
        kept = np.flatnonzero(row[:cut])
        row[cut:] = 0
        if len(kept):
            t = int(kept[-1]) + 1 + int(rng.integers(g_min, g_max + 1))
        else:
            row[:] = 0
            t = int(rng.integers(1, min(g_max, T) + 1))
        while t <= T:
            row[t - 1] = 1
            t += int(rng.integers(g_min, g_max + 1))


def run_restart(instance: ProblemInstance, params: GaParams, seed: int) -> RestartResult:
    """One GA run from its own seeded population.

    Binary tournaments on the penalty ranking, uniform crossover that takes
    each type's row whole from one parent or the other, per-bit flip
    mutation plus tail regeneration, and an elite of one.
    """
    rng = np.random.default_rng(seed)
    P = params.population_size
    F, T = len(instance.free_rows), instance.T
    n_genes = F * T
    mut = params.mutation_rate_per_bit
    if mut is None:
        mut = 1.0 / max(n_genes, 1)

    spacing = [(instance.intervention_types[k].g_min, instance.intervention_types[k].g_max)
               for k in instance.free_rows]
    pop = initial_population(instance, P, rng)
    totals, viols = _evaluate(instance, pop)

    def score(i: int) -> tuple[int, int, int]:
        v = int(viols[i])
        return (int(v > 0), v, int(totals[i]))

    rank = _rank(pop, totals, viols)
    best_i = int(np.argmin(rank))
    best_score = score(best_i)
    stall = 0
    gen = 0
    n_pairs = (P - 1 + 1) // 2
    while gen < params.max_generations and stall < params.stall_generations:
        gen += 1
        elite = pop[best_i].copy()

        a = rng.integers(P, size=2 * n_pairs)
        b = rng.integers(P, size=2 * n_pairs)
        parents = np.where(rank[a] < rank[b], a, b)
        p1, p2 = pop[parents[0::2]], pop[parents[1::2]]

        cross = rng.random(n_pairs) < params.crossover_rate
        take = (rng.random((n_pairs, F, 1)) < 0.5) & cross[:, None, None]
        c1 = np.where(take, p2, p1)
        c2 = np.where(take, p1, p2)
        children = np.concatenate([c1, c2])[: P - 1]
        flips = rng.random(children.shape) < mut
        children ^= flips.astype(np.uint8)
        _regenerate_tails(children, spacing, params.regen_rate, rng)

        pop = np.concatenate([elite[None], children])
        totals, viols = _evaluate(instance, pop)
        rank = _rank(pop, totals, viols)
        best_i = int(np.argmin(rank))
        s = score(best_i)
        if s < best_score:
            best_score, stall = s, 0
        else:
            stall += 1

    full = _assemble(instance, pop[best_i])
    return RestartResult(
        seed=seed,
        plan=full,
        total=int(totals[best_i]),
        violations=int(viols[best_i]),
        generations=gen,
    )


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be positive, got {n}")
        return n
    return os.cpu_count() or 1


def merge_restarts(results: Sequence[RestartResult]) -> list[tuple[SchedulePlan, int]]:
    """Feasible restart bests, deduplicated by bit pattern, sorted by cost then bits."""
    seen: dict[bytes, tuple[SchedulePlan, int]] = {}
    for r in results:
        if r.feasible:
            plan = SchedulePlan(r.plan)
            seen.setdefault(plan.bits(), (plan, r.total))
    return sorted(seen.values(), key=lambda pt: (pt[1], pt[0].bits()))


def solve_ga(
    instance: ProblemInstance, params: GaParams | None = None, threads: int | None = None
) -> SolverReport:
    """Best-known plan over ``params.restarts`` independent GA runs.

    Restart ``r`` is seeded with ``base_seed + r``; results are merged in
    restart order, so the report does not depend on ``threads``.
    """
    params = params or GaParams()
    threads = threads or thread_count()
    start = time.perf_counter()
    seeds = [params.base_seed + r for r in range(params.restarts)]
    if threads == 1 or params.restarts == 1:
        results = [run_restart(instance, params, s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: run_restart(instance, params, s), seeds))

    unique = merge_restarts(results)
    if not unique:
        raise NoFeasiblePlanError([r.violations for r in results])
    best_plan, best_total = unique[0]
    best_cost = total_cost(instance, best_plan)
    assert best_cost.total == best_total and is_feasible(instance, best_plan)
    wall = time.perf_counter() - start
    log.info("GA: %d restarts, best %s, %d unique, %.2fs",
             params.restarts, format_money(best_total), len(unique), wall)
    return SolverReport(
        method="ga",
        best_plan=best_plan,
        best_cost=best_cost,
        unique_plans=unique,
        per_restart=results,
        wall_time=wall,
        params=params.to_dict(),
        metadata=_report_metadata(instance),
    )


@dataclass(frozen=True)
class Spread:
    unique_count: int
    best_total: Fraction
    worst_total: Fraction
    fraction: Fraction

    def to_dict(self) -> dict[str, Any]:
        return {
            "unique_count": self.unique_count,
            "best_total": _fmt_fraction(self.best_total),
            "worst_restart_best_total": _fmt_fraction(self.worst_total),
            "spread": _fmt_fraction(self.fraction, places=6),
        }


def _fmt_fraction(x: Fraction, places: int = 1) -> str:
    from decimal import ROUND_HALF_UP, Decimal

    q = Decimal(x.numerator) / Decimal(x.denominator)
    return str(q.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP).normalize())


def cost_spread(best, worst) -> Fraction:
    """``(worst - best) / best`` as an exact fraction."""
    best, worst = Fraction(best), Fraction(worst)
    if best == 0:
        return Fraction(0)
    return (worst - best) / best


def dedup_and_spread(results: Sequence[RestartResult]) -> Spread:
    """Distinct feasible restart bests and the gap between best and worst of them.

    Totals are reported in money units (tenths are converted back).
    """
    if not results:
        raise ValueError("need at least one restart result")
    feasible = [r for r in results if r.feasible] or list(results)
    unique = {r.plan.tobytes() for r in feasible}
    best = Fraction(min(r.total for r in feasible), 10)
    worst = Fraction(max(r.total for r in feasible), 10)
    return Spread(len(unique), best, worst, cost_spread(best, worst))
