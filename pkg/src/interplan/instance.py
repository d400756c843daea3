"""Domain types, validation and the JSON instance format.

Money is held as integer tenths of the file's monetary unit so that cost
comparisons, attribution and plan deduplication are exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

TENTHS = 10


class InstanceFormatError(ValueError):
    """The document does not have the structure of an instance file."""


class InstanceValidationError(ValueError):
    """Raised with every rule violation found in an instance."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid instance:\n  " + "\n  ".join(self.violations))


def parse_money(value: Any) -> int:
    """Parse a decimal string such as ``"12.5"`` into integer tenths.

    Raises ``ValueError`` for non-numeric input or more than one
    fractional digit. Ints are accepted; floats are not, since they cannot
    be trusted to carry the exact decimal the author wrote.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"money must be a decimal string, got {value!r}")
    try:
        d = Decimal(str(value).strip())
    except InvalidOperation:
        raise ValueError(f"not a decimal amount: {value!r}") from None
    if not d.is_finite():
        raise ValueError(f"not a finite amount: {value!r}")
    scaled = d * TENTHS
    if scaled != scaled.to_integral_value():
        raise ValueError(f"{value!r} has more than one fractional digit")
    return int(scaled)


def format_money(tenths: int) -> str:
    """Integer tenths back to the canonical decimal string (``125 -> "12.5"``)."""
    tenths = int(tenths)
    sign = "-" if tenths < 0 else ""
    whole, frac = divmod(abs(tenths), TENTHS)
    return f"{sign}{whole}" if frac == 0 else f"{sign}{whole}.{frac}"


def money_decimal(tenths: int) -> Decimal:
    return Decimal(int(tenths)) / TENTHS


@dataclass(frozen=True)
class Operator:
    id: str
    name: str


@dataclass(frozen=True)
class NetworkObject:
    id: str
    index: int  # 1-based, declaration order
    name: str
    unavailability_cost: int  # tenths per affected time step
    owner: str
    affects: tuple[str, ...] = ()


@dataclass(frozen=True)
class CentralSpec:
    start: int
    interval: int


@dataclass(frozen=True)
class InterventionType:
    id: str
    index: int  # 1-based, declaration order
    name: str
    targets: tuple[str, ...]
    cost: int  # tenths per execution
    g_min: int
    g_max: int
    responsible: tuple[str, ...]
    central: CentralSpec | None = None

    @property
    def is_central(self) -> bool:
        return self.central is not None


def build_interaction_matrix(objects: Sequence[NetworkObject]) -> np.ndarray:
    """N x N binary matrix with ``I[i, j] = 1`` when disrupting i disrupts j.

    The diagonal is always 1, whether or not an object lists itself.
    """
    pos = {o.id: n for n, o in enumerate(objects)}
    mat = np.eye(len(objects), dtype=np.uint8)
    for i, obj in enumerate(objects):
        for target in obj.affects:
            mat[i, pos[target]] = 1
    return mat


def build_relation_matrix(
    objects: Sequence[NetworkObject], types: Sequence[InterventionType]
) -> np.ndarray:
    """N x K binary matrix with ``R[i, k] = 1`` when type k targets object i."""
    pos = {o.id: n for n, o in enumerate(objects)}
    mat = np.zeros((len(objects), len(types)), dtype=np.uint8)
    for k, typ in enumerate(types):
        for target in typ.targets:
            mat[pos[target], k] = 1
    return mat


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    operators: tuple[Operator, ...]
    objects: tuple[NetworkObject, ...]
    intervention_types: tuple[InterventionType, ...]
    horizon: int
    interaction: np.ndarray = field(repr=False)
    relation: np.ndarray = field(repr=False)
    name: str = ""
    notes: tuple[str, ...] = ()
    reference: Mapping[str, Any] = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return len(self.objects)

    @property
    def K(self) -> int:
        return len(self.intervention_types)

    @property
    def T(self) -> int:
        return self.horizon

    @property
    def object_costs(self) -> np.ndarray:
        return np.array([o.unavailability_cost for o in self.objects], dtype=np.int64)

    @property
    def type_costs(self) -> np.ndarray:
        return np.array([k.cost for k in self.intervention_types], dtype=np.int64)

    @property
    def reach(self) -> np.ndarray:
        """N x K: object j is disrupted whenever type k executes.

        Equivalent to ``delta(I^T R)``; a plan's affected objects at step t are
        then ``delta(reach @ M[:, t])``.
        """
        return ((self.interaction.T.astype(np.int64) @ self.relation) > 0).astype(np.uint8)

    def type_index(self, type_id: str) -> int:
        """0-based row of a type in plan matrices."""
        for k, typ in enumerate(self.intervention_types):
            if typ.id == type_id:
                return k
        raise KeyError(type_id)

    def object_by_id(self, object_id: str) -> NetworkObject:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)

    @property
    def central_rows(self) -> list[int]:
        return [k for k, t in enumerate(self.intervention_types) if t.is_central]

    @property
    def free_rows(self) -> list[int]:
        return [k for k, t in enumerate(self.intervention_types) if not t.is_central]

    def with_horizon(self, horizon: int) -> "ProblemInstance":
        """Same networks and types over a different number of time steps."""
        doc = instance_to_dict(self)
        doc["horizon"] = horizon
        return validate_instance(doc)

    def to_dict(self) -> dict[str, Any]:
        return instance_to_dict(self)


# --------------------------------------------------------------------- parsing

_REQUIRED_TOP = ("horizon", "operators", "objects", "intervention_types")


def _require(doc: Mapping[str, Any], keys: Iterable[str], where: str) -> None:
    missing = [k for k in keys if k not in doc]
    if missing:
        raise InstanceFormatError(f"{where}: missing key(s) {', '.join(missing)}")


def _check_structure(raw: Any) -> None:
    if not isinstance(raw, Mapping):
        raise InstanceFormatError("instance document must be a JSON object")
    _require(raw, _REQUIRED_TOP, "instance")
    for key in ("operators", "objects", "intervention_types"):
        if not isinstance(raw[key], list):
            raise InstanceFormatError(f"instance: '{key}' must be a list")
    for n, op in enumerate(raw["operators"]):
        if not isinstance(op, Mapping):
            raise InstanceFormatError(f"operators[{n}] must be an object")
        _require(op, ("id",), f"operators[{n}]")
    for n, obj in enumerate(raw["objects"]):
        if not isinstance(obj, Mapping):
            raise InstanceFormatError(f"objects[{n}] must be an object")
        _require(obj, ("id", "unavailability_cost", "owner"), f"objects[{n}]")
        if not isinstance(obj.get("affects", []), list):
            raise InstanceFormatError(f"objects[{n}]: 'affects' must be a list")
    for n, typ in enumerate(raw["intervention_types"]):
        if not isinstance(typ, Mapping):
            raise InstanceFormatError(f"intervention_types[{n}] must be an object")
        _require(typ, ("id", "targets", "cost", "g_min", "g_max", "responsible"),
                 f"intervention_types[{n}]")
        for key in ("targets", "responsible"):
            if not isinstance(typ[key], list):
                raise InstanceFormatError(f"intervention_types[{n}]: '{key}' must be a list")
        central = typ.get("central")
        if central is not None:
            if not isinstance(central, Mapping):
                raise InstanceFormatError(f"intervention_types[{n}]: 'central' must be an object")
            _require(central, ("start", "interval"), f"intervention_types[{n}].central")


def _as_int(value: Any) -> int | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    return None


def instance_violations(raw: Mapping[str, Any]) -> list[str]:
    """Every semantic rule violated by a raw instance document.

    Raises ``InstanceFormatError`` first if the document is structurally
    unusable (missing keys, wrong container types).
    """
    _check_structure(raw)
    errs: list[str] = []

    horizon = _as_int(raw["horizon"])
    if horizon is None:
        errs.append("horizon: must be an integer")
    elif horizon < 1:
        errs.append(f"horizon: T={horizon} must be at least 1")

    op_ids: set[str] = set()
    for op in raw["operators"]:
        oid = str(op["id"])
        if oid in op_ids:
            errs.append(f"operator {oid}: duplicate id")
        op_ids.add(oid)

    obj_ids: list[str] = [str(o["id"]) for o in raw["objects"]]
    seen: set[str] = set()
    for oid in obj_ids:
        if oid in seen:
            errs.append(f"object {oid}: duplicate id")
        seen.add(oid)
    if not obj_ids:
        errs.append("objects: at least one object is required")

    for obj in raw["objects"]:
        oid = str(obj["id"])
        try:
            cost = parse_money(obj["unavailability_cost"])
            if cost < 0:
                errs.append(f"object {oid}: negative unavailability_cost {obj['unavailability_cost']}")
        except ValueError as exc:
            errs.append(f"object {oid}: unavailability_cost {exc}")
        if str(obj["owner"]) not in op_ids:
            errs.append(f"object {oid}: owner '{obj['owner']}' is not a declared operator")
        for target in obj.get("affects", []):
            if not isinstance(target, str):
                errs.append(
                    f"object {oid}: affects entry {target!r} is not an object id "
                    "(interactions are binary; weighted entries are not supported)"
                )
            elif target == oid:
                errs.append(f"object {oid}: affects lists the object itself")
            elif target not in seen:
                errs.append(f"object {oid}: affects unknown object '{target}'")

    type_ids: set[str] = set()
    for typ in raw["intervention_types"]:
        tid = str(typ["id"])
        if tid in type_ids:
            errs.append(f"intervention type {tid}: duplicate id")
        type_ids.add(tid)

        targets = typ["targets"]
        if not targets:
            errs.append(f"intervention type {tid}: empty target set")
        for target in targets:
            if str(target) not in seen:
                errs.append(f"intervention type {tid}: target '{target}' is not a declared object")

        responsible = typ["responsible"]
        if not responsible:
            errs.append(f"intervention type {tid}: no responsible operator")
        for op in responsible:
            if str(op) not in op_ids:
                errs.append(f"intervention type {tid}: responsible '{op}' is not a declared operator")
        if len(set(map(str, responsible))) != len(responsible):
            errs.append(f"intervention type {tid}: responsible operators repeated")

        cost = None
        try:
            cost = parse_money(typ["cost"])
            if cost < 0:
                errs.append(f"intervention type {tid}: negative cost {typ['cost']}")
        except ValueError as exc:
            errs.append(f"intervention type {tid}: cost {exc}")
        if cost is not None and responsible and cost % len(responsible):
            errs.append(
                f"intervention type {tid}: cost {typ['cost']} cannot be split exactly "
                f"among {len(responsible)} responsible operators at 0.1 resolution"
            )

        g_min, g_max = _as_int(typ["g_min"]), _as_int(typ["g_max"])
        if g_min is None or g_min < 1:
            errs.append(f"intervention type {tid}: g_min must be a positive integer")
        if g_max is None or g_max < 1:
            errs.append(f"intervention type {tid}: g_max must be a positive integer")
        if g_min is not None and g_max is not None and g_min > g_max:
            errs.append(
                f"intervention type {tid}: g_min exceeds g_max ({g_min} > {g_max}); "
                "no spacing can satisfy both the minimum and maximum gap"
            )

        central = typ.get("central")
        if central is not None:
            start, interval = _as_int(central["start"]), _as_int(central["interval"])
            if start is None or start < 1:
                errs.append(f"intervention type {tid}: central start must be a time step >= 1")
            if interval is None or interval < 1:
                errs.append(f"intervention type {tid}: central interval must be a positive integer")
            elif g_min is not None and g_max is not None and not g_min <= interval <= g_max:
                errs.append(
                    f"intervention type {tid}: central interval {interval} "
                    f"outside [g_min, g_max] = [{g_min}, {g_max}]"
                )
            if start is not None and horizon is not None and start > horizon:
                errs.append(f"intervention type {tid}: central start {start} beyond horizon T={horizon}")
            elif (start is not None and g_max is not None and horizon is not None
                  and horizon >= g_max and start > g_max):
                errs.append(
                    f"intervention type {tid}: central start {start} exceeds g_max={g_max}, "
                    "leaving the first window without an execution"
                )
    if not type_ids:
        errs.append("intervention_types: at least one type is required")
    return errs


def validate_instance(raw: Mapping[str, Any]) -> ProblemInstance:
    """Build a ``ProblemInstance`` from a raw document, or raise with all violations."""
    errs = instance_violations(raw)
    if errs:
        raise InstanceValidationError(errs)

    operators = tuple(Operator(str(o["id"]), str(o.get("name", o["id"]))) for o in raw["operators"])
    objects = tuple(
        NetworkObject(
            id=str(o["id"]),
            index=n + 1,
            name=str(o.get("name", o["id"])),
            unavailability_cost=parse_money(o["unavailability_cost"]),
            owner=str(o["owner"]),
            affects=tuple(str(a) for a in o.get("affects", [])),
        )
        for n, o in enumerate(raw["objects"])
    )
    types = tuple(
        InterventionType(
            id=str(t["id"]),
            index=n + 1,
            name=str(t.get("name", t["id"])),
            targets=tuple(str(x) for x in t["targets"]),
            cost=parse_money(t["cost"]),
            g_min=int(t["g_min"]),
            g_max=int(t["g_max"]),
            responsible=tuple(str(x) for x in t["responsible"]),
            central=(CentralSpec(int(t["central"]["start"]), int(t["central"]["interval"]))
                     if t.get("central") is not None else None),
        )
        for n, t in enumerate(raw["intervention_types"])
    )
    notes = raw.get("notes", ())
    if isinstance(notes, str):
        notes = (notes,)
    return ProblemInstance(
        operators=operators,
        objects=objects,
        intervention_types=types,
        horizon=int(raw["horizon"]),
        interaction=_frozen(build_interaction_matrix(objects)),
        relation=_frozen(build_relation_matrix(objects, types)),
        name=str(raw.get("name", "")),
        notes=tuple(str(n) for n in notes),
        reference=dict(raw.get("reference", {})),
    )


def instance_to_dict(instance: ProblemInstance) -> dict[str, Any]:
    doc: dict[str, Any] = {}
    if instance.name:
        doc["name"] = instance.name
    doc["horizon"] = instance.horizon
    doc["operators"] = [{"id": o.id, "name": o.name} for o in instance.operators]
    doc["objects"] = [
        {
            "id": o.id,
            "name": o.name,
            "unavailability_cost": format_money(o.unavailability_cost),
            "owner": o.owner,
            "affects": list(o.affects),
        }
        for o in instance.objects
    ]
    types = []
    for t in instance.intervention_types:
        entry: dict[str, Any] = {
            "id": t.id,
            "name": t.name,
            "targets": list(t.targets),
            "cost": format_money(t.cost),
            "g_min": t.g_min,
            "g_max": t.g_max,
            "responsible": list(t.responsible),
        }
        if t.central is not None:
            entry["central"] = {"start": t.central.start, "interval": t.central.interval}
        types.append(entry)
    doc["intervention_types"] = types
    if instance.notes:
        doc["notes"] = list(instance.notes)
    if instance.reference:
        doc["reference"] = dict(instance.reference)
    return doc


def load_instance(path: str | Path) -> ProblemInstance:
    """Read and validate an instance file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON ({exc})") from None
    return validate_instance(raw)


def dump_instance(instance: ProblemInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n", encoding="utf-8")


def demo_instance_path() -> Path:
    """Location of the bundled three-network demonstration instance (T=18)."""
    return Path(__file__).with_name("data") / "paper_t18.json"


def load_demo_instance(horizon: int | None = None) -> ProblemInstance:
    inst = load_instance(demo_instance_path())
    return inst if horizon is None else inst.with_horizon(horizon)


# ------------------------------------------------------------------- plans

class SchedulePlan:
    """K x T binary decision matrix; row k, column t-1 is set when type k runs at step t."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: Any):
        m = np.array(matrix, dtype=np.uint8)
        if m.ndim != 2:
            raise ValueError(f"plan matrix must be 2-D, got shape {m.shape}")
        if np.any(m > 1):
            raise ValueError("plan entries must be 0 or 1")
        m.flags.writeable = False
        self.matrix = m

    @classmethod
    def empty(cls, instance: ProblemInstance) -> "SchedulePlan":
        return cls(np.zeros((instance.K, instance.T), dtype=np.uint8))

    @classmethod
    def from_steps(cls, instance: ProblemInstance, steps: Mapping[str, Iterable[int]]) -> "SchedulePlan":
        """Build from ``{type_id: [1-based steps]}``; unlisted types never run."""
        m = np.zeros((instance.K, instance.T), dtype=np.uint8)
        for type_id, ts in steps.items():
            k = instance.type_index(type_id)
            for t in ts:
                if not 1 <= int(t) <= instance.T:
                    raise ValueError(f"{type_id}: step {t} outside 1..{instance.T}")
                m[k, int(t) - 1] = 1
        return cls(m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape  # type: ignore[return-value]

    def steps(self, k: int) -> list[int]:
        return [int(t) + 1 for t in np.flatnonzero(self.matrix[k])]

    def to_steps(self, instance: ProblemInstance) -> dict[str, list[int]]:
        return {typ.id: self.steps(k) for k, typ in enumerate(instance.intervention_types)}

    def bits(self) -> bytes:
        """Flattened row-major bits; the tie-break key between equal-cost plans."""
        return self.matrix.tobytes()

    def check_shape(self, instance: ProblemInstance) -> None:
        if self.matrix.shape != (instance.K, instance.T):
            raise ValueError(
                f"plan shape {self.matrix.shape} does not match instance (K={instance.K}, T={instance.T})"
            )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SchedulePlan) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash((self.matrix.shape, self.bits()))

    def __repr__(self) -> str:
        return f"SchedulePlan(shape={self.matrix.shape}, executions={int(self.matrix.sum())})"


def as_matrix(plan: SchedulePlan | np.ndarray, instance: ProblemInstance | None = None) -> np.ndarray:
    m = plan.matrix if isinstance(plan, SchedulePlan) else np.asarray(plan, dtype=np.uint8)
    if instance is not None and m.shape != (instance.K, instance.T):
        raise ValueError(f"plan shape {m.shape} does not match instance (K={instance.K}, T={instance.T})")
    return m
