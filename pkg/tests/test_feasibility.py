import functools
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import minimal_doc
from interplan import SchedulePlan, validate_instance
from interplan.feasibility import (
    Candidate,
    batch_violation_counts,
    check_central,
    check_gmax,
    check_gmin,
    check_plan,
    penalty_rank,
    row_feasible,
)
from interplan.synthetic import random_instance, random_plans


def single_type(T, g_min, g_max, **extra):
    doc = minimal_doc(g_min=g_min, g_max=g_max, **extra)
    doc["horizon"] = T
    return validate_instance(doc)


def test_gmin_examples(demo):
    v = check_gmin(demo, SchedulePlan.from_steps(demo, {"I2": [3, 4]}))
    assert [(x.type_id, x.window) for x in v] == [("I2", (3, 4))]
    assert check_gmin(demo, SchedulePlan.from_steps(demo, {"I2": [3, 5]})) == []
    assert check_gmin(demo, SchedulePlan.empty(demo)) == []


def test_gmax_examples():
    inst = single_type(6, 1, 3)
    assert check_gmax(inst, SchedulePlan.from_steps(inst, {"A": [3, 6]})) == []
    v = check_gmax(inst, SchedulePlan.from_steps(inst, {"A": [3]}))
    assert [x.window for x in v] == [(4, 6)]
    short = single_type(2, 1, 5)
    assert check_gmax(short, SchedulePlan.empty(short)) == []


def test_gmin_longer_than_horizon():
    inst = single_type(2, 3, 4)
    assert check_gmin(inst, SchedulePlan.from_steps(inst, {"A": [2]})) == []
    assert len(check_gmin(inst, SchedulePlan.from_steps(inst, {"A": [1, 2]}))) == 1


def test_central_examples(demo):
    fixed = [1, 4, 7, 10, 13, 16]
    assert check_central(demo, SchedulePlan.from_steps(demo, {"I7": fixed})) == []
    extra = check_central(demo, SchedulePlan.from_steps(demo, {"I7": fixed + [2]}))
    assert [(v.kind, v.step) for v in extra] == [("central", 2)]
    missing = check_central(demo, SchedulePlan.from_steps(demo, {"I7": [t for t in fixed if t != 10]}))
    assert [(v.kind, v.step) for v in missing] == [("central", 10)]


def test_report_json(demo):
    report = check_plan(demo, SchedulePlan.from_steps(demo, {"I2": [3, 4]}))
    d = report.to_dict()
    assert d["count"] == report.count == len(d["items"])
    assert not d["feasible"]
    assert {"type_id": "I2", "kind": "gmin", "window": [3, 4]} in d["items"]


@pytest.mark.parametrize(
    "a, b, expected",
    [(Candidate(100, 0), Candidate(50, 1), -1),
     (Candidate(80, 0), Candidate(90, 0), -1),
     (Candidate(10, 3), Candidate(99, 2), 1),
     (Candidate(10, 2), Candidate(20, 2), -1),
     (Candidate(10, 0, b"\x00\x01"), Candidate(10, 0, b"\x01\x00"), -1),
     (Candidate(10, 0, b"\x01"), Candidate(10, 0, b"\x01"), 0)],
)
def test_penalty_rank(a, b, expected):
    assert penalty_rank(a, b) == expected
    assert penalty_rank(b, a) == -expected


candidates = st.builds(Candidate, st.integers(0, 50), st.integers(0, 3), st.binary(max_size=2))


@given(a=candidates, b=candidates, c=candidates)
def test_penalty_rank_total_order(a, b, c):
    assert penalty_rank(a, b) == -penalty_rank(b, a)
    if penalty_rank(a, b) <= 0 and penalty_rank(b, c) <= 0:
        assert penalty_rank(a, c) <= 0
    if penalty_rank(a, b) == 0:
        assert a == b


@pytest.mark.parametrize("T", range(1, 11))
def test_window_and_gap_formulations_agree_exhaustively(T):
    for g_min in range(1, 6):
        for g_max in range(g_min, 7):
            inst = single_type(T, g_min, g_max)
            for bits in itertools.product((0, 1), repeat=T):
                m = np.array([bits], dtype=np.uint8)
                steps = [t + 1 for t, b in enumerate(bits) if b]
                assert check_plan(inst, m).feasible == row_feasible(steps, g_min, g_max, T), \
                    (T, g_min, g_max, steps)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_batch_counts_match_scalar(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, central_prob=0.0)
    plans = random_plans(inst, 8, rng)
    counts = batch_violation_counts(inst, plans)
    for m, c in zip(plans, counts):
        assert c == check_plan(inst, m).count
