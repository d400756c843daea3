import json
from decimal import Decimal

import pytest

from interplan import InstanceFormatError, SchedulePlan, parse_money
from interplan.costs import CostBreakdown, OperatorCost
from interplan.reporting import (
    InfeasiblePlanError,
    compare,
    compare_breakdowns,
    dumps,
    load_plan,
    plan_from_dict,
    redistribute_extra_cost,
    save_plan,
)
from interplan.schedulers import individual_program


def breakdown(per_op):
    ops = {op: OperatorCost(parse_money(a), parse_money(b)) for op, (a, b) in per_op.items()}
    return CostBreakdown(
        f1=sum(c.intervention_cost for c in ops.values()),
        f2=sum(c.unavailability_cost for c in ops.values()),
        per_operator=ops,
    )


PUBLISHED_INDIVIDUAL = breakdown({"W": ("36", "480"), "H": ("37.5", "572.5"), "R": ("16.5", "442.5")})
PUBLISHED_OPTIMAL = breakdown({"W": ("36", "367.5"), "H": ("47", "435"), "R": ("19.5", "322.5")})


def test_published_table_rendering():
    table = compare_breakdowns(PUBLISHED_INDIVIDUAL, PUBLISHED_OPTIMAL)
    rows = {(r["kind"], r["operator"]): r for r in table.to_dict()["rows"]}
    expected = {
        ("intervention", "W"): ("36", "36", "1.00", "0"),
        ("intervention", "H"): ("37.5", "47", "1.25", "+9.5"),
        ("intervention", "R"): ("16.5", "19.5", "1.18", "+3"),
        ("intervention", None): ("90", "102.5", "1.14", "+12.5"),
        ("unavailability", "W"): ("480", "367.5", "0.77", "-112.5"),
        ("unavailability", "H"): ("572.5", "435", "0.76", "-137.5"),
        ("unavailability", "R"): ("442.5", "322.5", "0.73", "-120"),
        ("unavailability", None): ("1495", "1125", "0.75", "-370"),
        ("total", None): ("1585", "1227.5", "0.77", "-357.5"),
    }
    for key, (ind, opt, ratio, diff) in expected.items():
        r = rows[key]
        assert (r["individual"], r["optimal"], r["ratio"], r["difference"]) == (ind, opt, ratio, diff), key
    md = table.to_markdown()
    assert "| Total cost (intervention + service unavailability) | 1585 | 1227.5 | 0.77 | -357.5 |" in md


def test_redistribution_published():
    table = compare_breakdowns(PUBLISHED_INDIVIDUAL, PUBLISHED_OPTIMAL)
    shares = redistribute_extra_cost(table)
    assert shares == {"W": Decimal("5.000"), "H": Decimal("5.208"), "R": Decimal("2.292")}
    assert sum(shares.values()) == Decimal("12.5")


def test_redistribution_zero_and_single():
    table = compare_breakdowns(PUBLISHED_INDIVIDUAL, PUBLISHED_INDIVIDUAL)
    assert set(redistribute_extra_cost(table).values()) == {Decimal(0)}
    solo = compare_breakdowns(breakdown({"A": ("10", "0")}), breakdown({"A": ("13.3", "0")}))
    assert redistribute_extra_cost(solo) == {"A": Decimal("3.3")}


def test_redistribution_remainder_to_largest():
    table = compare_breakdowns(breakdown({"A": ("1", "0"), "B": ("1", "0"), "C": ("1", "0")}),
                               breakdown({"A": ("1.1", "0"), "B": ("1", "0"), "C": ("1", "0")}))
    shares = redistribute_extra_cost(table)
    assert sum(shares.values()) == Decimal("0.1")
    assert all(v >= 0 for v in shares.values())


def test_redistribution_no_individual_cost():
    table = compare_breakdowns(breakdown({"A": ("0", "0")}), breakdown({"A": ("1", "0")}))
    with pytest.raises(ValueError):
        redistribute_extra_cost(table)


def test_ratio_undefined():
    table = compare_breakdowns(breakdown({"A": ("0", "5")}), breakdown({"A": ("0", "5")}))
    assert table.row("intervention", "A").to_dict()["ratio"] == "n/a"


def test_compare_identity(demo):
    base = individual_program(demo)
    table = compare(demo, base, base)
    for r in table.rows:
        assert r.difference == 0
        assert r.to_dict()["ratio"] in ("1.00", "n/a")
    assert table.row("intervention", "W").individual == 360


def test_compare_rejects_infeasible(demo):
    with pytest.raises(InfeasiblePlanError, match="optimal plan is infeasible"):
        compare(demo, individual_program(demo), SchedulePlan.empty(demo))


def test_plan_file_round_trip(tmp_path, demo):
    path = tmp_path / "plan.json"
    plan = individual_program(demo)
    save_plan(demo, plan, path)
    assert load_plan(demo, path) == plan
    doc = json.loads(path.read_text())
    assert doc["horizon"] == 18
    assert doc["interventions"]["I7"] == [1, 4, 7, 10, 13, 16]
    assert '"I7": [1, 4, 7, 10, 13, 16]' in path.read_text()


@pytest.mark.parametrize(
    "doc",
    [{"interventions": {}}, {"horizon": 17, "interventions": {}},
     {"horizon": 18, "interventions": {"I9": [1]}}, {"horizon": 18, "interventions": {"I1": [0]}},
     {"horizon": 18, "interventions": {"I1": "1,2"}}],
)
def test_plan_schema_errors(demo, doc):
    with pytest.raises(InstanceFormatError):
        plan_from_dict(demo, doc)


def test_solver_report_loads_as_its_best_plan(demo, tmp_path):
    from interplan.optimizers import GaParams, solve_ga

    report = solve_ga(demo, GaParams(restarts=1, max_generations=5, population_size=20))
    path = tmp_path / "report.json"
    path.write_text(dumps(report.to_dict(demo)))
    assert load_plan(demo, path) == report.best_plan
