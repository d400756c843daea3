import copy
import json

import pytest

from interplan import load_demo_instance
from interplan.instance import demo_instance_path


@pytest.fixture(scope="session")
def demo():
    return load_demo_instance()


@pytest.fixture
def demo_doc():
    return json.loads(demo_instance_path().read_text())


def minimal_doc(**type_overrides):
    typ = {"id": "A", "targets": ["o"], "cost": "1", "g_min": 1, "g_max": 1, "responsible": ["op"]}
    typ.update(type_overrides)
    return {
        "horizon": 3,
        "operators": [{"id": "op", "name": "Operator"}],
        "objects": [{"id": "o", "unavailability_cost": "10", "owner": "op", "affects": []}],
        "intervention_types": [typ],
    }


@pytest.fixture
def minimal():
    return copy.deepcopy(minimal_doc())


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
