"""Minimum-cost intervention programs for interdependent infrastructure networks."""

from interplan.instance import (
    CentralSpec,
    InstanceFormatError,
    InstanceValidationError,
    InterventionType,
    NetworkObject,
    Operator,
    ProblemInstance,
    SchedulePlan,
    build_interaction_matrix,
    format_money,
    instance_violations,
    load_instance,
    load_demo_instance,
    parse_money,
    validate_instance,
)

__version__ = "0.1.0"
