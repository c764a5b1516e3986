"""Step-size schedules and the summation bounds built on them."""

from .models import (
    IdentityCheck,
    ScheduleKind,
    StepConditionReport,
    StepSchedule,
    SumBoundCheck,
    TailSum,
)
from .schedule import (
    tail_sum_sq,
    validate_A5,
    validate_A6,
    weighted_sum_bounds,
    weighted_sum_identity,
)

__all__ = [
    # Models
    "IdentityCheck",
    "ScheduleKind",
    "StepConditionReport",
    "StepSchedule",
    "SumBoundCheck",
    "TailSum",
    # Operations
    "tail_sum_sq",
    "validate_A5",
    "validate_A6",
    "weighted_sum_bounds",
    "weighted_sum_identity",
]
