"""Check reports and the exception types shared across modules."""
from dataclasses import dataclass, field
from typing import Any


class DimensionError(ValueError):
    """Operands live on different sample spaces (or have the wrong length)."""


class PreconditionError(ValueError):
    """An operation was called on input outside its domain."""


@dataclass
class CheckReport:
    """Outcome of one verification.

    ``max_violation`` is the largest amount by which the checked relation
    failed (0.0 or negative means it held everywhere); ``worst`` locates it.
    """

    name: str
    passed: bool
    max_violation: float = 0.0
    worst: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        where = ", ".join(f"{k}={v}" for k, v in self.worst.items())
        text = f"[{status}] {self.name}: worst slack {self.max_violation:.3e}"
        return f"{text} ({where})" if where else text


def merge(name: str, reports, **detail: Any) -> CheckReport:
    """Combine reports; the result fails if any part fails and keeps the worst violation.

    The parts stay available as ``detail["reports"]``.
    """
    reports = list(reports)
    if not reports:
        return CheckReport(name, True, 0.0, {}, dict(detail, vacuous=True))
    worst = max(reports, key=lambda r: r.max_violation)
    return CheckReport(
        name,
        all(r.passed for r in reports),
        worst.max_violation,
        dict(worst.worst, part=worst.name),
        dict(detail, parts=len(reports), reports=reports),
    )
