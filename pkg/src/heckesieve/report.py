"""Pass/fail records produced by every ``verify_*`` sweep."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one identity or inequality sweep.

    ``passed`` is derived, never stored: it is true exactly when
    ``max_abs_error <= tolerance``. Trend checks express their band
    violations as a non-negative error with tolerance 0.
    """

    check_name: str
    range_tested: str
    max_abs_error: float
    worst_case: Any
    tolerance: float
    details: dict[str, Any] = field(default_factory=dict, compare=False)
    input_precision: float | None = None

    @property
    def passed(self) -> bool:
        return bool(self.max_abs_error <= self.tolerance)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.check_name}: {self.range_tested}; "
            f"max_abs_error={self.max_abs_error:.3e} (tol {self.tolerance:.1e}) "
            f"worst_case={self.worst_case}"
        )

    def render(self) -> str:
        lines = [self.summary()]
        if self.input_precision is not None:
            lines.append(f"    input_precision = {self.input_precision:.3e}")
        for key, value in self.details.items():
            lines.append(f"    {key} = {_fmt(value)}")
        return "\n".join(lines)


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_fmt(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def band_violation(value: float, lo: float, hi: float) -> float:
    """Distance from ``value`` to the closed interval ``[lo, hi]``."""
    if value < lo:
        return lo - value
    if value > hi:
        return value - hi
    return 0.0
