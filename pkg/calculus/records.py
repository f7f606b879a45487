"""
Structured check records shared by the verification entry points.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List


@dataclass(frozen=True)
class CheckRecord:
    """
    Outcome of one numerical check.

    Attributes:
        check_id: Dotted identifier of the property, e.g. ``bundle.cocycle``
        location: Where it was evaluated (chart pair, point, level pair, ...)
        residual: Measured deviation
        tolerance: Threshold the residual was compared against
        passed: Whether the property holds at this location
        detail: Optional short explanation, used for failures
    """

    check_id: str
    location: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    @classmethod
    def below(cls, check_id: str, location: str, residual: float, tolerance: float,
              detail: str = "") -> "CheckRecord":
        """Record that passes when ``residual <= tolerance``."""
        residual = float(residual)
        return cls(check_id, location, residual, float(tolerance),
                   bool(math.isfinite(residual) and residual <= tolerance), detail)

    @classmethod
    def above(cls, check_id: str, location: str, residual: float, threshold: float,
              detail: str = "") -> "CheckRecord":
        """Record that passes when ``residual > threshold`` (expected-failure witnesses)."""
        residual = float(residual)
        return cls(check_id, location, residual, float(threshold), bool(residual > threshold), detail)

    def to_dict(self) -> Dict:
        return {
            "check": self.check_id,
            "location": self.location,
            "residual": _json_float(self.residual),
            "tolerance": self.tolerance,
            "status": "pass" if self.passed else "fail",
            "detail": self.detail,
        }


def _json_float(value: float):
    # JSON has no inf/nan literals
    return value if math.isfinite(value) else str(value)


@dataclass
class CheckReport:
    """Ordered collection of check records; passes iff every record passes."""

    records: List[CheckRecord] = field(default_factory=list)

    def add(self, record: CheckRecord) -> CheckRecord:
        self.records.append(record)
        return record

    def extend(self, records: Iterable[CheckRecord]) -> None:
        self.records.extend(records)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def violations(self) -> List[CheckRecord]:
        return [r for r in self.records if not r.passed]

    @property
    def worst_residual(self) -> float:
        return max((r.residual for r in self.records), default=0.0)

    def sorted_records(self) -> List[CheckRecord]:
        return sorted(self.records, key=lambda r: (r.check_id, r.location))
