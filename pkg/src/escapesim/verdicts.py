"""Pass/fail verdict record shared by parameter certification and trace checkers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Verdict:
    """Outcome of one machine-verifiable check.

    ``passed`` is true exactly when ``first_violation_time`` is None. Checks
    that are not time-indexed (parameter certification) report violations at
    time 0.0. ``measured_margin`` is the worst-case slack observed: positive
    margins mean the check held with room to spare, negative means by how much
    it failed.
    """

    name: str
    passed: bool
    first_violation_time: float | None = None
    measured_margin: float = float("inf")
    details: str = ""

    def __post_init__(self):
        if self.passed != (self.first_violation_time is None):
            raise ValueError("passed must match first_violation_time is None")

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "first_violation_time": self.first_violation_time,
            "measured_margin": self.measured_margin,
            "details": self.details,
        }


def combine(name: str, findings: list[tuple[float | None, float, str]]) -> Verdict:
    """Fold (violation_time, margin, note) findings into one Verdict.

    ``findings`` entries with a non-None time are violations; the earliest one
    wins. The margin reported is the minimum across all findings.
    """
    margin = float("inf")
    first_t = None
    notes = []
    for t, m, note in findings:
        margin = min(margin, m)
        if t is not None and (first_t is None or t < first_t):
            first_t = t
        if note:
            notes.append(note)
    return Verdict(
        name=name,
        passed=first_t is None,
        first_violation_time=first_t,
        measured_margin=margin,
        details="; ".join(notes),
    )
