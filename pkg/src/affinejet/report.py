"""Residual reports: the common currency of every verification suite."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


@dataclass
class ResidualReport:
    """Max-absolute residual of one identity over a set of sample points."""

    name: str
    points: int
    max_abs: float
    argmax_point: tuple[float, ...]
    tolerance: float
    passed: bool
    details: list | None = field(default=None)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "points": self.points,
            "max_abs": self.max_abs,
            "argmax_point": list(self.argmax_point),
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.details is not None:
            d["details"] = self.details
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResidualReport":
        return cls(
            name=d["name"],
            points=int(d["points"]),
            max_abs=float(d["max_abs"]),
            argmax_point=tuple(d["argmax_point"]),
            tolerance=float(d["tolerance"]),
            passed=bool(d["pass"]),
            details=d.get("details"),
        )


def from_samples(name: str, samples: Iterable[tuple[Sequence[float], float]],
                 tolerance: float, keep_details: bool = False) -> ResidualReport:
    """Fold (point, |residual|) samples into a report; pass iff max <= tol."""
    count, max_abs, argmax = 0, 0.0, ()
    details = [] if keep_details else None
    for point, value in samples:
        value = abs(float(value))
        count += 1
        if keep_details:
            details.append([list(point), value])
        if value >= max_abs:
            max_abs, argmax = value, tuple(float(x) for x in point)
    return ResidualReport(name=name, points=count, max_abs=max_abs,
                          argmax_point=argmax, tolerance=tolerance,
                          passed=max_abs <= tolerance, details=details)
