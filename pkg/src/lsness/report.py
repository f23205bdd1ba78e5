"""Pass/fail bookkeeping shared by every ``check_*`` routine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float = 0.0
    first_violation: Any = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "residual": float(self.residual),
            "first_violation": None if self.first_violation is None else str(self.first_violation),
            "detail": self.detail,
        }


@dataclass
class Report:
    title: str
    results: list = field(default_factory=list)

    def add(self, name, passed, residual=0.0, first_violation=None, detail="") -> CheckResult:
        res = CheckResult(name, bool(passed), float(residual), first_violation, detail)
        self.results.append(res)
        return res

    def extend(self, other: "Report", prefix: str | None = None) -> None:
        for r in other.results:
            name = f"{prefix}/{r.name}" if prefix else r.name
            self.results.append(CheckResult(name, r.passed, r.residual, r.first_violation, r.detail))

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "results": [r.to_dict() for r in self.results],
        }

    def __str__(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for r in self.results:
            mark = "PASS" if r.passed else "FAIL"
            line = f"  [{mark}] {r.name} residual={r.residual:.3g}"
            if not r.passed and r.first_violation is not None:
                line += f" first={r.first_violation}"
            lines.append(line)
        return "\n".join(lines)
