"""Check results and JSON/text reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

SCHEMA = "coend-report/1"

PASS = "PASS"
FAIL = "FAIL"
SKIPPED = "SKIPPED"
EXPECTED = "EXPECTED"
STATUSES = (PASS, FAIL, SKIPPED, EXPECTED)

# skip reasons are prefixed by one of these categories
SKIP_CATEGORIES = ("precondition", "bound", "out-of-scope")


@dataclass
class CheckResult:
    name: str
    status: str
    detail: str = ""
    witness: Any = None
    reason: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == SKIPPED and not self.reason.startswith(SKIP_CATEGORIES):
            raise ValueError(f"skipped check {self.name!r} needs a categorised reason")

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_json(self) -> dict:
        out = {"name": self.name, "status": self.status}
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = self.witness
        if self.reason:
            out["reason"] = self.reason
        return out


def passed(name, detail="") -> CheckResult:
    return CheckResult(name, PASS, detail)


def failed(name, witness=None, detail="") -> CheckResult:
    return CheckResult(name, FAIL, detail, witness)


def skipped(name, reason, detail="") -> CheckResult:
    return CheckResult(name, SKIPPED, detail, reason=reason)


def check(name, ok, witness=None, detail="") -> CheckResult:
    return passed(name, detail) if ok else failed(name, witness, detail)


@dataclass
class Report:
    command: str
    config: dict
    results: list[CheckResult] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(r.failed for r in self.results)

    def extend(self, results, prefix: str = ""):
        for r in results:
            if prefix:
                r = CheckResult(f"{prefix}{r.name}", r.status, r.detail, r.witness, r.reason)
            self.results.append(r)

    def counts(self) -> dict[str, int]:
        out = {s: 0 for s in STATUSES}
        for r in self.results:
            out[r.status] += 1
        return out

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "schema": SCHEMA,
            "command": self.command,
            "config": self.config,
            "results": [r.to_json() for r in self.results],
            "summary": self.counts(),
        }
        if self.data:
            out["data"] = self.data
        if timing:
            out["timing"] = self.timing
        return out

    def dumps(self, timing: bool = True) -> str:
        return json.dumps(self.to_json(timing), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"{self.command}  " + "  ".join(f"{k}={v}" for k, v in sorted(self.config.items()))]
        for r in self.results:
            line = f"[{r.status:8}] {r.name}"
            if r.detail:
                line += f" -- {r.detail}"
            if r.reason:
                line += f" ({r.reason})"
            lines.append(line)
            if r.witness is not None and r.status in (FAIL, EXPECTED):
                lines.append(f"           witness: {json.dumps(r.witness, sort_keys=True)}")
        c = self.counts()
        lines.append(" ".join(f"{k}:{c[k]}" for k in STATUSES))
        return "\n".join(lines) + "\n"
