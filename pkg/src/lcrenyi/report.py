"""Structured verification reports (JSON schema ``lc-renyi/1``)."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

SCHEMA = "lc-renyi/1"


@dataclass(frozen=True)
class Check:
    """One pass/fail item: the worst value found, the tolerance and where it occurred."""

    name: str
    passed: bool
    value: float
    tolerance: float
    point: dict = field(default_factory=dict)
    description: str = ""

    def with_prefix(self, prefix: str) -> "Check":
        return replace(self, name=f"{prefix}.{self.name}")

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": bool(self.passed), "value": self.value,
                "tolerance": self.tolerance, "point": self.point,
                "description": self.description}


@dataclass
class VerificationReport:
    command: str
    config: dict
    checks: list[Check] = field(default_factory=list)
    cases: list[dict] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    worst: dict | None = None
    passed: bool | None = None
    duration_s: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def add(self, check: Check) -> None:
        self.checks.append(check)

    def finish(self) -> "VerificationReport":
        self.passed = all(c.passed for c in self.checks)
        failing = [c for c in self.checks if not c.passed]
        if failing:
            self.worst = failing[0].to_dict()
        self.duration_s = time.perf_counter() - self._t0
        return self

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name or c.name.endswith("." + name):
                return c
        raise KeyError(name)

    def to_dict(self, timing: bool = True) -> dict:
        d: dict[str, Any] = {
            "schema": SCHEMA,
            "command": self.command,
            "config": self.config,
            "pass": bool(self.passed),
            "checks": [c.to_dict() for c in self.checks],
            "worst": self.worst,
        }
        if self.cases:
            d["cases"] = self.cases
        d.update(self.extra)
        if timing:
            d["duration_s"] = self.duration_s
        return d

    def to_json(self, timing: bool = True) -> str:
        return dumps(self.to_dict(timing=timing))


def _default(o):
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "item"):
        return o.item()
    if isinstance(o, (set, tuple)):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    if isinstance(o, float) and not math.isfinite(o):
        return None if math.isnan(o) else ("inf" if o > 0 else "-inf")
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def dumps(obj) -> str:
    return json.dumps(_clean(json.loads(json.dumps(obj, default=_default))), indent=2)
