"""Named-residual reports: the common currency of every verification check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Condition:
    """One named residual with its tolerance and verdict.

    status is "pass", "fail" or "indeterminate"; an indeterminate condition
    (e.g. a skipped inversion) never counts as passing.
    """

    name: str
    residual: float
    tolerance: float
    status: str
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        # NaN marks an unmeasured residual; strict JSON wants null there
        residual = None if math.isnan(self.residual) else float(self.residual)
        out = {
            "name": self.name,
            "residual": residual,
            "tolerance": float(self.tolerance),
            "status": self.status,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


def make_condition(name: str, residual: float, tolerance: float,
                   detail: str = "") -> Condition:
    status = "pass" if residual <= tolerance else "fail"
    return Condition(name=name, residual=float(residual),
                     tolerance=float(tolerance), status=status, detail=detail)


def indeterminate_condition(name: str, tolerance: float, detail: str) -> Condition:
    return Condition(name=name, residual=float("nan"), tolerance=float(tolerance),
                     status="indeterminate", detail=detail)


@dataclass
class ConditionReport:
    """All conditions of one check, plus free-form diagnostic info."""

    name: str
    conditions: list[Condition] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.conditions)

    def add(self, name: str, residual: float, tolerance: float, detail: str = ""):
        self.conditions.append(make_condition(name, residual, tolerance, detail))

    def add_indeterminate(self, name: str, tolerance: float, detail: str):
        self.conditions.append(indeterminate_condition(name, tolerance, detail))

    def condition(self, name: str) -> Condition:
        for cond in self.conditions:
            if cond.name == name:
                return cond
        raise KeyError(name)

    def worst(self) -> float:
        residuals = [c.residual for c in self.conditions if c.status != "indeterminate"]
        return max(residuals, default=0.0)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "overall": self.overall,
            "conditions": [c.to_dict() for c in self.conditions],
            "info": _plain(self.info),
        }


def _plain(value):
    """Recursively convert numpy scalars/arrays so json can serialize the dict."""
    import numpy as np

    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value
