"""Verdict containers shared by the discrete and continuous condition checkers."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["ConditionVerdict", "ConditionReport", "verdict_from_mask", "decay_verdict"]


@dataclass
class ConditionVerdict:
    """Outcome of one inequality checked pointwise over a grid of k or t.

    holds        -- true iff no violation anywhere on the grid
    first_violation -- grid point of the first violation (None if holds)
    holds_from   -- first grid point from which the condition holds through the
                    end of the grid (None if it fails at the last point)
    asymptotic   -- the verdict is a tail-decay assessment of a limit, not a
                    pointwise inequality certificate
    """

    name: str
    holds: bool
    first_violation: Optional[float] = None
    holds_from: Optional[float] = None
    asymptotic: bool = False

    def describe(self) -> str:
        if self.holds:
            tag = "holds asymptotically" if self.asymptotic else "holds"
            return f"{self.name}: {tag}"
        parts = [f"{self.name}: fails at {self.first_violation:g}"]
        if self.holds_from is not None:
            parts.append(f"holds from {self.holds_from:g}")
        return ", ".join(parts)


def verdict_from_mask(name: str, grid: np.ndarray, ok: np.ndarray, asymptotic: bool = False) -> ConditionVerdict:
    """Build a verdict from a boolean mask aligned with the grid."""
    ok = np.asarray(ok, dtype=bool)
    if ok.all():
        return ConditionVerdict(name, True, holds_from=float(grid[0]), asymptotic=asymptotic)
    bad = np.nonzero(~ok)[0]
    first = float(grid[bad[0]])
    last_bad = bad[-1]
    holds_from = float(grid[last_bad + 1]) if last_bad + 1 < len(grid) else None
    return ConditionVerdict(name, False, first_violation=first, holds_from=holds_from, asymptotic=asymptotic)


def decay_verdict(
    name: str,
    grid: np.ndarray,
    values: np.ndarray,
    tiny: float = 1e-12,
    rel_slack: float = 1e-9,
    factor: float = 0.9,
) -> ConditionVerdict:
    """Assess a limit value -> 0 from finite data: tail decay over the final decade.

    The tail is the grid portion above grid_max/10. The verdict holds when the
    tail is already below `tiny`, or is non-increasing (up to rel_slack) and
    has dropped to at most `factor` times its starting value. A finite grid
    cannot certify a limit, so the verdict is flagged asymptotic and reports
    the tail start as holds_from.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    tail = grid > grid[-1] / 10.0
    if tail.sum() < 2:
        tail = np.ones_like(grid, dtype=bool)
    v = values[tail]
    t_from = float(grid[tail][0])
    if not np.all(np.isfinite(v)):
        return ConditionVerdict(name, False, first_violation=t_from, asymptotic=True)
    if np.max(np.abs(v)) <= tiny:
        return ConditionVerdict(name, True, holds_from=t_from, asymptotic=True)
    nonincreasing = bool(np.all(np.diff(v) <= rel_slack * np.maximum(np.abs(v[:-1]), tiny)))
    dropped = v[-1] <= factor * v[0]
    if nonincreasing and dropped and v[-1] >= 0:
        return ConditionVerdict(name, True, holds_from=t_from, asymptotic=True)
    return ConditionVerdict(name, False, first_violation=t_from, asymptotic=True)


@dataclass
class ConditionReport:
    """Per-condition verdicts over a shared grid."""

    verdicts: list
    grid: np.ndarray
    epsilon_used: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def verdict(self, name: str) -> ConditionVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def all_hold(self, names=None) -> bool:
        names = None if names is None else set(names)
        return all(v.holds for v in self.verdicts if names is None or v.name in names)

    def first_failure(self) -> Optional[ConditionVerdict]:
        for v in self.verdicts:
            if not v.holds:
                return v
        return None

    def describe(self) -> str:
        return "\n".join(v.describe() for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "epsilon_used": self.epsilon_used,
            "grid": [float(self.grid[0]), float(self.grid[-1]), int(len(self.grid))],
            "verdicts": [
                {
                    "name": v.name,
                    "holds": bool(v.holds),
                    "first_violation": v.first_violation,
                    "holds_from": v.holds_from,
                    "asymptotic": bool(v.asymptotic),
                }
                for v in self.verdicts
            ],
            **self.extras,
        }
