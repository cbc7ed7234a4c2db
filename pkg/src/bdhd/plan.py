from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple


@dataclass(frozen=True)
class InterceptionPlan:
    """Per-defender ordered lists of intercepted event indices (1-based)."""

    assignments: Tuple[Tuple[int, ...], ...]
    intercepted_count: int

    @classmethod
    def from_assignments(cls, assignments: Sequence[Sequence[int]]) -> "InterceptionPlan":
        lists = tuple(tuple(int(e) for e in seq) for seq in assignments)
        return cls(lists, sum(len(seq) for seq in lists))

    @classmethod
    def empty(cls, k: int) -> "InterceptionPlan":
        return cls(tuple(() for _ in range(k)), 0)

    def owner_map(self) -> dict:
        return {e: d for d, seq in enumerate(self.assignments) for e in seq}

    def to_dict(self) -> dict:
        return {"count": self.intercepted_count, "assignments": [list(s) for s in self.assignments]}

    @classmethod
    def from_dict(cls, d: dict) -> "InterceptionPlan":
        return cls(tuple(tuple(int(e) for e in s) for s in d["assignments"]), int(d["count"]))
