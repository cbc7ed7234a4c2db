"""Independent oracles: a plan feasibility checker and a brute-force optimum.

Nothing here uses the reachability relation or any solver; every hop is
evaluated directly with ``can_reach``.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import List

from .errors import InstanceTooLarge
from .instance import AttackEvent, Instance
from .plan import InterceptionPlan
from .reachability import can_reach

BRUTEFORCE_BUDGET = 10**7

VIOLATION_KINDS = (
    "speed-violation",
    "duplicate-assignment",
    "time-disorder",
    "bad-index",
    "count-mismatch",
)


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass
class CheckReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}


def check_plan(inst: Instance, plan: InterceptionPlan) -> CheckReport:
    report = CheckReport()
    add = report.violations.append
    if len(plan.assignments) != inst.k:
        add(Violation("bad-index", f"plan has {len(plan.assignments)} defender lists, instance has {inst.k}"))
    seen = {}
    total = 0
    for d, seq in enumerate(plan.assignments[: inst.k]):
        defender = inst.defenders[d]
        loc, t, prev_label = defender.initial_loc, 0.0, "start"
        last_index = 0
        for pos, e in enumerate(seq):
            total += 1
            if not isinstance(e, int) or not 1 <= e <= inst.n:
                add(Violation("bad-index", f"defender {d} entry {pos}: event {e!r} not in 1..{inst.n}"))
                continue
            if e in seen:
                add(Violation("duplicate-assignment", f"event {e} assigned to defenders {seen[e]} and {d}"))
            else:
                seen[e] = d
            if e <= last_index:
                add(Violation("time-disorder", f"defender {d}: event {e} follows event {last_index}"))
            last_index = max(last_index, e)
            ev = inst.events[e - 1]
            if not can_reach(inst.space, loc, t, ev, defender.speed):
                add(Violation("speed-violation", f"defender {d}: hop {prev_label} -> {e} infeasible"))
            loc, t, prev_label = ev.loc, ev.t, str(e)
    for seq in plan.assignments[inst.k:]:
        total += len(seq)
    if plan.intercepted_count != total:
        add(Violation("count-mismatch", f"count {plan.intercepted_count} but {total} entries listed"))
    return report


def solve_bruteforce(inst: Instance, budget: int = BRUTEFORCE_BUDGET) -> int:
    """Maximum interception count over every event -> {skip, defender} assignment.

    Events are visited in time order; a defender's sequence is checked hop by
    hop, and a prefix that already fails can have no feasible completion.
    """
    n, k = inst.n, inst.k
    required = (k + 1) ** n
    if required > budget:
        raise InstanceTooLarge(required, budget)
    if n == 0:
        return 0
    space, events = inst.space, inst.events
    starts = [AttackEvent(d.initial_loc, 0.0) for d in inst.defenders]
    speeds = [d.speed for d in inst.defenders]
    last: List[AttackEvent] = list(starts)
    best = 0

    sys.setrecursionlimit(max(sys.getrecursionlimit(), n + 100))

    def visit(i: int, count: int) -> None:
        nonlocal best
        if i == n:
            best = max(best, count)
            return
        if count + (n - i) <= best:
            return
        ev = events[i]
        for d in range(k):
            here = last[d]
            if can_reach(space, here.loc, here.t, ev, speeds[d]):
                last[d] = ev
                visit(i + 1, count + 1)
                last[d] = here
        visit(i + 1, count)

    visit(0, 0)
    return best
