"""Finite look-ahead simulation with pairing-heuristic replanning.

Event i becomes visible at ``max(0, t_i - T)``. Whenever new events become
visible the team replans from scratch over the visible, not yet passed events,
starting from the defenders' current positions. Between replans each defender
heads for the next event on its list at full speed and waits there; defenders
without a target hold position.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .edp import default_orders, solve_edp
from .geometry import EPS, Point, geodesic_distance, move_toward
from .instance import AttackEvent, DefenderSpec, Instance
from .reachability import build_relation, event_distances


@dataclass(frozen=True)
class HorizonParams:
    horizon: float = math.inf

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")


def reveal_time(t: float, horizon: float) -> float:
    if math.isinf(horizon):
        return 0.0
    return max(0.0, t - horizon)


def reveal_events(
    events: Sequence[AttackEvent], clock: float, horizon: float, revealed: int = 0
) -> List[int]:
    """0-based positions of events visible at ``clock`` beyond the first ``revealed``.

    Events must be time sorted, so the visible set is always a prefix.
    """
    out = []
    for j in range(revealed, len(events)):
        if reveal_time(events[j].t, horizon) > clock:
            break
        out.append(j)
    return out


@dataclass
class EventRecord:
    index: int  # 1-based
    t: float
    revealed_at: float
    assigned_defender: Optional[int] = None
    intercepted: bool = False


@dataclass
class SimulationReport:
    intercepted_count: int
    n: int
    horizon: float
    events: List[EventRecord]
    trajectories: List[List[tuple]]  # per defender: (time, point)
    replans: int = 0

    @property
    def rate(self) -> float:
        return self.intercepted_count / self.n if self.n else 1.0

    def to_dict(self, with_trajectories: bool = True) -> dict:
        d = {
            "count": self.intercepted_count,
            "n": self.n,
            "rate": self.rate,
            "horizon": "inf" if math.isinf(self.horizon) else self.horizon,
            "replans": self.replans,
            "events": [
                {
                    "index": r.index,
                    "t": r.t,
                    "revealed_at": r.revealed_at,
                    "assigned_defender": r.assigned_defender,
                    "intercepted": r.intercepted,
                }
                for r in self.events
            ],
        }
        if with_trajectories:
            d["trajectories"] = [
                [{"t": t, "loc": list(p)} for t, p in traj] for traj in self.trajectories
            ]
        return d


def write_trajectory_csv(report: SimulationReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        dim = len(report.trajectories[0][0][1]) if report.trajectories else 1
        w.writerow(["defender", "t"] + [f"x{i}" for i in range(dim)])
        for d, traj in enumerate(report.trajectories):
            for t, p in traj:
                w.writerow([d, repr(t)] + [repr(x) for x in p])


def simulate_online(inst: Instance, params: HorizonParams) -> SimulationReport:
    space, n, k = inst.space, inst.n, inst.k
    T = params.horizon
    events = inst.events
    speeds = [d.speed for d in inst.defenders]
    orders = default_orders(inst.seed)
    dist = event_distances(inst) if n else np.zeros((0, 0))

    records = [EventRecord(j + 1, e.t, reveal_time(e.t, T)) for j, e in enumerate(events)]
    timeline = sorted(set([r.revealed_at for r in records] + [e.t for e in events]))

    pos: List[Point] = [d.initial_loc for d in inst.defenders]
    queues: List[List[int]] = [[] for _ in range(k)]
    owner = [-1] * n
    done = [False] * n
    revealed = 0
    clock = 0.0
    trajectories = [[(0.0, p)] for p in pos]
    replans = 0

    def resolve() -> None:
        for j in range(revealed):
            if done[j] or events[j].t > clock:
                continue
            done[j] = True
            d = owner[j]
            rec = records[j]
            if d >= 0:
                rec.assigned_defender = d
                rec.intercepted = geodesic_distance(space, pos[d], events[j].loc) <= EPS
                if j in queues[d]:
                    queues[d].remove(j)

    def replan() -> None:
        visible = [j for j in range(revealed) if not done[j]]
        for j in visible:
            owner[j] = -1
        for q in queues:
            q.clear()
        if not visible:
            return
        sub = Instance(
            space,
            tuple(DefenderSpec(v, p) for v, p in zip(speeds, pos)),
            tuple(events[j] for j in visible),
            dict(inst.meta),
        )
        rel = build_relation(sub, start_time=clock, event_dist=dist[np.ix_(visible, visible)])
        plan = solve_edp(sub, rel, orders).plan
        for d, seq in enumerate(plan.assignments):
            for e in seq:
                j = visible[e - 1]
                owner[j] = d
                queues[d].append(j)

    for tau in timeline:
        step = tau - clock
        if step > 0:
            for d in range(k):
                if queues[d]:
                    target = events[queues[d][0]].loc
                    pos[d] = move_toward(space, pos[d], target, speeds[d] * step)
            clock = tau
            for d in range(k):
                trajectories[d].append((clock, pos[d]))
        resolve()
        newly = reveal_events(events, clock, T, revealed)
        if newly:
            revealed = newly[-1] + 1
            replan()
            replans += 1
            resolve()

    count = sum(r.intercepted for r in records)
    return SimulationReport(count, n, T, records, trajectories, replans)
