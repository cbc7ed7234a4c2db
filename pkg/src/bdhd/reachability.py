"""Per-defender next/prev reachability over attack events.

Index 0 stands for a defender's starting position; events are 1..n in time
order. Edges only go from a lower index to a higher one, so the relation is a
DAG even when several events share a timestamp.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .geometry import EPS, BoundarySpace, Point, geodesic_distance, pairwise_distance
from .instance import AttackEvent, Instance


def can_reach(
    space: BoundarySpace, from_loc: Point, from_t: float, event: AttackEvent, speed: float
) -> bool:
    if event.t < from_t:
        return False
    return geodesic_distance(space, from_loc, event.loc) <= speed * (event.t - from_t) + EPS


@dataclass(frozen=True)
class ReachabilityRelation:
    # reach[d, a, b] is True iff event b is in next(a, d); shape (k, n+1, n+1)
    reach: np.ndarray
    start_time: float = 0.0

    @property
    def k(self) -> int:
        return self.reach.shape[0]

    @property
    def n(self) -> int:
        return self.reach.shape[1] - 1

    @property
    def edge_count(self) -> int:
        return int(self.reach.sum())

    def next(self, a: int, d: int) -> List[int]:
        return [int(b) for b in np.flatnonzero(self.reach[d, a])]

    def prev(self, a: int, d: int) -> List[int]:
        if a < 1:
            raise IndexError("prev is defined for events 1..n only")
        return [int(p) for p in np.flatnonzero(self.reach[d, :, a])]

    def prev_csr(self):
        """prev lists packed for compiled kernels.

        Returns (ptr, idx) where ptr has shape (k, n+2) and the predecessors of
        event a for defender d are idx[ptr[d, a]:ptr[d, a+1]], ascending.
        """
        k, size = self.k, self.n + 1
        ptr = np.zeros((k, size + 1), dtype=np.int64)
        chunks = []
        offset = 0
        for d in range(k):
            cols, rows = np.nonzero(self.reach[d].T)  # (b, a) pairs sorted by b then a
            counts = np.bincount(cols, minlength=size)
            ptr[d, 1:] = offset + np.cumsum(counts)
            ptr[d, 0] = offset
            offset += len(rows)
            chunks.append(rows)
        idx = np.concatenate(chunks).astype(np.int64) if chunks else np.zeros(0, np.int64)
        return ptr, idx


def event_distances(inst: Instance) -> np.ndarray:
    locs = inst.event_locs()
    return pairwise_distance(inst.space, locs, locs)


def build_relation(
    inst: Instance, start_time: float = 0.0, event_dist: Optional[np.ndarray] = None
) -> ReachabilityRelation:
    """Evaluate the reachability inequality for every (defender, pair) combination.

    ``start_time`` is the clock at which defenders sit at their initial
    locations; ``event_dist`` may supply a precomputed event distance matrix.
    """
    n, k = inst.n, inst.k
    reach = np.zeros((k, n + 1, n + 1), dtype=bool)
    if n == 0:
        return ReachabilityRelation(reach, start_time)
    times = inst.event_times()
    if event_dist is None:
        event_dist = event_distances(inst)
    dt = times[None, :] - times[:, None]
    later = np.triu(np.ones((n, n), dtype=bool), k=1)
    src_dist = pairwise_distance(inst.space, inst.defender_locs(), inst.event_locs())
    budget0 = times - start_time
    for d, v in enumerate(inst.speeds):
        reach[d, 1:, 1:] = later & (event_dist <= v * dt + EPS)
        reach[d, 0, 1:] = (budget0 >= 0) & (src_dist[d] <= v * budget0 + EPS)
    return ReachabilityRelation(reach, start_time)
