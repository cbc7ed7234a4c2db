"""Exact dynamic programming over last-intercepted-event tuples.

A state is the tuple (a_1, ..., a_k) of the last event each defender
intercepted (0 = still at its start), encoded as a base-(n+1) number with a_1
as the most significant digit. The value of a state is the best interception
count of any plan ending there. A state is reached from the state that swaps
its largest digit a_ma for some p in prev(a_ma, ma), so scanning encodings in
increasing order sees every predecessor first.
"""
from __future__ import annotations

import numba
import numpy as np

from .errors import StateSpaceTooLarge
from .instance import Instance
from .plan import InterceptionPlan
from .reachability import ReachabilityRelation

DEFAULT_MAX_ENTRIES = 2**30


@numba.njit(cache=True)
def _fill_table(k, n, prev_ptr, prev_idx, values, parent):
    base = n + 1
    size = values.shape[0]
    pw = np.empty(k, np.int64)
    acc = 1
    for i in range(k - 1, -1, -1):
        pw[i] = acc
        acc *= base
    digits = np.zeros(k, np.int64)
    values[0] = 0
    for mask in range(1, size):
        # odometer increment of the digit vector
        i = k - 1
        while True:
            digits[i] += 1
            if digits[i] < base:
                break
            digits[i] = 0
            i -= 1
        ma = 0
        dup = False
        for i in range(k):
            a = digits[i]
            if a > digits[ma]:
                ma = i
            if a != 0:
                for j in range(i + 1, k):
                    if digits[j] == a:
                        dup = True
        if dup:
            continue
        top = digits[ma]
        best = -1
        bp = -1
        for j in range(prev_ptr[ma, top], prev_ptr[ma, top + 1]):
            p = prev_idx[j]
            if p != 0:
                taken = False
                for i in range(k):
                    if digits[i] == p:
                        taken = True
                        break
                if taken:
                    continue
            pm = mask - (top - p) * pw[ma]
            v = values[pm]
            if v >= 0 and v + 1 > best:
                best = v + 1
                bp = p
        values[mask] = best
        parent[mask] = bp


@numba.njit(cache=True)
def _extract(k, n, values, parent):
    base = n + 1
    pw = np.empty(k, np.int64)
    acc = 1
    for i in range(k - 1, -1, -1):
        pw[i] = acc
        acc *= base
    state = np.argmax(values)  # first maximum = lowest encoding
    count = values[state]
    # hops[j] = (defender, event), produced last-event-first
    hops = np.empty((max(count, 0), 2), np.int64)
    digits = np.empty(k, np.int64)
    j = 0
    while state != 0:
        s = state
        for i in range(k - 1, -1, -1):
            digits[i] = s % base
            s //= base
        ma = 0
        for i in range(k):
            if digits[i] > digits[ma]:
                ma = i
        top = digits[ma]
        p = parent[state]
        hops[j, 0] = ma
        hops[j, 1] = top
        j += 1
        state = state - (top - p) * pw[ma]
    return count, hops


def table_entries(n: int, k: int) -> int:
    return (n + 1) ** k


def dp_from_csr(k, n, prev_ptr, prev_idx, max_entries=DEFAULT_MAX_ENTRIES):
    """Run the DP on a packed prev relation; returns (count, per-defender event lists)."""
    size = table_entries(n, k)
    if size > max_entries:
        raise StateSpaceTooLarge(size, max_entries)
    dtype = np.int16 if n < 2**15 - 1 else np.int32
    values = np.full(size, -1, dtype=dtype)
    # parent stores the replaced digit p; together with the state it fixes the predecessor
    parent = np.full(size, -1, dtype=dtype)
    _fill_table(k, n, prev_ptr, prev_idx, values, parent)
    count, hops = _extract(k, n, values, parent)
    lists = [[] for _ in range(k)]
    for d, e in hops[::-1]:
        lists[int(d)].append(int(e))
    return int(count), lists


def solve_dp(
    inst: Instance, rel: ReachabilityRelation, max_entries: int = DEFAULT_MAX_ENTRIES
) -> InterceptionPlan:
    n, k = inst.n, inst.k
    size = table_entries(n, k)
    if size > max_entries:
        raise StateSpaceTooLarge(size, max_entries)
    if n == 0:
        return InterceptionPlan.empty(k)
    ptr, idx = rel.prev_csr()
    count, lists = dp_from_csr(k, n, ptr, idx, max_entries)
    plan = InterceptionPlan.from_assignments(lists)
    assert plan.intercepted_count == count
    return plan


def solve_dp_pair(rel: ReachabilityRelation, u: int, v: int, events: np.ndarray):
    """Exact 2-defender DP for defenders ``u`` and ``v`` restricted to ``events``.

    ``events`` is an ascending array of 1-based event indices. Returns
    (count, events for u, events for v) in original indexing.
    """
    m = len(events)
    if m == 0:
        return 0, [], []
    sel = np.concatenate(([0], events))
    sub = rel.reach[[u, v]][:, sel][:, :, sel]
    ptr, idx = ReachabilityRelation(sub).prev_csr()
    count, (lu, lv) = dp_from_csr(2, m, ptr, idx)
    return count, [int(events[e - 1]) for e in lu], [int(events[e - 1]) for e in lv]
