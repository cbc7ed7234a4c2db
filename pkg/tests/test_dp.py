import itertools

import numpy as np
import pytest

from bdhd.dp_solver import solve_dp, solve_dp_pair, table_entries
from bdhd.errors import StateSpaceTooLarge
from bdhd.geometry import BoundarySpace
from bdhd.instance import AttackEvent, DefenderSpec, Instance
from bdhd.reachability import build_relation
from bdhd.verify import check_plan, solve_bruteforce
from helpers.instances import random_instance


def _dp(inst, **kw):
    return solve_dp(inst, build_relation(inst), **kw)


def test_t1(t1):
    plan = _dp(t1)
    assert plan.intercepted_count == 3 == solve_bruteforce(t1)
    assert plan.assignments == ((2, 3), (1,))
    assert check_plan(t1, plan).valid


def test_no_events(t1):
    inst = Instance(t1.space, t1.defenders, ())
    plan = _dp(inst)
    assert plan.intercepted_count == 0 and plan.assignments == ((), ())


def test_single_defender_example():
    inst = Instance(BoundarySpace.interval(), (DefenderSpec(1.0, (0.0,)),),
                    (AttackEvent((0.5,), 0.4), AttackEvent((0.5,), 1.0)))
    plan = _dp(inst)
    assert plan.intercepted_count == 1 and plan.assignments == ((2,),)


def test_oracle_battery():
    mismatches = 0
    for seed in range(220):
        inst = random_instance(seed, n=1 + seed % 8, k=1 + seed % 3)
        plan = _dp(inst)
        assert check_plan(inst, plan).valid
        mismatches += plan.intercepted_count != solve_bruteforce(inst)
    assert mismatches == 0


def test_adding_defender_never_hurts():
    for seed in range(40):
        inst = random_instance(seed, n=8, k=2)
        extra = inst.with_defenders(list(inst.defenders) + [DefenderSpec(0.7, inst.events[0].loc)])
        assert _dp(extra).intercepted_count >= _dp(inst).intercepted_count


def test_permutation_invariance():
    for seed in range(15):
        inst = random_instance(seed, n=10, k=3)
        base = _dp(inst)
        for perm in itertools.permutations(range(3)):
            shuffled = inst.with_defenders([inst.defenders[i] for i in perm])
            plan = _dp(shuffled)
            assert plan.intercepted_count == base.intercepted_count
            assert check_plan(shuffled, plan).valid


def test_refuses_large_state_space():
    inst = random_instance(0, n=64, k=5)
    with pytest.raises(StateSpaceTooLarge) as err:
        _dp(inst)
    assert err.value.required == 65**5 == table_entries(64, 5)
    with pytest.raises(StateSpaceTooLarge):
        _dp(random_instance(1, n=20, k=3), max_entries=1000)


def test_pair_primitive_on_subset():
    for seed in range(20):
        inst = random_instance(seed, n=12, k=4)
        rel = build_relation(inst)
        rng = np.random.default_rng(seed)
        events = np.sort(rng.choice(np.arange(1, 13), size=7, replace=False))
        count, lu, lv = solve_dp_pair(rel, 1, 3, events)
        sub = Instance(inst.space, (inst.defenders[1], inst.defenders[3]),
                       tuple(inst.events[e - 1] for e in events))
        assert count == solve_bruteforce(sub)
        assert set(lu) | set(lv) <= set(events.tolist())
        assert not set(lu) & set(lv)
        full = [[] for _ in range(4)]
        full[1], full[3] = lu, lv
        from bdhd.plan import InterceptionPlan
        assert check_plan(inst, InterceptionPlan.from_assignments(full)).valid
