import json
import math

import numpy as np
import pytest

from bdhd.errors import InstanceFormatError
from bdhd.geometry import BoundarySpace, validate_point
from bdhd.instance import (
    AttackEvent,
    DefenderSpec,
    GenerationConfig,
    Instance,
    generate_instance,
    generate_poisson_attacks,
    instance_to_dict,
    load_instance,
    make_rng,
    sample_defender_speeds,
    save_instance,
)
from helpers.instances import SPACES


def test_no_events():
    cfg = GenerationConfig(lam=1.0, n_events=0, k_defenders=1)
    assert generate_poisson_attacks(BoundarySpace.interval(), cfg, make_rng(0)) == []


def test_mean_gap():
    cfg = GenerationConfig(lam=10.0, n_events=10_000, k_defenders=1)
    ev = generate_poisson_attacks(BoundarySpace.circle(), cfg, make_rng(4))
    times = np.array([e.t for e in ev])
    gaps = np.diff(np.concatenate([[0.0], times]))
    assert abs(gaps.mean() - 0.1) <= 0.03 * 0.1
    assert np.all(gaps > 0)
    assert times[0] == gaps[0]


def test_poisson_determinism():
    cfg = GenerationConfig(lam=1.0, n_events=3, k_defenders=1, seed=5)
    a = generate_poisson_attacks(BoundarySpace.square(), cfg, make_rng(5))
    b = generate_poisson_attacks(BoundarySpace.square(), cfg, make_rng(5))
    assert len(a) == 3 and a == b


def test_locations_are_valid_points():
    for topo, space in SPACES.items():
        inst = generate_instance(space, GenerationConfig(lam=3, n_events=100, k_defenders=3, seed=1))
        for e in inst.events:
            validate_point(space, e.loc)
        for d in inst.defenders:
            validate_point(space, d.initial_loc)


def test_equal_speeds_normalize_to_average():
    cfg = GenerationConfig(lam=1, n_events=0, k_defenders=5, v_min=1, v_max=1, speed_sum_target=15)
    assert sample_defender_speeds(cfg, make_rng(0)) == pytest.approx([3.0] * 5)


def test_speed_sum_and_ratios():
    for seed in range(50):
        cfg = GenerationConfig(lam=1, n_events=0, k_defenders=5, v_min=1, v_max=10, seed=seed)
        raw = np.array(sample_defender_speeds(cfg, make_rng(seed)))
        normed_cfg = GenerationConfig(lam=1, n_events=0, k_defenders=5, v_min=1, v_max=10,
                                      speed_sum_target=15, seed=seed)
        out = np.array(sample_defender_speeds(normed_cfg, make_rng(seed)))
        assert abs(out.sum() - 15) <= 1e-9
        ratio_raw = raw[:, None] / raw[None, :]
        ratio_out = out[:, None] / out[None, :]
        np.testing.assert_allclose(ratio_out, ratio_raw, rtol=0, atol=1e-9)


def test_prenormalization_mean():
    cfg = GenerationConfig(lam=1, n_events=0, k_defenders=5, v_min=1, v_max=10)
    rng = make_rng(8)
    draws = np.concatenate([sample_defender_speeds(cfg, rng) for _ in range(10_000)])
    assert abs(draws.mean() - 5.5) <= 0.02 * 5.5
    assert draws.min() >= 1 and draws.max() <= 10


def test_generation_determinism_and_sorting():
    for topo, space in SPACES.items():
        cfg = GenerationConfig(lam=4, n_events=200, k_defenders=4, v_min=1, v_max=5, seed=123)
        a, b = generate_instance(space, cfg), generate_instance(space, cfg)
        assert instance_to_dict(a) == instance_to_dict(b)
        t = a.event_times()
        assert np.all(np.diff(t) > 0)
        assert a.meta == {"seed": 123, "lambda": 4}


def test_config_invariants():
    for kw in ({"lam": 0}, {"n_events": -1}, {"k_defenders": 0}, {"v_min": 2, "v_max": 1}):
        base = dict(lam=1.0, n_events=1, k_defenders=1)
        base.update(kw)
        with pytest.raises(ValueError):
            GenerationConfig(**base)


def test_round_trip(tmp_path):
    for topo, space in SPACES.items():
        inst = generate_instance(space, GenerationConfig(lam=2, n_events=30, k_defenders=3,
                                                         v_min=0.5, v_max=4, seed=9))
        path = tmp_path / f"{topo}.json"
        save_instance(inst, path)
        back = load_instance(path)
        assert back == inst
        assert back.same_as(inst)


def test_instance_sorts_events_stably():
    ev = (AttackEvent((0.1,), 2.0), AttackEvent((0.2,), 1.0), AttackEvent((0.3,), 1.0))
    inst = Instance(BoundarySpace.interval(), (DefenderSpec(1.0, (0.0,)),), ev)
    assert [e.loc[0] for e in inst.events] == [0.2, 0.3, 0.1]


def _write(tmp_path, data):
    p = tmp_path / "inst.json"
    p.write_text(json.dumps(data))
    return p


def _base():
    return {"space": {"kind": "interval"}, "defenders": [{"speed": 1.0, "loc": [0.0]}],
            "events": [{"loc": [0.5], "t": 1.0}, {"loc": [0.2], "t": 2.0}], "meta": {"seed": 0}}


def test_negative_time_rejected(tmp_path):
    data = _base()
    data["events"][0]["t"] = -1
    with pytest.raises(InstanceFormatError) as err:
        load_instance(_write(tmp_path, data))
    assert err.value.field == "events[0].t"
    assert "events[0].t" in str(err.value)


def test_format_errors_name_the_field(tmp_path):
    cases = []
    d = _base(); d["events"].reverse(); cases.append((d, "events[1].t"))
    d = _base(); d["events"][1]["loc"] = [1.5]; cases.append((d, "events[1].loc"))
    d = _base(); d["defenders"][0]["speed"] = 0; cases.append((d, "defenders[0].speed"))
    d = _base(); del d["space"]; cases.append((d, "space"))
    d = _base(); d["space"] = {"kind": "circle", "size": -1}; cases.append((d, "space"))
    for data, field in cases:
        with pytest.raises(InstanceFormatError) as err:
            load_instance(_write(tmp_path, data))
        assert err.value.field == field
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(InstanceFormatError):
        load_instance(p)


def test_empty_events(tmp_path):
    d = _base()
    d["events"] = []
    inst = load_instance(_write(tmp_path, d))
    assert inst.n == 0 and inst.k == 1
