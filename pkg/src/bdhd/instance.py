"""Defenders, attack events and problem instances, plus random instance generation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InstanceFormatError, InvalidPointError
from .geometry import BoundarySpace, Point, sample_uniform, validate_point


@dataclass(frozen=True)
class AttackEvent:
    loc: Point
    t: float


@dataclass(frozen=True)
class DefenderSpec:
    speed: float
    initial_loc: Point

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError(f"defender speed must be positive, got {self.speed}")


@dataclass(frozen=True)
class Instance:
    space: BoundarySpace
    defenders: Tuple[DefenderSpec, ...]
    events: Tuple[AttackEvent, ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "defenders", tuple(self.defenders))
        # stable sort keeps insertion order among equal times
        events = tuple(sorted(self.events, key=lambda e: e.t))
        object.__setattr__(self, "events", events)
        if not self.defenders:
            raise ValueError("an instance needs at least one defender")

    @property
    def k(self) -> int:
        return len(self.defenders)

    @property
    def n(self) -> int:
        return len(self.events)

    @property
    def speeds(self) -> np.ndarray:
        return np.array([d.speed for d in self.defenders], dtype=float)

    @property
    def seed(self) -> Optional[int]:
        return self.meta.get("seed")

    def event_locs(self) -> np.ndarray:
        return np.array([e.loc for e in self.events], dtype=float).reshape(self.n, self.space.dim)

    def event_times(self) -> np.ndarray:
        return np.array([e.t for e in self.events], dtype=float)

    def defender_locs(self) -> np.ndarray:
        return np.array([d.initial_loc for d in self.defenders], dtype=float).reshape(
            self.k, self.space.dim
        )

    def with_defenders(self, defenders: Sequence[DefenderSpec]) -> "Instance":
        return Instance(self.space, tuple(defenders), self.events, dict(self.meta))

    def same_as(self, other: "Instance") -> bool:
        """Field-for-field equality including metadata."""
        return self == other and self.meta == other.meta


@dataclass
class GenerationConfig:
    lam: float
    n_events: int
    k_defenders: int
    v_min: float = 1.0
    v_max: float = 1.0
    speed_sum_target: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.n_events < 0:
            raise ValueError("n_events must be non-negative")
        if self.k_defenders < 1:
            raise ValueError("need at least one defender")
        if not (self.v_max >= self.v_min > 0):
            raise ValueError("need v_max >= v_min > 0")


def make_rng(seed: int) -> np.random.Generator:
    """Seedable PCG64 generator; the algorithm is stable across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


def generate_poisson_attacks(
    space: BoundarySpace, cfg: GenerationConfig, rng: np.random.Generator
) -> List[AttackEvent]:
    if cfg.n_events == 0:
        return []
    gaps = rng.exponential(1.0 / cfg.lam, size=cfg.n_events)
    times = np.cumsum(gaps)
    locs = sample_uniform(space, rng, size=cfg.n_events)
    return [
        AttackEvent(tuple(float(x) for x in loc), float(t)) for loc, t in zip(locs, times)
    ]


def sample_defender_speeds(cfg: GenerationConfig, rng: np.random.Generator) -> List[float]:
    raw = rng.uniform(cfg.v_min, cfg.v_max, size=cfg.k_defenders)
    if cfg.speed_sum_target is not None:
        raw = raw * (cfg.speed_sum_target / raw.sum())
    return [float(v) for v in raw]


def generate_instance(space: BoundarySpace, cfg: GenerationConfig) -> Instance:
    """Random instance: speeds, then defender placements, then the attack stream."""
    rng = make_rng(cfg.seed)
    speeds = sample_defender_speeds(cfg, rng)
    locs = sample_uniform(space, rng, size=cfg.k_defenders)
    defenders = tuple(
        DefenderSpec(v, tuple(float(x) for x in loc)) for v, loc in zip(speeds, locs)
    )
    events = generate_poisson_attacks(space, cfg, rng)
    meta = {"seed": cfg.seed, "lambda": cfg.lam}
    return Instance(space, defenders, tuple(events), meta)


# -- JSON I/O ---------------------------------------------------------------


def instance_to_dict(inst: Instance) -> dict:
    return {
        "space": inst.space.to_dict(),
        "defenders": [{"speed": d.speed, "loc": list(d.initial_loc)} for d in inst.defenders],
        "events": [{"loc": list(e.loc), "t": e.t} for e in inst.events],
        "meta": dict(inst.meta),
    }


def save_instance(inst: Instance, path) -> None:
    # json writes floats with repr, which round-trips exactly
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n")


def _real(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(where, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise InstanceFormatError(where, "must be finite")
    return float(value)


def _point(space: BoundarySpace, value, where: str) -> Point:
    if not isinstance(value, list):
        raise InstanceFormatError(where, "expected a list of coordinates")
    p = tuple(_real(x, f"{where}[{i}]") for i, x in enumerate(value))
    try:
        validate_point(space, p)
    except InvalidPointError as exc:
        raise InstanceFormatError(where, str(exc)) from None
    return p


def instance_from_dict(data) -> Instance:
    if not isinstance(data, dict):
        raise InstanceFormatError("$", "top level must be an object")
    for key in ("space", "defenders", "events"):
        if key not in data:
            raise InstanceFormatError(key, "missing")
    sd = data["space"]
    if not isinstance(sd, dict) or "kind" not in sd:
        raise InstanceFormatError("space.kind", "missing")
    try:
        space = BoundarySpace(sd["kind"], sd.get("size"))
    except (ValueError, TypeError) as exc:
        raise InstanceFormatError("space", str(exc)) from None

    if not isinstance(data["defenders"], list) or not data["defenders"]:
        raise InstanceFormatError("defenders", "need a non-empty list")
    defenders = []
    for i, d in enumerate(data["defenders"]):
        where = f"defenders[{i}]"
        if not isinstance(d, dict):
            raise InstanceFormatError(where, "expected an object")
        speed = _real(d.get("speed"), f"{where}.speed")
        if speed <= 0:
            raise InstanceFormatError(f"{where}.speed", "must be positive")
        defenders.append(DefenderSpec(speed, _point(space, d.get("loc"), f"{where}.loc")))

    if not isinstance(data["events"], list):
        raise InstanceFormatError("events", "expected a list")
    events = []
    last_t = -math.inf
    for i, e in enumerate(data["events"]):
        where = f"events[{i}]"
        if not isinstance(e, dict):
            raise InstanceFormatError(where, "expected an object")
        t = _real(e.get("t"), f"{where}.t")
        if t < 0:
            raise InstanceFormatError(f"{where}.t", "must be non-negative")
        if t < last_t:
            raise InstanceFormatError(f"{where}.t", "events must be sorted by time")
        last_t = t
        events.append(AttackEvent(_point(space, e.get("loc"), f"{where}.loc"), t))

    meta = data.get("meta", {})
    if not isinstance(meta, dict):
        raise InstanceFormatError("meta", "expected an object")
    return Instance(space, tuple(defenders), tuple(events), dict(meta))


def load_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError("$", f"malformed JSON: {exc}") from None
    return instance_from_dict(data)
