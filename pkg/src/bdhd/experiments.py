"""Experiment presets: parameter sweeps over generated instances.

Each preset is a list of cells (generation parameters plus the algorithms to
run) and a number of runs per cell. Run r of every cell uses seed
``base_seed + r``, so cells differ only in their parameters.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from .dp_solver import solve_dp
from .edp import solve_edp
from .errors import BDHDError, StateSpaceTooLarge
from .flow_solver import build_flow_model, solve_branch_and_bound
from .geometry import BoundarySpace
from .instance import GenerationConfig, generate_instance
from .online import HorizonParams, simulate_online
from .reachability import build_relation
from .verify import check_plan, solve_bruteforce

CSV_COLUMNS = [
    "preset", "topology", "size", "k", "lambda", "n_events", "v_min", "v_max",
    "speed_sum", "horizon", "seed", "algo", "count", "n", "rate", "wall_ms", "status",
]

TWO_PI = 2 * math.pi
# sphere of surface area 1
UNIT_SPHERE_RADIUS = math.sqrt(1 / (4 * math.pi))
UNIT_SIZES = {"interval": None, "circle": 1.0, "square": 1.0, "sphere": UNIT_SPHERE_RADIUS}

PRESET_NAMES = ("scaling", "defenders", "heterogeneity", "lambda-grid", "topology", "horizon")


@dataclass(frozen=True)
class Cell:
    topology: str
    size: Optional[float]
    k: int
    lam: float
    n_events: int
    v_min: float = 1.0
    v_max: float = 5.0
    speed_sum: Optional[float] = None
    horizon: Optional[float] = None  # only for the "online" algorithm
    algos: tuple = ("edp",)

    def space(self) -> BoundarySpace:
        return BoundarySpace(self.topology, self.size)

    def config(self, seed: int) -> GenerationConfig:
        return GenerationConfig(
            lam=self.lam, n_events=self.n_events, k_defenders=self.k, v_min=self.v_min,
            v_max=self.v_max, speed_sum_target=self.speed_sum, seed=seed,
        )


@dataclass
class ExperimentPreset:
    name: str
    cells: List[Cell]
    runs: int
    base_seed: int = 0
    dp_max_entries: int = 2**26

    def __post_init__(self):
        if not self.cells:
            raise ValueError("preset grid is empty")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")

    def seeds(self) -> List[int]:
        return [self.base_seed + r for r in range(self.runs)]


def make_preset(
    name: str, runs: Optional[int] = None, n_events: Optional[int] = None, base_seed: int = 0
) -> ExperimentPreset:
    """Desk-scale versions of the six sweeps; ``runs``/``n_events`` override defaults."""
    def n_or(default):
        return default if n_events is None else n_events

    if name == "scaling":
        cells = [
            Cell("circle", TWO_PI, k, float(k), n, algos=("dp", "bnb", "edp"))
            for k in (2, 3, 4, 5) for n in (n_or(20), n_or(40), n_or(60))
        ]
        default_runs = 5
    elif name == "defenders":
        cells = [
            Cell("circle", TWO_PI, k, 2.0 * k, n_or(100), algos=("bnb", "edp"))
            for k in (5, 10, 15, 20, 25, 30)
        ]
        default_runs = 5
    elif name == "heterogeneity":
        cells = [
            Cell("circle", TWO_PI, 5, 25.0, n_or(200), v_min=1.0, v_max=float(r), speed_sum=15.0)
            for r in range(1, 11)
        ]
        default_runs = 100
    elif name == "lambda-grid":
        cells = [
            Cell("circle", TWO_PI, k, float(lam), n_or(200))
            for k in (1, 5, 10, 15, 20) for lam in (1, 10, 20, 40, 60)
        ]
        default_runs = 20
    elif name == "topology":
        cells = [
            Cell(topo, UNIT_SIZES[topo], 5, float(lam), n_or(200))
            for topo in ("interval", "circle", "square", "sphere")
            for lam in (1, 2, 5, 10, 20, 50, 100, 200)
        ]
        default_runs = 20
    elif name == "horizon":
        cells = [
            Cell("circle", TWO_PI, 5, 5.0, n_or(400), horizon=h, algos=("online",))
            for h in (0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0)
        ]
        cells.append(Cell("circle", TWO_PI, 5, 5.0, n_or(400), algos=("edp",)))
        default_runs = 20
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return ExperimentPreset(name, cells, default_runs if runs is None else runs, base_seed)


def run_algo(algo: str, inst, rel=None, time_limit: Optional[float] = 60.0,
             dp_max_entries: int = 2**30, horizon: Optional[float] = None):
    """Run one algorithm; returns (plan or None, count, status)."""
    if algo == "online":
        rep = simulate_online(inst, HorizonParams(math.inf if horizon is None else horizon))
        return None, rep.intercepted_count, "ok"
    if algo == "oracle":
        return None, solve_bruteforce(inst), "optimal"
    if rel is None:
        rel = build_relation(inst)
    if algo == "dp":
        plan = solve_dp(inst, rel, max_entries=dp_max_entries)
        return plan, plan.intercepted_count, "optimal"
    if algo == "edp":
        res = solve_edp(inst, rel)
        return res.plan, res.plan.intercepted_count, "ok"
    if algo == "bnb":
        res = solve_branch_and_bound(build_flow_model(inst, rel), time_limit=time_limit)
        return res.plan, res.plan.intercepted_count, res.status
    raise ValueError(f"unknown algorithm {algo!r}")


def _run_task(args) -> List[dict]:
    preset_name, cell, seed, time_limit, dp_max_entries = args
    inst = generate_instance(cell.space(), cell.config(seed))
    rel = build_relation(inst)
    rows = []
    for algo in cell.algos:
        start = time.perf_counter()
        try:
            plan, count, status = run_algo(
                algo, inst, rel, time_limit=time_limit, dp_max_entries=dp_max_entries,
                horizon=cell.horizon,
            )
            if plan is not None and not check_plan(inst, plan).valid:
                status = "invalid-plan"
        except StateSpaceTooLarge:
            count, status = "", "refused"
        except BDHDError as exc:
            count, status = "", f"error:{type(exc).__name__}"
        wall_ms = (time.perf_counter() - start) * 1000
        rows.append({
            "preset": preset_name,
            "topology": cell.topology,
            "size": "" if cell.size is None else repr(cell.size),
            "k": cell.k,
            "lambda": repr(cell.lam),
            "n_events": cell.n_events,
            "v_min": repr(cell.v_min),
            "v_max": repr(cell.v_max),
            "speed_sum": "" if cell.speed_sum is None else repr(cell.speed_sum),
            "horizon": "" if cell.horizon is None else repr(cell.horizon),
            "seed": seed,
            "algo": algo,
            "count": count,
            "n": inst.n,
            "rate": "" if count == "" else repr(count / inst.n if inst.n else 1.0),
            "wall_ms": f"{wall_ms:.3f}",
            "status": status,
        })
    return rows


def run_experiment(
    preset: ExperimentPreset, jobs: int = 1, time_limit: Optional[float] = 60.0
) -> List[dict]:
    """Run every (cell, seed) task; rows come back sorted by cell then seed."""
    tasks = [
        (preset.name, cell, seed, time_limit, preset.dp_max_entries)
        for cell in preset.cells for seed in preset.seeds()
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def write_rows(rows: Iterable[dict], fh) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)


def mean_rates(rows: Sequence[dict], key, algo: Optional[str] = None) -> Dict[tuple, float]:
    """Average the rate column grouped by ``key(row)``."""
    groups: Dict[tuple, List[float]] = {}
    for row in rows:
        if algo is not None and row["algo"] != algo:
            continue
        if row["rate"] == "":
            continue
        groups.setdefault(key(row), []).append(float(row["rate"]))
    return {g: sum(v) / len(v) for g, v in groups.items()}
