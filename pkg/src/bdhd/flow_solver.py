"""Network-flow integer program for interception planning.

Each defender is a unit of flow leaving a source node (its start) and walking
through events along its own reachability edges. Binary variables:

* ``e_{i}_{ip}_{j}``: defender j (1-based) travels from event i to event ip
  (i = 0 is the source);
* ``x_{i}``: event i is intercepted.

Constraints: every intercepted event has an incoming edge, flow out of an
event never exceeds flow in (per defender), and each defender leaves its source
at most once. The objective maximizes the number of intercepted events.

The built-in solver is a depth-first branch and bound over event-by-event
assignment decisions; ``export_lp``/``solve_external`` hand the same model to
any LP-format MILP solver.
"""
from __future__ import annotations

import math
import os
import shlex
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidPlanError, SolutionParseError, SolverNotFoundError
from .instance import Instance
from .plan import InterceptionPlan
from .reachability import ReachabilityRelation
from .verify import check_plan

EXTERNAL_SOLVER_ENV = "BDHD_EXTERNAL_SOLVER"


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: Tuple[Tuple[int, int], ...]  # (variable index, coefficient)
    sense: str  # ">=" or "<="
    rhs: int


@dataclass
class FlowModel:
    n: int
    k: int
    edges: List[Tuple[int, int, int]]  # (i, ip, j) with j 0-based
    constraints: List[Constraint]
    relation: ReachabilityRelation
    edge_index: Dict[Tuple[int, int, int], int] = field(repr=False, default_factory=dict)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_vars(self) -> int:
        return len(self.edges) + self.n

    def intercept_var(self, i: int) -> int:
        return len(self.edges) + i - 1

    def var_name(self, idx: int) -> str:
        if idx < len(self.edges):
            i, ip, j = self.edges[idx]
            return f"e_{i}_{ip}_{j + 1}"
        return f"x_{idx - len(self.edges) + 1}"

    def objective(self) -> List[int]:
        return [self.intercept_var(i) for i in range(1, self.n + 1)]


def build_flow_model(inst: Instance, rel: ReachabilityRelation) -> FlowModel:
    n, k = rel.n, rel.k
    edges: List[Tuple[int, int, int]] = []
    for j in range(k):
        src, dst = np.nonzero(rel.reach[j])  # row-major: by tail event, then head event
        edges.extend((int(a), int(b), j) for a, b in zip(src, dst))
    edge_index = {e: idx for idx, e in enumerate(edges)}
    inflow: Dict[Tuple[int, int], List[int]] = {}
    outflow: Dict[Tuple[int, int], List[int]] = {}
    for idx, (i, ip, j) in enumerate(edges):
        outflow.setdefault((i, j), []).append(idx)
        inflow.setdefault((ip, j), []).append(idx)
    M = len(edges)
    constraints: List[Constraint] = []
    for i in range(1, n + 1):
        terms = [(e, 1) for j in range(k) for e in inflow.get((i, j), [])]
        terms.append((M + i - 1, -1))
        constraints.append(Constraint(f"intercept_{i}", tuple(terms), ">=", 0))
    for i in range(1, n + 1):
        for j in range(k):
            terms = [(e, 1) for e in outflow.get((i, j), [])]
            terms += [(e, -1) for e in inflow.get((i, j), [])]
            constraints.append(Constraint(f"flow_{i}_{j + 1}", tuple(terms), "<=", 0))
    for j in range(k):
        terms = [(e, 1) for e in outflow.get((0, j), [])]
        constraints.append(Constraint(f"source_{j + 1}", tuple(terms), "<=", 1))
    return FlowModel(n, k, edges, constraints, rel, edge_index)


# -- solution vectors <-> plans ----------------------------------------------


def constraint_violations(model: FlowModel, values: Sequence[int]) -> List[str]:
    bad = []
    for c in model.constraints:
        lhs = sum(coef * values[v] for v, coef in c.terms)
        ok = lhs >= c.rhs if c.sense == ">=" else lhs <= c.rhs
        if not ok:
            bad.append(f"{c.name}: {lhs} {c.sense} {c.rhs} fails")
    return bad


def values_from_plan(model: FlowModel, plan: InterceptionPlan) -> np.ndarray:
    values = np.zeros(model.n_vars, dtype=np.int64)
    for j, seq in enumerate(plan.assignments):
        here = 0
        for e in seq:
            values[model.edge_index[(here, e, j)]] = 1
            values[model.intercept_var(e)] = 1
            here = e
    return values


def plan_from_values(model: FlowModel, values: Sequence[int]) -> InterceptionPlan:
    """Decompose a feasible 0/1 solution into one path per defender.

    Defenders are traced in index order; an event already claimed by an
    earlier defender is left off later lists (the later defender still passes
    through it, so its remaining hops stay feasible).
    """
    bad = constraint_violations(model, values)
    if bad:
        raise InvalidPlanError("solution violates the flow constraints: " + "; ".join(bad[:5]), bad)
    out_edges: Dict[Tuple[int, int], List[int]] = {}
    for idx, (i, ip, j) in enumerate(model.edges):
        if values[idx]:
            out_edges.setdefault((i, j), []).append(ip)
    claimed = set()
    lists = []
    for j in range(model.k):
        seq = []
        here = 0
        while (here, j) in out_edges:
            here = min(out_edges[(here, j)])
            if here not in claimed:
                claimed.add(here)
                seq.append(here)
        lists.append(seq)
    return InterceptionPlan.from_assignments(lists)


# -- branch and bound ----------------------------------------------------------


@dataclass
class BnbResult:
    plan: InterceptionPlan
    status: str  # "optimal" or "feasible-timeout"
    nodes: int
    values: np.ndarray
    objective: int


class _Timeout(Exception):
    pass


def chain_table(rel: ReachabilityRelation) -> np.ndarray:
    """longest[d, a, i]: most events defender d can chain after a using only events >= i."""
    k, n = rel.k, rel.n
    longest = np.zeros((k, n + 1, n + 2), dtype=np.int32)
    for d in range(k):
        r = rel.reach[d]
        for i in range(n, 0, -1):
            via_i = 1 + longest[d, i, i + 1]
            longest[d, :, i] = np.where(r[:, i], np.maximum(longest[d, :, i + 1], via_i), longest[d, :, i + 1])
    return longest


def node_upper_bound(rel, longest, i: int, last: Sequence[int], count: int) -> int:
    """Admissible bound for a node that has decided events 1..i-1.

    The smaller of: events from i on reachable by some defender's current
    position, and the sum of each defender's longest remaining chain.
    """
    if i > rel.n:
        return count
    last = np.asarray(last)
    reachable = rel.reach[np.arange(rel.k), last, i:].any(axis=0).sum()
    chains = longest[np.arange(rel.k), last, i].sum()
    return count + int(min(reachable, chains))


def solve_branch_and_bound(
    model: FlowModel,
    time_limit: Optional[float] = None,
    warm_start: Optional[InterceptionPlan] = None,
    memo_limit: int = 2_000_000,
) -> BnbResult:
    """Exact search over assignments of events (in time order) to defenders.

    ``time_limit`` of None means no limit. A ``warm_start`` plan, if given,
    seeds the incumbent. The returned plan is obtained by decomposing the
    incumbent's flow solution.
    """
    if time_limit is not None and not time_limit > 0:
        raise ValueError("time_limit must be positive")
    rel = model.relation
    n, k = model.n, model.k
    deadline = math.inf if time_limit is None else time.perf_counter() + time_limit
    reach = rel.reach
    longest = chain_table(rel)
    rows = np.arange(k)

    best_count = -1
    best_lists: List[List[int]] = [[] for _ in range(k)]
    if warm_start is not None:
        if not check_plan_against_model(model, warm_start):
            raise InvalidPlanError("warm start plan is not feasible for this model")
        best_count = warm_start.intercepted_count
        best_lists = [list(s) for s in warm_start.assignments]

    last = [0] * k
    paths: List[List[int]] = [[] for _ in range(k)]
    seen: Dict[tuple, int] = {}
    nodes = 0

    def visit(i: int, count: int) -> None:
        nonlocal best_count, best_lists, nodes
        nodes += 1
        if nodes & 1023 == 0 and time.perf_counter() > deadline:
            raise _Timeout
        if i > n:
            if count > best_count:
                best_count = count
                best_lists = [list(p) for p in paths]
            return
        key = (i, tuple(last))
        prior = seen.get(key)
        if prior is not None and prior >= count:
            return
        if prior is not None or len(seen) < memo_limit:
            seen[key] = count
        lastv = np.fromiter(last, dtype=np.int64, count=k)
        can = reach[rows, lastv, i]
        if not can.any():
            visit(i + 1, count)
            return
        reachable = int(reach[rows, lastv, i:].any(axis=0).sum())
        chains = int(longest[rows, lastv, i].sum())
        if count + min(reachable, chains) <= best_count:
            return
        for d in np.flatnonzero(can):
            prev = last[d]
            last[d] = i
            paths[d].append(i)
            visit(i + 1, count + 1)
            paths[d].pop()
            last[d] = prev
        visit(i + 1, count)

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * n + 1000))
    status = "optimal"
    try:
        visit(1, 0)
    except _Timeout:
        status = "feasible-timeout"
    finally:
        sys.setrecursionlimit(old_limit)
    if best_count < 0:
        best_lists = [[] for _ in range(k)]
    values = values_from_plan(model, InterceptionPlan.from_assignments(best_lists))
    plan = plan_from_values(model, values)
    objective = int(values[model.n_edges:].sum())
    return BnbResult(plan, status, nodes, values, objective)


def check_plan_against_model(model: FlowModel, plan: InterceptionPlan) -> bool:
    if len(plan.assignments) != model.k:
        return False
    seen = set()
    for j, seq in enumerate(plan.assignments):
        here = 0
        for e in seq:
            if (here, e, j) not in model.edge_index or e in seen:
                return False
            seen.add(e)
            here = e
    return True


# -- LP export and external solvers -------------------------------------------


def _fmt_terms(model: FlowModel, terms) -> str:
    return " ".join(f"{'+' if c > 0 else '-'} {'' if abs(c) == 1 else str(abs(c)) + ' '}{model.var_name(v)}" for v, c in terms)


def write_lp(model: FlowModel) -> str:
    lines = [
        f"\\ interception flow model: n={model.n} k={model.k} edges={model.n_edges}",
        "Maximize",
        " obj: " + _fmt_terms(model, [(v, 1) for v in model.objective()]),
        "Subject To",
    ]
    for c in model.constraints:
        if not c.terms:
            # trivially satisfied (0 <= rhs); many LP readers reject empty rows
            lines.append(f"\\ {c.name}: empty")
            continue
        lines.append(f" {c.name}: {_fmt_terms(model, c.terms)} {c.sense} {c.rhs}")
    lines.append("Binary")
    lines.extend(f" {model.var_name(v)}" for v in range(model.n_vars))
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(model: FlowModel, path) -> None:
    Path(path).write_text(write_lp(model))


def parse_solution(model: FlowModel, text: str) -> Tuple[np.ndarray, str]:
    """Parse ``name value`` lines; ``# status: X`` comments are reported back."""
    index = {model.var_name(v): v for v in range(model.n_vars)}
    values = np.zeros(model.n_vars, dtype=np.int64)
    status = "unknown"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.lower().startswith("status"):
                status = body.split(":", 1)[-1].split()[-1] if body.split(":", 1)[-1].split() else status
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SolutionParseError(f"line {lineno}: expected 'name value', got {raw!r}")
        name, val = parts
        if name not in index:
            raise SolutionParseError(f"line {lineno}: unknown variable {name!r}")
        try:
            x = float(val)
        except ValueError:
            raise SolutionParseError(f"line {lineno}: bad value {val!r}") from None
        r = round(x)
        if abs(x - r) > 1e-6 or r not in (0, 1):
            raise InvalidPlanError(f"variable {name} = {x} is not binary")
        values[index[name]] = r
    return values, status


@dataclass
class ExternalResult:
    plan: InterceptionPlan
    status: str
    values: np.ndarray


def resolve_solver_command(solver_command=None) -> List[str]:
    cmd = solver_command if solver_command is not None else os.environ.get(EXTERNAL_SOLVER_ENV)
    if not cmd:
        raise SolverNotFoundError(f"no external solver configured (set {EXTERNAL_SOLVER_ENV})")
    argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
    if shutil.which(argv[0]) is None and not Path(argv[0]).is_file():
        raise SolverNotFoundError(f"external solver {argv[0]!r} not found")
    return argv


def solve_external(
    inst: Instance,
    model: FlowModel,
    lp_path,
    solver_command=None,
    time_limit: float = 60.0,
) -> ExternalResult:
    """Run an LP-format MILP solver as a subprocess and validate its answer.

    The solver is called as ``<cmd> lp_path --time-limit <s> --sol <out>`` and
    must write ``name value`` lines to ``out``.
    """
    argv = resolve_solver_command(solver_command)
    lp_path = Path(lp_path)
    if not lp_path.exists():
        export_lp(model, lp_path)
    with tempfile.TemporaryDirectory() as tmp:
        sol_path = Path(tmp) / "solution.txt"
        cmd = argv + [str(lp_path), "--time-limit", str(time_limit), "--sol", str(sol_path)]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=time_limit * 2 + 30)
        except FileNotFoundError:
            raise SolverNotFoundError(f"external solver {argv[0]!r} not found") from None
        if proc.returncode != 0:
            raise SolutionParseError(
                f"external solver exited with {proc.returncode}: {proc.stderr.strip()[:500]}"
            )
        if not sol_path.exists():
            raise SolutionParseError("external solver wrote no solution file")
        values, status = parse_solution(model, sol_path.read_text())
    plan = plan_from_values(model, values)
    report = check_plan(inst, plan)
    if not report.valid:
        raise InvalidPlanError("external solution fails the plan check", report.violations)
    return ExternalResult(plan, status, values)
