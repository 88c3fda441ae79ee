"""Deterministic branch-and-bound MILP solver over scipy's HiGHS LP backend.

Best-first search on the LP relaxation bound, with ties broken by node
creation order so runs are reproducible.  Incumbents come from integral LP
solutions and from a rounding heuristic at each node.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .model import BINARY, MILPModel, Solution

INT_TOL = 1e-6
OBJ_TOL = 1e-9


@dataclass
class SolveOptions:
    timeout_s: float | None = None
    node_limit: int | None = None
    int_tol: float = INT_TOL


@dataclass
class _Matrices:
    c: np.ndarray
    a_ub: np.ndarray | None
    b_ub: np.ndarray | None
    a_eq: np.ndarray | None
    b_eq: np.ndarray | None
    lb: np.ndarray
    ub: np.ndarray
    names: list[str]
    bin_idx: list[int]


def _build_matrices(model: MILPModel) -> _Matrices:
    index = model.var_index()
    n = len(model.variables)
    c = np.zeros(n)
    for name, coef in model.objective.items():
        c[index[name]] = coef
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for row in model.rows:
        vec = np.zeros(n)
        for name, coef in row.coeffs.items():
            vec[index[name]] = coef
        if row.sense == "<=":
            ub_rows.append(vec)
            ub_rhs.append(row.rhs)
        elif row.sense == ">=":
            ub_rows.append(-vec)
            ub_rhs.append(-row.rhs)
        else:
            eq_rows.append(vec)
            eq_rhs.append(row.rhs)
    lb = np.array([v.lb for v in model.variables])
    ub = np.array([v.ub for v in model.variables])
    bin_idx = [i for i, v in enumerate(model.variables) if v.kind == BINARY]
    return _Matrices(
        c=c,
        a_ub=np.array(ub_rows) if ub_rows else None,
        b_ub=np.array(ub_rhs) if ub_rhs else None,
        a_eq=np.array(eq_rows) if eq_rows else None,
        b_eq=np.array(eq_rhs) if eq_rhs else None,
        lb=lb,
        ub=ub,
        names=[v.name for v in model.variables],
        bin_idx=bin_idx,
    )


def _solve_lp(m: _Matrices, lb: np.ndarray, ub: np.ndarray):
    res = linprog(
        m.c,
        A_ub=m.a_ub,
        b_ub=m.b_ub,
        A_eq=m.a_eq,
        b_eq=m.b_eq,
        bounds=np.column_stack([lb, ub]),
        method="highs",
    )
    return res


def solve_lp_relaxation(model: MILPModel) -> Solution:
    """Solve the LP relaxation of ``model`` (binaries relaxed to [0, 1])."""
    m = _build_matrices(model)
    res = _solve_lp(m, m.lb, m.ub)
    if not res.success:
        return Solution(status="infeasible", stats={"lp_status": res.status})
    assignment = dict(zip(m.names, (float(x) for x in res.x)))
    return Solution(
        status="optimal",
        assignment=assignment,
        objective_value=float(res.fun) + model.objective_constant,
        stats={"lp_iterations": int(getattr(res, "nit", 0))},
    )


@dataclass(order=True)
class _Node:
    bound: float
    serial: int
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)
    x: np.ndarray = field(compare=False)


def _fractional(x: np.ndarray, bin_idx: list[int], tol: float) -> int | None:
    """Most-fractional binary index, ties broken by lowest variable index."""
    best, best_gap = None, tol
    for i in bin_idx:
        gap = abs(x[i] - round(x[i]))
        if gap > best_gap + 1e-15:
            best, best_gap = i, gap
    return best


def _check_feasible(m: _Matrices, x: np.ndarray) -> bool:
    if m.a_ub is not None and np.any(m.a_ub @ x > m.b_ub + 1e-7):
        return False
    if m.a_eq is not None and np.any(np.abs(m.a_eq @ x - m.b_eq) > 1e-7):
        return False
    return bool(np.all(x >= m.lb - 1e-9) and np.all(x <= m.ub + 1e-9))


def solve(model: MILPModel, options: SolveOptions | None = None) -> Solution:
    """Minimize ``model`` exactly.  Returns status optimal/infeasible/timeout."""
    options = options or SolveOptions()
    start = time.monotonic()
    model.validate()
    m = _build_matrices(model)

    nodes_explored = 0
    lp_iterations = 0
    incumbent_x: np.ndarray | None = None
    incumbent_obj = math.inf

    def timed_out() -> bool:
        return options.timeout_s is not None and time.monotonic() - start > options.timeout_s

    root = _solve_lp(m, m.lb, m.ub)
    lp_iterations += int(getattr(root, "nit", 0))
    if not root.success:
        return Solution(status="infeasible", stats={"nodes": 1, "lp_iterations": lp_iterations,
                                                    "wall_s": time.monotonic() - start})

    serial = 0
    heap: list[_Node] = [_Node(float(root.fun), serial, m.lb.copy(), m.ub.copy(),
                               np.asarray(root.x))]
    hit_timeout = False

    while heap:
        if timed_out():
            hit_timeout = True
            break
        if options.node_limit is not None and nodes_explored >= options.node_limit:
            hit_timeout = True
            break
        node = heapq.heappop(heap)
        if node.bound >= incumbent_obj - OBJ_TOL:
            break  # best-first: remaining nodes cannot improve
        nodes_explored += 1
        branch = _fractional(node.x, m.bin_idx, options.int_tol)
        if branch is None:
            if node.bound < incumbent_obj - OBJ_TOL:
                incumbent_obj = node.bound
                incumbent_x = node.x.copy()
            continue
        # Rounding heuristic: snap binaries, keep continuous values.
        rounded = node.x.copy()
        for i in m.bin_idx:
            rounded[i] = round(rounded[i])
        if _check_feasible(m, rounded):
            obj = float(m.c @ rounded)
            if obj < incumbent_obj - OBJ_TOL:
                incumbent_obj = obj
                incumbent_x = rounded
        for fixed in (0.0, 1.0):
            lb, ub = node.lb.copy(), node.ub.copy()
            lb[branch] = ub[branch] = fixed
            res = _solve_lp(m, lb, ub)
            lp_iterations += int(getattr(res, "nit", 0))
            if not res.success:
                continue
            bound = float(res.fun)
            if bound >= incumbent_obj - OBJ_TOL:
                continue
            serial += 1
            heapq.heappush(heap, _Node(bound, serial, lb, ub, np.asarray(res.x)))

    stats = {
        "nodes": nodes_explored,
        "lp_iterations": lp_iterations,
        "wall_s": time.monotonic() - start,
    }
    if incumbent_x is None:
        return Solution(status="timeout" if hit_timeout else "infeasible", stats=stats)
    binset = set(m.bin_idx)
    assignment = {}
    for i, name in enumerate(m.names):
        x = float(incumbent_x[i])
        if i in binset:
            x = float(round(x))
        assignment[name] = x
    return Solution(
        status="timeout" if hit_timeout else "optimal",
        assignment=assignment,
        objective_value=incumbent_obj + model.objective_constant,
        stats=stats,
    )
