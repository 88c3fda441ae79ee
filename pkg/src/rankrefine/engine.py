"""End-to-end refinement runs: compile, solve, extract, and re-verify.

Whatever the solver reports, the extracted refinement is re-evaluated from
scratch in exact arithmetic before being returned, so a "refined" result is
always a true certificate: its top-k prefixes deviate by at most epsilon and
its reported distance is the exact one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .annotate import annotate, distinct_key_attrs, filter_annotated, joined_relation
from .constraints import ConstraintSet, deviation
from .data import Database, format_number
from .distances import JACCARD, KENDALL, PRED, DistanceKind, dis_jaccard, dis_kendall, dis_pred
from .errors import InternalConsistencyError, PreconditionError
from .milp import BuildOptions, SolveOptions, build_model, extract_refinement, solve, to_lp_text
from .oracle import DEFAULT_CAP, exhaustive_solve
from .query import Query, Refinement, apply_refinement, render_sql

ENGINES = ("milp", "milp+opt", "naive", "naive+prov")

REFINED = "refined"
NO_REFINEMENT = "no_refinement"
TIMEOUT = "timeout"


@dataclass
class RunConfig:
    query: Query
    db: Database
    constraints: ConstraintSet
    epsilon: Fraction
    kind: DistanceKind
    engine: str = "milp+opt"
    timeout_s: float | None = None
    prune: bool = True   # milp+opt only
    merge: bool = True   # milp+opt only
    relax: bool = True   # milp+opt only
    oracle_cap: int = DEFAULT_CAP
    lp_dump: str | None = None

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise PreconditionError(f"unknown engine {self.engine!r}")


@dataclass
class RefineResult:
    status: str
    refinement: Refinement | None = None
    refined_sql: str | None = None
    distance: Fraction | int | None = None
    deviation: Fraction | None = None
    topk: list[dict] = field(default_factory=list)
    timing_ms: dict = field(default_factory=dict)
    model_stats: dict = field(default_factory=dict)


def _verified_result(config: RunConfig, ref: Refinement, status: str) -> RefineResult:
    """Re-evaluate the refined query exactly and package the certificate."""
    q, d, cs = config.query, config.db, config.constraints
    q2 = apply_refinement(q, ref)
    ann = annotate(q, d)
    rel = joined_relation(q, d)
    key_attrs = distinct_key_attrs(rel, q)
    tuples_by_id = {at.tuple.tid: at.tuple for at in ann}
    ranking = filter_annotated(ann, q2, key_attrs)
    k_star = cs.k_star
    if len(ranking) < k_star:
        raise InternalConsistencyError(
            f"refined query returns {len(ranking)} tuples, fewer than k*={k_star}")
    dev = deviation(ranking, tuples_by_id, cs)
    if dev > config.epsilon:
        raise InternalConsistencyError(
            f"refined query deviates by {dev}, above epsilon {config.epsilon}")
    if config.kind.name == PRED:
        dist = dis_pred(q, q2)
    else:
        original = filter_annotated(ann, q, key_attrs)
        if config.kind.name == JACCARD:
            dist = dis_jaccard(original, ranking, k_star)
        else:
            dist = dis_kendall(original, ranking, k_star)
    topk = []
    for pos, tid in enumerate(ranking[:k_star], start=1):
        groups = [c.label() for c in cs if c.contains(tuples_by_id[tid])]
        topk.append({"position": pos, "tid": tid, "groups": groups})
    return RefineResult(
        status=status,
        refinement=ref,
        refined_sql=render_sql(q2),
        distance=dist,
        deviation=dev,
        topk=topk,
    )


def run(config: RunConfig) -> RefineResult:
    t0 = time.monotonic()
    if config.engine in ("naive", "naive+prov"):
        result = _run_oracle(config)
    else:
        result = _run_milp(config)
    result.timing_ms["total_ms"] = (time.monotonic() - t0) * 1000.0
    return result


def _run_oracle(config: RunConfig) -> RefineResult:
    t0 = time.monotonic()
    oracle = exhaustive_solve(
        config.query,
        config.db,
        config.constraints,
        config.epsilon,
        config.kind,
        use_provenance=(config.engine == "naive+prov"),
        cap=config.oracle_cap,
    )
    solve_ms = (time.monotonic() - t0) * 1000.0
    stats = {"candidates_checked": oracle.candidates_checked}
    if oracle.status == NO_REFINEMENT:
        return RefineResult(status=NO_REFINEMENT, model_stats=stats,
                            timing_ms={"setup_ms": 0.0, "solve_ms": solve_ms})
    result = _verified_result(config, oracle.refinement, REFINED)
    result.model_stats = stats
    result.timing_ms = {"setup_ms": 0.0, "solve_ms": solve_ms}
    return result


def _run_milp(config: RunConfig) -> RefineResult:
    opt = config.engine == "milp+opt"
    options = BuildOptions(
        relevancy_prune=opt and config.prune,
        merge_lineage=opt and config.merge,
        relax_single_sense=opt and config.relax,
    )
    t0 = time.monotonic()
    built = build_model(config.query, config.db, config.constraints,
                        config.epsilon, config.kind, options)
    setup_ms = (time.monotonic() - t0) * 1000.0
    if config.lp_dump:
        with open(config.lp_dump, "w", encoding="utf-8") as fh:
            fh.write(to_lp_text(built.model))
    t1 = time.monotonic()
    solution = solve(built.model, SolveOptions(timeout_s=config.timeout_s))
    solve_ms = (time.monotonic() - t1) * 1000.0
    timing = {"setup_ms": setup_ms, "solve_ms": solve_ms}
    stats = dict(built.stats)
    stats.update(solution.stats)
    if solution.status == "infeasible":
        return RefineResult(status=NO_REFINEMENT, timing_ms=timing, model_stats=stats)
    if solution.status == "timeout" and not solution.assignment:
        return RefineResult(status=TIMEOUT, timing_ms=timing, model_stats=stats)
    ref = extract_refinement(built, solution)
    status = TIMEOUT if solution.status == "timeout" else REFINED
    result = _verified_result(config, ref, status)
    result.timing_ms = timing
    result.model_stats = stats
    return result


def result_to_dict(result: RefineResult, include_timing: bool = True) -> dict:
    """JSON-ready form; deterministic apart from the timing block."""
    def num(x):
        if isinstance(x, Fraction):
            return format_number(x)
        return x

    stats = {k: v for k, v in result.model_stats.items() if k != "wall_s"}
    out = {
        "status": result.status,
        "refined_sql": result.refined_sql,
        "distance": num(result.distance),
        "deviation": num(result.deviation),
        "topk": result.topk,
        "model_stats": stats,
    }
    if result.refinement is not None:
        out["refinement"] = {
            "numeric": {
                f"{attr} {op}": format_number(v)
                for (attr, op), v in sorted(result.refinement.numeric_constants.items())
            },
            "categorical": {
                attr: sorted(vals)
                for attr, vals in sorted(result.refinement.cat_values.items())
            },
        }
    if include_timing:
        out["timing_ms"] = {k: round(v, 3) for k, v in result.timing_ms.items()}
    return out
