"""Ranking evaluation and provenance annotation.

``annotate`` materializes the predicate-free, DISTINCT-free version of the
query over the database, ranked, and labels every tuple with:

* its base rank (position in that unrestricted ranking),
* its lineage (the predicate atoms its attribute values instantiate),
* its shadow set (better-ranked tuples sharing its DISTINCT key),
* its lineage equivalence class.

The annotated universe contains the output of every refinement, and
filtering it is how both the exhaustive engine and the MILP avoid
re-running joins per candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .data import Database, Relation, Tuple, NUMERICAL, natural_join
from .errors import KindMismatchError, PreconditionError
from .query import Query, satisfies

# A lineage atom is ("cat", attr, value) or ("num", attr, op, value): the
# indicator that a tuple's value instantiates for one predicate.
Atom = tuple

Ranking = list[int]  # tuple ids, positions 1..m


@dataclass(frozen=True)
class AnnotatedTuple:
    tuple: Tuple
    base_rank: int
    lineage: frozenset[Atom]
    shadow: tuple[int, ...]
    lineage_class: int


def joined_relation(q: Query, d: Database) -> Relation:
    rels = [d.get(name) for name in q.tables]
    return reduce(natural_join, rels)


def _order_key(rel: Relation, q: Query):
    attr, direction = q.order_by
    if not rel.schema.has(attr):
        raise PreconditionError(f"ORDER BY attribute {attr!r} not in joined schema")
    if rel.schema.kind_of(attr) != NUMERICAL:
        raise KindMismatchError(f"ORDER BY attribute {attr!r} is not numerical")
    sign = -1 if direction == "DESC" else 1

    def key(t: Tuple):
        # ties broken by ascending tuple id, everywhere, so that ranks,
        # positions and deviations agree across evaluator, oracle and MILP
        return (sign * t[attr], t.tid)

    return key


def distinct_key_attrs(rel: Relation, q: Query) -> tuple[str, ...]:
    if not q.distinct:
        return ()
    if q.select_attrs == ("*",):
        return rel.schema.names
    return q.select_attrs


def _ranked_universe(q: Query, d: Database) -> tuple[Relation, list[Tuple]]:
    rel = joined_relation(q, d)
    for p in q.numeric_preds + q.cat_preds:
        if not rel.schema.has(p.attribute):
            raise PreconditionError(f"predicate attribute {p.attribute!r} not in joined schema")
    return rel, sorted(rel.rows, key=_order_key(rel, q))


def lineage_of(t: Tuple, q: Query) -> frozenset[Atom]:
    atoms: set[Atom] = set()
    for p in q.cat_preds:
        atoms.add(("cat", p.attribute, t[p.attribute]))
    for p in q.numeric_preds:
        atoms.add(("num", p.attribute, p.op, t[p.attribute]))
    return frozenset(atoms)


def annotate(q: Query, d: Database) -> list[AnnotatedTuple]:
    rel, ranked = _ranked_universe(q, d)
    key_attrs = distinct_key_attrs(rel, q)
    seen_keys: dict[tuple, list[int]] = {}
    class_ids: dict[frozenset, int] = {}
    out: list[AnnotatedTuple] = []
    for rank, t in enumerate(ranked, start=1):
        lineage = lineage_of(t, q)
        if lineage not in class_ids:
            class_ids[lineage] = len(class_ids)
        shadow: tuple[int, ...] = ()
        if key_attrs:
            key = tuple(t[a] for a in key_attrs)
            shadow = tuple(seen_keys.get(key, ()))
            seen_keys.setdefault(key, []).append(t.tid)
        out.append(
            AnnotatedTuple(
                tuple=t,
                base_rank=rank,
                lineage=lineage,
                shadow=shadow,
                lineage_class=class_ids[lineage],
            )
        )
    return out


def lineage_classes(annotated: list[AnnotatedTuple]) -> dict[int, list[AnnotatedTuple]]:
    """Partition by equal lineage; each class internally in base-rank order."""
    if not annotated:
        raise PreconditionError("no annotated tuples")
    classes: dict[int, list[AnnotatedTuple]] = {}
    for at in sorted(annotated, key=lambda a: a.base_rank):
        classes.setdefault(at.lineage_class, []).append(at)
    return classes


def filter_annotated(annotated: list[AnnotatedTuple], q: Query, key_attrs: tuple[str, ...]) -> Ranking:
    """Provenance-accelerated evaluation: filter the annotated universe by the
    (refined) predicates, then dedup on the DISTINCT key in base-rank order.
    Agrees exactly with `evaluate`."""
    seen: set[tuple] = set()
    ranking: Ranking = []
    for at in annotated:  # already in base_rank order
        if not satisfies(at.tuple, q):
            continue
        if key_attrs:
            key = tuple(at.tuple[a] for a in key_attrs)
            if key in seen:
                continue
            seen.add(key)
        ranking.append(at.tuple.tid)
    return ranking


def evaluate(q: Query, d: Database) -> Ranking:
    """Direct evaluation: join, filter, rank, DISTINCT-dedup keeping the
    best-ranked representative."""
    rel, ranked = _ranked_universe(q, d)
    key_attrs = distinct_key_attrs(rel, q)
    seen: set[tuple] = set()
    ranking: Ranking = []
    for t in ranked:
        if not satisfies(t, q):
            continue
        if key_attrs:
            key = tuple(t[a] for a in key_attrs)
            if key in seen:
                continue
            seen.add(key)
        ranking.append(t.tid)
    return ranking


def numeric_domain(annotated: list[AnnotatedTuple], attr: str) -> list[Fraction]:
    return sorted({at.tuple[attr] for at in annotated})


def cat_domain(annotated: list[AnnotatedTuple], attr: str) -> list[str]:
    return sorted({at.tuple[attr] for at in annotated})
