import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rankrefine.annotate import annotate, evaluate
from rankrefine.constraints import (
    LOWER,
    UPPER,
    CardinalityConstraint,
    ConstraintSet,
    deviation,
    parse_constraints,
)
from rankrefine.errors import ConstraintValidationError, PreconditionError
from rankrefine.query import apply_refinement


def _tuples_by_id(db, q):
    return {a.tuple.tid: a.tuple for a in annotate(q, db)}


def test_original_query_deviation(students_db, scholarship_query,
                                  scholarship_constraints):
    # top-6 holds two female awardees against a floor of three (shortfall 1/3)
    # and top-3 holds two high-income awardees against a ceiling of one
    # (excess 1/1), so the mean deviation is (1/3 + 1)/2 = 2/3
    ranking = evaluate(scholarship_query, students_db)
    by_id = _tuples_by_id(students_db, scholarship_query)
    assert deviation(ranking, by_id, scholarship_constraints) == Fraction(2, 3)


def test_refined_query_deviation_zero(students_db, scholarship_query,
                                      scholarship_constraints, ref_prime):
    q2 = apply_refinement(scholarship_query, ref_prime)
    ranking = evaluate(q2, students_db)
    by_id = _tuples_by_id(students_db, scholarship_query)
    assert deviation(ranking, by_id, scholarship_constraints) == 0


def test_single_constraint_deviation_third(students_db, scholarship_query):
    cs = ConstraintSet((CardinalityConstraint((("Gender", "F"),), 6, 3, LOWER),))
    ranking = evaluate(scholarship_query, students_db)
    by_id = _tuples_by_id(students_db, scholarship_query)
    assert deviation(ranking, by_id, cs) == Fraction(1, 3)


def test_upper_bound_already_met_is_zero(students_db, scholarship_query):
    cs = ConstraintSet((CardinalityConstraint((("Gender", "F"),), 6, 6, UPPER),))
    ranking = evaluate(scholarship_query, students_db)
    by_id = _tuples_by_id(students_db, scholarship_query)
    assert deviation(ranking, by_id, cs) == 0


def test_conjunctive_group(students_db, scholarship_query):
    cs = ConstraintSet((CardinalityConstraint(
        (("Gender", "F"), ("Income", "High")), 6, 1, LOWER),))
    ranking = evaluate(scholarship_query, students_db)
    by_id = _tuples_by_id(students_db, scholarship_query)
    # student 8 is the sole female high-income awardee in the top six
    assert deviation(ranking, by_id, cs) == 0


def test_short_ranking_rejected(students_db, scholarship_query):
    cs = ConstraintSet((CardinalityConstraint((("Gender", "F"),), 6, 3, LOWER),))
    by_id = _tuples_by_id(students_db, scholarship_query)
    with pytest.raises(PreconditionError):
        deviation([], by_id, cs)


def test_parse_constraints_example():
    text = json.dumps([
        {"group": {"Gender": "F"}, "k": 6, "sense": "lower", "n": 3},
        {"group": {"Income": "High"}, "k": 3, "sense": "upper", "n": 1},
    ])
    cs = parse_constraints(text)
    assert cs.k_star == 6
    first, second = cs.constraints
    assert first.group == (("Gender", "F"),)
    assert first.sense == LOWER and first.sign == 1
    assert second.sense == UPPER and second.sign == -1
    assert first.label() == "lb[Gender=F,k=6]=3"
    assert second.label() == "ub[Income=High,k=3]=1"


@pytest.mark.parametrize("bad", [
    [{"group": {"G": "F"}, "k": 4, "sense": "lower", "n": 0}],
    [{"group": {"G": "F"}, "k": 4, "sense": "lower", "n": 5}],
    [{"group": {"G": "F"}, "k": 0, "sense": "lower", "n": 1}],
    [{"group": {}, "k": 4, "sense": "lower", "n": 1}],
    [{"group": {"G": "F"}, "k": 4, "sense": "between", "n": 1}],
    [{"k": 4, "sense": "lower", "n": 1}],
    [],
])
def test_parse_rejects_invalid(bad):
    with pytest.raises(ConstraintValidationError):
        parse_constraints(json.dumps(bad))


def test_parse_rejects_malformed_json():
    with pytest.raises(ConstraintValidationError):
        parse_constraints("not json")


def test_k_star_is_max_k():
    cs = ConstraintSet((
        CardinalityConstraint((("g", "a"),), 3, 1, LOWER),
        CardinalityConstraint((("g", "b"),), 7, 2, UPPER),
        CardinalityConstraint((("h", "x"),), 5, 5, LOWER),
    ))
    assert cs.k_star == 7
    assert len(cs) == 3


@given(data=st.data())
def test_deviation_bounds_property(students_db, scholarship_query, data):
    by_id = _tuples_by_id(students_db, scholarship_query)
    full = evaluate(scholarship_query, students_db)
    n_cons = data.draw(st.integers(min_value=1, max_value=3))
    cons = []
    for _ in range(n_cons):
        attr, value = data.draw(st.sampled_from(
            [("Gender", "F"), ("Gender", "M"), ("Income", "High"), ("Income", "Low")]))
        k = data.draw(st.integers(min_value=1, max_value=len(full)))
        n = data.draw(st.integers(min_value=1, max_value=k))
        sense = data.draw(st.sampled_from([LOWER, UPPER]))
        cons.append(CardinalityConstraint(((attr, value),), k, n, sense))
    cs = ConstraintSet(tuple(cons))
    dev = deviation(full, by_id, cs)
    # shortfall is capped at n, excess at k - n, so per-constraint terms are
    # bounded by 1 and (k - n)/n respectively
    cap = max((1 if c.sense == LOWER else Fraction(c.k - c.n, c.n)) for c in cons)
    assert 0 <= dev <= cap
    if dev == 0:
        for c in cons:
            got = sum(1 for t in full[:c.k] if c.contains(by_id[t]))
            if c.sense == LOWER:
                assert got >= c.n
            else:
                assert got <= c.n
