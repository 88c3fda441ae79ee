import math
import random

import pytest

from rankrefine.milp.model import (
    BINARY,
    CONTINUOUS,
    MILPModel,
    Row,
    Variable,
    parse_lp_text,
    to_lp_text,
)
from rankrefine.milp.solver import SolveOptions, solve, solve_lp_relaxation


def _small_model():
    return MILPModel(
        variables=[
            Variable("x", CONTINUOUS, 0.0, 10.0),
            Variable("b", BINARY, 0.0, 1.0),
        ],
        rows=[
            Row("lo", {"x": 1.0, "b": -3.0}, ">=", 2.0),
            Row("cap", {"x": 1.0}, "<=", 9.0),
            Row("tie", {"x": 1.0, "b": 1.0}, "=", 6.0),
        ],
        objective={"x": 1.0, "b": -0.5},
        objective_constant=1.25,
    )


def test_validate_accepts_well_formed():
    _small_model().validate()


def test_validate_rejects_duplicate_names():
    m = _small_model()
    m.variables.append(Variable("x", CONTINUOUS, 0.0, 1.0))
    with pytest.raises(ValueError):
        m.validate()


def test_validate_rejects_undeclared_in_row():
    m = _small_model()
    m.rows.append(Row("bad", {"ghost": 1.0}, "<=", 0.0))
    with pytest.raises(ValueError):
        m.validate()


def test_validate_rejects_undeclared_in_objective():
    m = _small_model()
    m.objective["ghost"] = 1.0
    with pytest.raises(ValueError):
        m.validate()


def test_binary_bounds_enforced():
    with pytest.raises(ValueError):
        Variable("b", BINARY, 0.0, 2.0)


def test_infinite_bounds_rejected():
    with pytest.raises(ValueError):
        Variable("x", CONTINUOUS, 0.0, float("inf"))


def test_unknown_sense_rejected():
    with pytest.raises(ValueError):
        Row("r", {"x": 1.0}, "<", 0.0)


def test_lp_text_round_trip():
    m = _small_model()
    text = to_lp_text(m)
    m2 = parse_lp_text(text)
    assert [ (v.name, v.kind, v.lb, v.ub) for v in m2.variables ] == \
        [ (v.name, v.kind, v.lb, v.ub) for v in m.variables ]
    assert [ (r.name, r.coeffs, r.sense, r.rhs) for r in m2.rows ] == \
        [ (r.name, r.coeffs, r.sense, r.rhs) for r in m.rows ]
    assert m2.objective == m.objective
    assert m2.objective_constant == m.objective_constant
    # and the text is a fixed point
    assert to_lp_text(m2) == text


def test_lp_text_round_trip_random_models():
    rng = random.Random(11)
    for _ in range(30):
        variables = []
        for i in range(rng.randint(1, 6)):
            if rng.random() < 0.5:
                variables.append(Variable(f"b{i}", BINARY, 0.0, 1.0))
            else:
                lo = rng.randint(-5, 0)
                variables.append(Variable(f"x{i}", CONTINUOUS, float(lo),
                                          float(lo + rng.randint(0, 9))))
        rows = []
        for j in range(rng.randint(0, 5)):
            coeffs = {v.name: round(rng.uniform(-4, 4), 3)
                      for v in rng.sample(variables, rng.randint(1, len(variables)))}
            rows.append(Row(f"r{j}", coeffs, rng.choice(["<=", ">=", "="]),
                            round(rng.uniform(-8, 8), 3)))
        m = MILPModel(variables=variables, rows=rows,
                      objective={variables[0].name: round(rng.uniform(-2, 2), 3)},
                      objective_constant=round(rng.uniform(-1, 1), 3))
        m2 = parse_lp_text(to_lp_text(m))
        assert to_lp_text(m2) == to_lp_text(m)


def test_trivial_lp_min_x_at_least_two():
    m = MILPModel(variables=[Variable("x", CONTINUOUS, 0.0, 100.0)],
                  rows=[Row("lo", {"x": 1.0}, ">=", 2.0)],
                  objective={"x": 1.0})
    sol = solve(m)
    assert sol.status == "optimal"
    assert math.isclose(sol.objective_value, 2.0, abs_tol=1e-9)
    assert math.isclose(sol.value("x"), 2.0, abs_tol=1e-9)


def test_objective_constant_carried_through():
    m = MILPModel(variables=[Variable("x", CONTINUOUS, 0.0, 100.0)],
                  rows=[Row("lo", {"x": 1.0}, ">=", 2.0)],
                  objective={"x": 1.0}, objective_constant=5.0)
    sol = solve(m)
    assert math.isclose(sol.objective_value, 7.0, abs_tol=1e-9)


def test_infeasible_pair():
    m = MILPModel(variables=[Variable("x", CONTINUOUS, 0.0, 10.0)],
                  rows=[Row("lo", {"x": 1.0}, ">=", 6.0),
                        Row("hi", {"x": 1.0}, "<=", 5.0)],
                  objective={"x": 1.0})
    assert solve(m).status == "infeasible"
    assert solve_lp_relaxation(m).status == "infeasible"


def test_binary_forced_by_row():
    m = MILPModel(variables=[Variable("b", BINARY, 0.0, 1.0)],
                  rows=[Row("lo", {"b": 2.0}, ">=", 1.0)],
                  objective={"b": 1.0})
    sol = solve(m)
    assert sol.status == "optimal"
    assert math.isclose(sol.value("b"), 1.0, abs_tol=1e-6)


def test_solution_value_of_missing_name():
    m = MILPModel(variables=[Variable("x", CONTINUOUS, 0.0, 1.0)],
                  objective={"x": 1.0})
    sol = solve(m)
    with pytest.raises(KeyError):
        sol.value("y")


def test_solve_options_node_limit():
    # with zero explorable nodes and no incumbent the solver reports timeout
    m = MILPModel(
        variables=[Variable(f"b{i}", BINARY, 0.0, 1.0) for i in range(6)],
        rows=[Row("sum", {f"b{i}": 1.0 for i in range(6)}, "=", 3.0),
              Row("knap", {f"b{i}": float(i + 1) for i in range(6)}, "<=", 7.0)],
        objective={f"b{i}": -float(i % 3 + 1) for i in range(6)},
    )
    full = solve(m)
    assert full.status == "optimal"
    capped = solve(m, SolveOptions(node_limit=1))
    assert capped.status in ("optimal", "timeout")
    if capped.status == "optimal":
        assert math.isclose(capped.objective_value, full.objective_value,
                            abs_tol=1e-6)
