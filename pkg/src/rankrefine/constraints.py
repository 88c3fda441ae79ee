"""Cardinality constraints over top-k prefixes and the deviation measure.

Deviation is computed with exact rational arithmetic so that "deviation is
zero" is a crisp statement, never a float comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .data import Tuple
from .errors import ConstraintValidationError, PreconditionError

LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class CardinalityConstraint:
    """Bound of ``n`` tuples of ``group`` within the top ``k``; the group is a
    conjunction of categorical equalities."""

    group: tuple[tuple[str, str], ...]
    k: int
    n: int
    sense: str

    def __post_init__(self):
        if not self.group:
            raise ConstraintValidationError("constraint group must be non-empty")
        if self.sense not in (LOWER, UPPER):
            raise ConstraintValidationError(f"unknown sense {self.sense!r}")
        if self.n < 1:
            raise ConstraintValidationError(f"bound n must be >= 1, got {self.n}")
        if self.k < 1:
            raise ConstraintValidationError(f"prefix size k must be >= 1, got {self.k}")
        if self.n > self.k:
            raise ConstraintValidationError(f"bound n={self.n} exceeds k={self.k}")

    @property
    def sign(self) -> int:
        return 1 if self.sense == LOWER else -1

    def contains(self, t: Tuple) -> bool:
        return all(t.values.get(a) == v for a, v in self.group)

    def label(self) -> str:
        body = ",".join(f"{a}={v}" for a, v in self.group)
        return f"{'lb' if self.sense == LOWER else 'ub'}[{body},k={self.k}]={self.n}"


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple[CardinalityConstraint, ...]

    def __post_init__(self):
        if not self.constraints:
            raise ConstraintValidationError("constraint set must be non-empty")

    @property
    def k_star(self) -> int:
        return max(c.k for c in self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)


def deviation(
    ranking: list[int],
    tuples_by_id: Mapping[int, Tuple],
    cs: ConstraintSet,
) -> Fraction:
    """Mean one-sided relative shortfall/excess across the constraint set,
    in [0, 1].  Requires the ranking to cover the largest constrained k."""
    if len(ranking) < cs.k_star:
        raise PreconditionError(
            f"ranking has {len(ranking)} tuples, needs at least k*={cs.k_star}"
        )
    total = Fraction(0)
    for c in cs:
        count = sum(1 for tid in ranking[: c.k] if c.contains(tuples_by_id[tid]))
        total += Fraction(max(c.sign * (c.n - count), 0), c.n)
    return total / len(cs)


def parse_constraints(text: str) -> ConstraintSet:
    """Constraint file: JSON array of
    ``{"group": {attr: value, ...}, "k": int, "sense": "lower"|"upper", "n": int}``."""
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConstraintValidationError(f"constraints are not valid JSON: {exc}") from exc
    if not isinstance(spec, list) or not spec:
        raise ConstraintValidationError("constraint file must hold a non-empty JSON array")
    out = []
    for i, entry in enumerate(spec):
        try:
            group = tuple(sorted((str(a), str(v)) for a, v in entry["group"].items()))
            out.append(
                CardinalityConstraint(
                    group=group,
                    k=int(entry["k"]),
                    n=int(entry["n"]),
                    sense=str(entry["sense"]),
                )
            )
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise ConstraintValidationError(f"constraint #{i}: {exc}") from exc
    return ConstraintSet(tuple(out))
