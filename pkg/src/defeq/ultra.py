"""Ultrafilters on finite index sets and explicit ultraproducts.

The quotient is built verbatim: enumerate every choice function, partition
by U-agreement, then read the tables off class representatives.  No step
assumes the ultrafilter is principal; that every ultrafilter on a finite
index set IS principal, and that the quotient then collapses to one factor,
are theorems the tests check against this construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

from . import folang
from .budget import BudgetExceededError, WorkBudget
from .folang import Formula, SignatureError
from .models import FiniteModel

__all__ = [
    "Ultrafilter", "ultrafilters_on", "UltraproductResult",
    "ultraproduct", "diagonal_embedding", "LosReport", "los_check",
]


class Ultrafilter:
    """A family of subsets of {0..size-1} intended to be an ultrafilter.

    Construction normalizes but does not validate; call validate() to check
    the axioms (no empty set, upward closed, closed under intersection, and
    containing exactly one of each complementary pair).
    """

    __slots__ = ("size", "members", "_masks")

    def __init__(self, size: int, members: Iterable[Iterable[int]]):
        if size < 1:
            raise ValueError("index set must be nonempty")
        self.size = size
        self.members = frozenset(frozenset(s) for s in members)
        for s in self.members:
            if not all(0 <= i < size for i in s):
                raise ValueError(f"member {sorted(s)} not within the index set")
        self._masks = frozenset(sum(1 << i for i in s) for s in self.members)

    @classmethod
    def principal(cls, point: int, size: int) -> "Ultrafilter":
        """All subsets of {0..size-1} containing the point."""
        if not 0 <= point < size:
            raise ValueError("principal point outside the index set")
        rest = [i for i in range(size) if i != point]
        members = []
        for r in range(len(rest) + 1):
            for extra in itertools.combinations(rest, r):
                members.append(frozenset((point,) + extra))
        return cls(size, members)

    def validate(self) -> None:
        """Raise ValueError naming the first violated ultrafilter axiom."""
        if frozenset() in self.members:
            raise ValueError("contains the empty set")
        universe = frozenset(range(self.size))
        for s in self.members:
            for t in self.members:
                if s & t not in self.members:
                    raise ValueError(
                        f"not closed under intersection: {sorted(s)} and {sorted(t)}")
        for s in self.members:
            for extra in range(self.size):
                if s | {extra} not in self.members:
                    raise ValueError(f"not upward closed at {sorted(s | {extra})}")
        for bits in range(1 << self.size):
            s = frozenset(i for i in range(self.size) if bits >> i & 1)
            if (s in self.members) == (universe - s in self.members):
                raise ValueError(
                    f"must contain exactly one of {sorted(s)} and its complement")

    def contains(self, s: Iterable[int]) -> bool:
        return frozenset(s) in self.members

    def _contains_mask(self, mask: int) -> bool:
        return mask in self._masks

    def principal_point(self) -> int:
        """The point every member contains; on a finite index set one exists."""
        core = frozenset(range(self.size))
        for s in self.members:
            core &= s
        if len(core) != 1:
            raise ValueError("not a principal ultrafilter")
        return next(iter(core))

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Ultrafilter) and self.size == other.size
                and self.members == other.members)

    def __hash__(self) -> int:
        return hash((self.size, self.members))

    def __repr__(self) -> str:
        return f"<Ultrafilter on {self.size} indices, {len(self.members)} members>"


def ultrafilters_on(size: int) -> list[Ultrafilter]:
    """Every ultrafilter on {0..size-1}: the principal ones.

    On a finite index set the intersection of all members is a U-member
    singleton, so this list is exhaustive; the tests verify that by brute
    force over set families for small sizes.
    """
    return [Ultrafilter.principal(i, size) for i in range(size)]


@dataclass(frozen=True)
class UltraproductResult:
    """Quotient model plus the choice-function -> class map."""

    quotient: FiniteModel
    class_map: dict[tuple[int, ...], int]
    reps: tuple[tuple[int, ...], ...]


def ultraproduct(models: Sequence[FiniteModel], u: Ultrafilter,
                 budget: WorkBudget | None = None) -> UltraproductResult:
    """The quotient of prod(models) by U-agreement.

    Classes are numbered by their lexicographically least choice function,
    in order of first appearance; with initial-segment universes this makes
    the quotient of a principal ultrafilter literally equal to the factor
    at its principal point.
    """
    budget = budget or WorkBudget()
    if len(models) != u.size:
        raise ValueError(f"expected {u.size} models, got {len(models)}")
    sig = models[0].sig
    for m in models[1:]:
        if m.sig != sig:
            raise SignatureError("ultraproduct factors must share a signature")
    space = prod(m.size for m in models)
    if space > budget.max_nodes:
        raise BudgetExceededError(
            f"enumerating {space} choice functions", budget.max_nodes)

    k = u.size
    reps: list[tuple[int, ...]] = []
    class_map: dict[tuple[int, ...], int] = {}
    for f in itertools.product(*(range(m.size) for m in models)):
        for ci, rep in enumerate(reps):
            agree = sum(1 << i for i in range(k) if f[i] == rep[i])
            if u._contains_mask(agree):
                class_map[f] = ci
                break
        else:
            class_map[f] = len(reps)
            reps.append(f)

    m_count = len(reps)
    rels = {}
    for name, arity in sig.relations.items():
        table = set()
        for classes in itertools.product(range(m_count), repeat=arity):
            chosen = [reps[c] for c in classes]
            agree = sum(1 << i for i in range(k)
                        if tuple(rep[i] for rep in chosen) in models[i].rels[name])
            if u._contains_mask(agree):
                table.add(classes)
        rels[name] = frozenset(table)
    funs = {}
    for name, arity in sig.functions.items():
        table = []
        for classes in itertools.product(range(m_count), repeat=arity):
            chosen = [reps[c] for c in classes]
            g = tuple(models[i].fun_value(name, tuple(rep[i] for rep in chosen))
                      for i in range(k))
            table.append(class_map[g])
        funs[name] = tuple(table)
    consts = {name: class_map[tuple(m.consts[name] for m in models)]
              for name in sig.constants}
    quotient = FiniteModel(sig, m_count, rels, funs, consts)
    return UltraproductResult(quotient, class_map, tuple(reps))


def diagonal_embedding(m: FiniteModel, u: Ultrafilter,
                       budget: WorkBudget | None = None) -> dict[int, int]:
    """a -> class of the constant choice function (a,...,a) in the ultrapower."""
    result = ultraproduct([m] * u.size, u, budget)
    return {a: result.class_map[(a,) * u.size] for a in range(m.size)}


@dataclass(frozen=True)
class LosReport:
    """One Los-theorem instance: quotient truth vs truth-set membership."""

    lhs: bool
    truth_set: frozenset[int]
    rhs: bool

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs


def los_check(models: Sequence[FiniteModel], u: Ultrafilter, f: Formula,
              budget: WorkBudget | None = None) -> LosReport:
    """Compare truth of a closed formula in the quotient with its truth set.

    lhs is eval in the ultraproduct; rhs is whether {i : models[i] |= f}
    belongs to u.  The Los theorem says they always agree.
    """
    fv = folang.free_vars(f)
    if fv:
        raise ValueError(f"los_check needs a closed formula, free: {sorted(fv)}")
    result = ultraproduct(models, u, budget)
    lhs = folang.eval_formula(result.quotient, f)
    truth_set = frozenset(i for i, m in enumerate(models) if folang.eval_formula(m, f))
    return LosReport(lhs, truth_set, u.contains(truth_set))
