"""Definitional extensions and bounded definability checks.

A DefinitionSet turns new relation symbols into biconditional axioms; the
checks here test, over all models up to a size bound, whether a hidden
relation is pinned down implicitly (unique expansion) or explicitly (some
defining formula within a size bound), and whether a theory survives
passage to substructures.  Everything is bounded evidence: a pass speaks
only about the sizes and formula sizes actually searched.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from . import folang
from .budget import NodeCounter, WorkBudget
from .folang import (Forall, Formula, Iff, Rel, Signature, SignatureError, Var)
from .models import FiniteModel, Theory, enumerate_models, is_model, reduct, substructure

__all__ = [
    "Definition", "DefinitionSet", "extend_theory", "expand_model",
    "unique_expansion_check", "beth_search", "substructure_closure_check",
]


@dataclass(frozen=True)
class Definition:
    """A defining formula with its argument variable tuple."""

    variables: tuple[str, ...]
    formula: Formula

    def __post_init__(self) -> None:
        if len(set(self.variables)) != len(self.variables) or not self.variables:
            raise ValueError("definition needs a nonempty tuple of distinct variables")
        extra = folang.free_vars(self.formula) - set(self.variables)
        if extra:
            raise ValueError(f"defining formula has stray free variables {sorted(extra)}")

    @property
    def arity(self) -> int:
        return len(self.variables)


class DefinitionSet:
    """New relation symbols mapped to their definitions over a base signature."""

    __slots__ = ("defs",)

    def __init__(self, defs: Mapping[str, Definition] | None = None):
        self.defs = dict(defs or {})

    def add(self, name: str, variables: Iterable[str], formula: Formula) -> "DefinitionSet":
        if name in self.defs:
            raise ValueError(f"duplicate definition for {name!r}")
        self.defs[name] = Definition(tuple(variables), formula)
        return self

    def items(self):
        return sorted(self.defs.items())

    def __len__(self) -> int:
        return len(self.defs)


def _biconditional(name: str, d: Definition) -> Formula:
    body: Formula = Iff(Rel(name, tuple(Var(v) for v in d.variables)), d.formula)
    for v in reversed(d.variables):
        body = Forall(v, body)
    return body


def extend_theory(t: Theory, defs: DefinitionSet) -> Theory:
    """t plus the defined relations and their biconditional axioms."""
    for name, d in defs.items():
        if t.sig.has_symbol(name):
            raise SignatureError(f"defined symbol {name!r} already declared")
        folang.validate_formula(t.sig, d.formula)
    new_sig = Signature(
        {**t.sig.relations, **{name: d.arity for name, d in defs.items()}},
        t.sig.functions, t.sig.constants)
    axioms = list(t.axioms) + [_biconditional(name, d) for name, d in defs.items()]
    return Theory(new_sig, axioms, name=t.name)


def expand_model(m: FiniteModel, defs: DefinitionSet) -> FiniteModel:
    """The unique expansion of m interpreting each defined relation by its formula."""
    for name, d in defs.items():
        if m.sig.has_symbol(name):
            raise SignatureError(f"defined symbol {name!r} already declared")
        folang.validate_formula(m.sig, d.formula)
    new_sig = Signature(
        {**m.sig.relations, **{name: d.arity for name, d in defs.items()}},
        m.sig.functions, m.sig.constants)
    rels = dict(m.rels)
    for name, d in defs.items():
        rels[name] = frozenset(
            args for args in itertools.product(range(m.size), repeat=d.arity)
            if folang.eval_formula(m, d.formula, dict(zip(d.variables, args))))
    return FiniteModel(new_sig, m.size, rels, m.funs, m.consts)


def _hidden_reduct_names(t: Theory, hidden: Iterable[str]) -> list[str]:
    hidden = set(hidden)
    for name in hidden:
        if name not in t.sig.relations:
            raise ValueError(f"hidden symbol {name!r} is not a relation of the theory")
    keep = [n for n in itertools.chain(t.sig.relations, t.sig.functions, t.sig.constants)
            if n not in hidden]
    return keep


def unique_expansion_check(t: Theory, hidden: Iterable[str], max_size: int,
                           budget: WorkBudget | None = None,
                           ) -> tuple[FiniteModel, FiniteModel] | None:
    """Search sizes 1..max_size for two models of t sharing a reduct.

    The reduct forgets the hidden relations.  None means every reduct that
    expands at all expands uniquely (implicit definability evidence up to
    the bound); otherwise the first such pair in enumeration order is the
    witness.
    """
    keep = _hidden_reduct_names(t, hidden)
    for n in range(1, max_size + 1):
        seen: dict[bytes, FiniteModel] = {}
        for m in enumerate_models(t, n, budget):
            key = reduct(m, keep).encode_bytes()
            first = seen.get(key)
            if first is None:
                seen[key] = m
            elif first != m:
                return first, m
    return None


def _assignments(size: int, variables: tuple[str, ...]) -> Iterator[dict[str, int]]:
    for values in itertools.product(range(size), repeat=len(variables)):
        yield dict(zip(variables, values))


def beth_search(t: Theory, target: str, max_size: int, formula_bound: int,
                budget: WorkBudget | None = None) -> Formula | None:
    """First formula over t's signature minus target that defines target.

    Scans enumerate_formulas order; a candidate phi qualifies when every
    model of t of size <= max_size satisfies the pointwise biconditional
    between target and phi.  None means no formula within formula_bound
    works (bounded evidence only).

    When two models of t share a reduct, no candidate can ever separate
    them (candidates do not mention target), so the search starts with a
    unique-expansion check and returns None at once on a witness; this
    changes nothing observable, only the running time.
    """
    budget = budget or WorkBudget()
    arity = t.sig.relations.get(target)
    if arity is None:
        raise ValueError(f"target {target!r} is not a relation of the theory")
    if unique_expansion_check(t, [target], max_size, budget) is not None:
        return None
    keep = _hidden_reduct_names(t, [target])
    base_sig = t.sig.restrict(keep)
    variables = _argument_variables(base_sig, arity)
    model_list = [m for n in range(1, max_size + 1)
                  for m in enumerate_models(t, n, budget)]
    nodes = NodeCounter(budget, "scanning candidate defining formulas")
    for phi in folang.enumerate_formulas(base_sig, variables, formula_bound):
        nodes.tick()
        if all((tuple(env[v] for v in variables) in m.rels[target])
               == folang.eval_formula(m, phi, env)
               for m in model_list for env in _assignments(m.size, variables)):
            return phi
    return None


def _argument_variables(sig: Signature, arity: int) -> tuple[str, ...]:
    """x1..xk, stepping around any collision with declared symbols."""
    out = []
    i = 1
    while len(out) < arity:
        name = f"x{i}"
        if not sig.has_symbol(name):
            out.append(name)
        i += 1
    return tuple(out)


def substructure_closure_check(t: Theory, max_size: int,
                               budget: WorkBudget | None = None,
                               ) -> tuple[FiniteModel, tuple[int, ...]] | None:
    """First (model, subset) whose induced substructure violates t.

    Models are scanned in enumeration order for sizes 1..max_size; subsets
    in order of cardinality then lexicographically.  Subsets that miss a
    constant or are not closed under a function are not substructures and
    are skipped.  None means t held in every induced substructure seen.
    """
    for n in range(1, max_size + 1):
        for m in enumerate_models(t, n, budget):
            for r in range(1, n + 1):
                for subset in itertools.combinations(range(n), r):
                    try:
                        sub, _ = substructure(m, subset)
                    except ValueError:
                        continue
                    if not is_model(sub, t):
                        return m, subset
    return None
