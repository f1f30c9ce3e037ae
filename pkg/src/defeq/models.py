"""Finite models over {0..n-1}, theories, enumeration, isomorphism search.

Universe elements are always 0..size-1.  A model's encoding is the tuple
(relation bitmaps, function tables, constant values) with symbols in sorted
name order; enumeration, canonical keys and every deterministic tiebreak in
the package order models by that encoding.
"""

from __future__ import annotations

import itertools
from math import prod
from typing import Iterable, Mapping, Sequence

from . import folang
from .budget import BudgetExceededError, NodeCounter, WorkBudget
from .folang import Formula, Signature, SignatureError

__all__ = [
    "FiniteModel", "Theory", "is_model", "enumerate_models",
    "find_isomorphisms", "is_isomorphism", "canonical_key",
    "reduct", "substructure", "apply_permutation",
]


class FiniteModel:
    """A finite structure: tables for every symbol of its signature.

    rels maps relation name to a frozenset of argument tuples, funs maps
    function name to a flat value table indexed by mixed-radix argument
    rank, consts maps constant name to an element.
    """

    __slots__ = ("sig", "size", "rels", "funs", "consts", "_enc")

    def __init__(self, sig: Signature, size: int,
                 rels: Mapping[str, Iterable[tuple[int, ...]]] | None = None,
                 funs: Mapping[str, Sequence[int]] | None = None,
                 consts: Mapping[str, int] | None = None):
        if size < 1:
            raise ValueError("universe must be nonempty")
        rels = dict(rels or {})
        funs = dict(funs or {})
        consts = dict(consts or {})
        for name, kind in itertools.chain(
                ((n, sig.relations) for n in rels),
                ((n, sig.functions) for n in funs),
                ((n, sig.constants) for n in consts)):
            if name not in kind:
                raise SignatureError(f"table for undeclared symbol {name!r}")
        norm_rels: dict[str, frozenset[tuple[int, ...]]] = {}
        for name, arity in sig.relations.items():
            table = frozenset(tuple(t) for t in rels.get(name, ()))
            for t in table:
                if len(t) != arity or not all(0 <= e < size for e in t):
                    raise ValueError(f"bad tuple {t!r} for relation {name!r}")
            norm_rels[name] = table
        norm_funs: dict[str, tuple[int, ...]] = {}
        for name, arity in sig.functions.items():
            if name not in funs:
                raise ValueError(f"missing table for function {name!r}")
            table = tuple(funs[name])
            if len(table) != size ** arity or not all(0 <= v < size for v in table):
                raise ValueError(f"bad table for function {name!r}")
            norm_funs[name] = table
        norm_consts: dict[str, int] = {}
        for name in sig.constants:
            if name not in consts:
                raise ValueError(f"missing value for constant {name!r}")
            value = consts[name]
            if not 0 <= value < size:
                raise ValueError(f"constant {name!r} out of range")
            norm_consts[name] = value
        self.sig = sig
        self.size = size
        self.rels = norm_rels
        self.funs = norm_funs
        self.consts = norm_consts
        self._enc = None

    @classmethod
    def _raw(cls, sig: Signature, size: int, rels, funs, consts) -> "FiniteModel":
        # trusted fast path for enumeration loops; inputs already normalized
        m = object.__new__(cls)
        m.sig = sig
        m.size = size
        m.rels = rels
        m.funs = funs
        m.consts = consts
        m._enc = None
        return m

    # ---- lookups ----

    def fun_value(self, name: str, args: Sequence[int]) -> int:
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return self.funs[name][idx]

    # ---- encoding and ordering ----

    def encode(self) -> tuple:
        """Order-defining encoding: relation bitmaps, function tables, constants.

        Bit j of a relation bitmap is membership of the j-th argument tuple
        in lexicographic order, so counting the bitmap upward walks tables
        in the documented enumeration order.
        """
        if self._enc is None:
            rel_part = []
            for name, arity in self.sig.relations.items():
                bits = 0
                for j, t in enumerate(itertools.product(range(self.size), repeat=arity)):
                    if t in self.rels[name]:
                        bits |= 1 << j
                rel_part.append(bits)
            fun_part = tuple(self.funs[name] for name in self.sig.functions)
            const_part = tuple(self.consts[name] for name in self.sig.constants)
            self._enc = (self.size, tuple(rel_part), fun_part, const_part)
        return self._enc

    def encode_bytes(self) -> bytes:
        size, rel_part, fun_part, const_part = self.encode()
        out = [size.to_bytes(2, "big")]
        for bits, (name, arity) in zip(rel_part, self.sig.relations.items()):
            width = (size ** arity + 7) // 8
            out.append(bits.to_bytes(width, "big"))
        for table in fun_part:
            out.append(bytes(table))
        out.append(bytes(const_part))
        return b"".join(out)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, FiniteModel) and self.sig == other.sig
                and self.size == other.size and self.encode() == other.encode())

    def __hash__(self) -> int:
        return hash((self.sig, self.encode()))

    def __repr__(self) -> str:
        parts = [f"size={self.size}"]
        parts.extend(f"{name}={sorted(self.rels[name])}" for name in self.sig.relations)
        parts.extend(f"{name}={list(self.funs[name])}" for name in self.sig.functions)
        parts.extend(f"{name}={self.consts[name]}" for name in self.sig.constants)
        return f"FiniteModel({', '.join(parts)})"


def apply_permutation(m: FiniteModel, perm: Sequence[int]) -> FiniteModel:
    """The image of m under a permutation of its universe."""
    if sorted(perm) != list(range(m.size)):
        raise ValueError("not a permutation of the universe")
    rels = {name: frozenset(tuple(perm[e] for e in t) for t in table)
            for name, table in m.rels.items()}
    funs = {}
    for name, arity in m.sig.functions.items():
        table = m.funs[name]
        new = [0] * len(table)
        for args in itertools.product(range(m.size), repeat=arity):
            idx = 0
            for a in args:
                idx = idx * m.size + perm[a]
            old = 0
            for a in args:
                old = old * m.size + a
            new[idx] = perm[table[old]]
        funs[name] = tuple(new)
    consts = {name: perm[value] for name, value in m.consts.items()}
    return FiniteModel._raw(m.sig, m.size, rels, funs, consts)


class Theory:
    """A signature plus a finite tuple of closed axioms."""

    __slots__ = ("sig", "axioms", "name", "note")

    def __init__(self, sig: Signature, axioms: Iterable[Formula] = (),
                 name: str = "", note: str = ""):
        axioms = tuple(axioms)
        for ax in axioms:
            folang.validate_formula(sig, ax)
            fv = folang.free_vars(ax)
            if fv:
                raise ValueError(f"axiom has free variables {sorted(fv)}")
        self.sig = sig
        self.axioms = axioms
        self.name = name
        self.note = note

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Theory) and self.sig == other.sig
                and self.axioms == other.axioms)

    def __hash__(self) -> int:
        return hash((self.sig, self.axioms))

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Theory{label}: {len(self.axioms)} axioms over {self.sig!r}>"


def is_model(m: FiniteModel, t: Theory) -> bool:
    """True when m satisfies every axiom of t."""
    if m.sig != t.sig:
        raise SignatureError("model and theory signatures differ")
    return all(folang.eval_formula(m, ax) for ax in t.axioms)


def enumerate_models(t: Theory, size: int,
                     budget: WorkBudget | None = None) -> list[FiniteModel]:
    """All models of t on the universe {0..size-1}, in encoding order.

    The candidate space is every assignment of tables to t's symbols.
    Axioms that mention no relation symbol are checked once per
    (function tables, constants) choice, before the relation-table product
    is entered; this keeps theories whose function axioms are unsatisfiable
    within budget.  The budget counts candidates actually visited.
    """
    if size < 1:
        raise ValueError("universe must be nonempty")
    budget = budget or WorkBudget()
    sig = t.sig
    fun_space = prod(size ** (size ** a) for a in sig.functions.values()) \
        * size ** len(sig.constants)
    if fun_space > budget.max_functions:
        raise BudgetExceededError(
            f"enumerating {fun_space} function/constant tables at size {size}",
            budget.max_functions)
    nodes = NodeCounter(budget, f"enumerating models at size {size}")

    rel_free = []
    rel_using = []
    for ax in t.axioms:
        used = folang.used_symbols(ax)["relations"]
        (rel_using if used else rel_free).append(ax)

    rel_names = list(sig.relations)
    rel_slots = {name: size ** arity for name, arity in sig.relations.items()}
    rel_tuples = {name: list(itertools.product(range(size), repeat=arity))
                  for name, arity in sig.relations.items()}
    fun_names = list(sig.functions)
    const_names = list(sig.constants)
    empty_rels = {name: frozenset() for name in rel_names}

    out: list[FiniteModel] = []
    fun_factors = [itertools.product(range(size), repeat=size ** sig.functions[n])
                   for n in fun_names]
    const_factors = [range(size) for _ in const_names]
    for combo in itertools.product(*fun_factors, *const_factors):
        funs = dict(zip(fun_names, combo))
        consts = dict(zip(const_names, combo[len(fun_names):]))
        if rel_free:
            nodes.tick()
            probe = FiniteModel._raw(sig, size, empty_rels, funs, consts)
            if not all(folang.eval_formula(probe, ax) for ax in rel_free):
                continue
        for bitmaps in itertools.product(*(range(1 << rel_slots[n]) for n in rel_names)):
            nodes.tick()
            rels = {name: frozenset(t for j, t in enumerate(rel_tuples[name])
                                    if bits >> j & 1)
                    for name, bits in zip(rel_names, bitmaps)}
            m = FiniteModel._raw(sig, size, rels, funs, consts)
            if all(folang.eval_formula(m, ax) for ax in rel_using):
                out.append(m)
    out.sort(key=FiniteModel.encode)
    return out


# ============================================================
# isomorphism
# ============================================================

def _colors(m: FiniteModel) -> list[tuple]:
    """Cheap permutation-invariant label per element, for search pruning."""
    out = []
    for e in range(m.size):
        label = []
        for name, arity in m.sig.relations.items():
            table = m.rels[name]
            label.append(tuple(sum(1 for t in table if t[p] == e) for p in range(arity)))
        for name in m.sig.functions:
            table = m.funs[name]
            label.append(sum(1 for v in table if v == e))
        label.append(tuple(m.consts[name] == e for name in m.sig.constants))
        out.append(tuple(label))
    return out


def is_isomorphism(m: FiniteModel, n: FiniteModel, h: Sequence[int]) -> bool:
    """Does the bijection h: universe(m) -> universe(n) carry m onto n?"""
    if m.sig != n.sig:
        raise SignatureError("models have different signatures")
    if m.size != n.size or sorted(h) != list(range(m.size)):
        return False
    for name, table in m.rels.items():
        if {tuple(h[e] for e in t) for t in table} != n.rels[name]:
            return False
    for name, arity in m.sig.functions.items():
        for args in itertools.product(range(m.size), repeat=arity):
            image = tuple(h[a] for a in args)
            if h[m.fun_value(name, args)] != n.fun_value(name, image):
                return False
    for name, value in m.consts.items():
        if h[value] != n.consts[name]:
            return False
    return True


def find_isomorphisms(m: FiniteModel, n: FiniteModel) -> list[tuple[int, ...]]:
    """All isomorphisms m -> n as image tuples, in lexicographic order.

    Backtracking over partial maps with color pruning; elements of m are
    assigned in increasing order, candidate images in increasing order, so
    the output order is the lexicographic order on image tuples.
    """
    if m.sig != n.sig:
        raise SignatureError("models have different signatures")
    if m.size != n.size:
        return []
    size = m.size
    cm, cn = _colors(m), _colors(n)
    if sorted(cm) != sorted(cn):
        return []
    for name in m.sig.relations:
        if len(m.rels[name]) != len(n.rels[name]):
            return []

    # relation tuples and function entries become checkable once their
    # largest element is assigned (assignment order is 0,1,2,...)
    rel_by_max: list[list[tuple[str, tuple[int, ...]]]] = [[] for _ in range(size)]
    for name, table in m.rels.items():
        for t in table:
            rel_by_max[max(t)].append((name, t))
    fun_by_max: list[list[tuple[str, tuple[int, ...], int]]] = [[] for _ in range(size)]
    for name, arity in m.sig.functions.items():
        for args in itertools.product(range(size), repeat=arity):
            value = m.fun_value(name, args)
            fun_by_max[max((*args, value))].append((name, args, value))

    out: list[tuple[int, ...]] = []
    image = [-1] * size
    used = [False] * size

    def consistent(k: int) -> bool:
        for name, t in rel_by_max[k]:
            if tuple(image[e] for e in t) not in n.rels[name]:
                return False
        for name, args, value in fun_by_max[k]:
            if n.fun_value(name, tuple(image[a] for a in args)) != image[value]:
                return False
        for name, value in m.consts.items():
            if value == k and image[k] != n.consts[name]:
                return False
        return True

    def extend(k: int) -> None:
        if k == size:
            out.append(tuple(image))
            return
        for cand in range(size):
            if used[cand] or cn[cand] != cm[k]:
                continue
            image[k] = cand
            used[cand] = True
            if consistent(k):
                extend(k + 1)
            used[cand] = False
        image[k] = -1

    extend(0)
    return out


def canonical_key(m: FiniteModel) -> bytes:
    """Minimal byte encoding of m's tables over all universe permutations.

    Two models on the same signature and size are isomorphic exactly when
    their canonical keys agree.
    """
    return min(apply_permutation(m, perm).encode_bytes()
               for perm in itertools.permutations(range(m.size)))


def reduct(m: FiniteModel, keep: Iterable[str] | Signature) -> FiniteModel:
    """Forget every symbol not named; the universe stays put."""
    if isinstance(keep, Signature):
        sub = keep
        names = set(sub.relations) | set(sub.functions) | set(sub.constants)
        if m.sig.restrict(names) != sub:
            raise SignatureError("not a sub-signature of the model's signature")
    else:
        sub = m.sig.restrict(keep)
    return FiniteModel._raw(
        sub, m.size,
        {name: m.rels[name] for name in sub.relations},
        {name: m.funs[name] for name in sub.functions},
        {name: m.consts[name] for name in sub.constants},
    )


def substructure(m: FiniteModel, subset: Iterable[int]) -> tuple[FiniteModel, dict[int, int]]:
    """Induced substructure on subset, relabeled order-preservingly to 0..k-1.

    subset must be nonempty, contain every constant, and be closed under
    every function; otherwise ValueError.  Returns the substructure and the
    old-element -> new-element map.
    """
    elems = sorted(set(subset))
    if not elems:
        raise ValueError("subset must be nonempty")
    if not all(0 <= e < m.size for e in elems):
        raise ValueError("subset not within the universe")
    inside = set(elems)
    for name, value in m.consts.items():
        if value not in inside:
            raise ValueError(f"subset misses constant {name!r}")
    for name, arity in m.sig.functions.items():
        for args in itertools.product(elems, repeat=arity):
            if m.fun_value(name, args) not in inside:
                raise ValueError(f"subset not closed under function {name!r}")
    relabel = {e: i for i, e in enumerate(elems)}
    k = len(elems)
    rels = {name: frozenset(tuple(relabel[e] for e in t)
                            for t in table if all(e in inside for e in t))
            for name, table in m.rels.items()}
    funs = {}
    for name, arity in m.sig.functions.items():
        table = [0] * (k ** arity)
        for args in itertools.product(elems, repeat=arity):
            idx = 0
            for a in args:
                idx = idx * k + relabel[a]
            table[idx] = relabel[m.fun_value(name, args)]
        funs[name] = tuple(table)
    consts = {name: relabel[value] for name, value in m.consts.items()}
    return FiniteModel._raw(m.sig, k, rels, funs, consts), relabel
