"""Concrete permutation groups on {0..n-1}.

Permutations are image tuples: p[i] is where i goes.  Groups store their
full element set, not generators; every question about them is answered by
finite search.  Two groups on bases of equal size are base-isomorphic when
some bijection of the bases conjugates one onto the other; the canonical
form of a group is its lexicographically least conjugate, and group_key is
that form's byte encoding.
"""

from __future__ import annotations

import itertools
from collections import Counter
from typing import Iterable, Iterator, Sequence

__all__ = [
    "identity", "compose", "invert", "cycle_type",
    "PermutationGroup", "automorphism_group",
    "base_isomorphisms", "canonical_form", "group_key", "group_to_text",
]


def identity(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """p after q: (p . q)(i) = p[q[i]]."""
    return tuple(p[q[i]] for i in range(len(q)))


def invert(p: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def cycle_type(p: Sequence[int]) -> tuple[int, ...]:
    """Cycle lengths of p, descending.  Invariant under conjugation."""
    seen = [False] * len(p)
    lengths = []
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


class PermutationGroup:
    """A set of permutations of {0..base_size-1} closed under the group ops."""

    __slots__ = ("base_size", "elements")

    def __init__(self, base_size: int, elements: Iterable[Sequence[int]],
                 _trusted: bool = False):
        elems = sorted({tuple(p) for p in elements})
        if not _trusted:
            ident = identity(base_size)
            for p in elems:
                if sorted(p) != list(ident):
                    raise ValueError(f"not a permutation of the base: {p!r}")
            if ident not in elems:
                raise ValueError("identity missing")
            known = set(elems)
            for p in elems:
                if invert(p) not in known:
                    raise ValueError(f"inverse of {p!r} missing")
                for q in elems:
                    if compose(p, q) not in known:
                        raise ValueError(f"composition {p!r}.{q!r} missing")
        self.base_size = base_size
        self.elements = tuple(elems)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, p: Sequence[int]) -> bool:
        return tuple(p) in set(self.elements)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.elements)

    def conjugate(self, h: Sequence[int]) -> "PermutationGroup":
        """The group {h g h^-1 : g in G}; h must be a bijection of the base."""
        h = tuple(h)
        if sorted(h) != list(range(self.base_size)):
            raise ValueError("not a bijection of the base")
        hinv = invert(h)
        return PermutationGroup(
            self.base_size,
            (compose(h, compose(g, hinv)) for g in self.elements),
            _trusted=True)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, PermutationGroup)
                and self.base_size == other.base_size
                and self.elements == other.elements)

    def __hash__(self) -> int:
        return hash((self.base_size, self.elements))

    def __repr__(self) -> str:
        return f"<PermutationGroup order {self.order} on {self.base_size} points>"


def automorphism_group(m) -> PermutationGroup:
    """Aut(m) as a concrete group.  m is a FiniteModel."""
    from .models import find_isomorphisms
    return PermutationGroup(m.size, find_isomorphisms(m, m), _trusted=True)


def base_isomorphisms(g: PermutationGroup, h: PermutationGroup) -> list[tuple[int, ...]]:
    """All base bijections b with b g b^-1 = h, in lexicographic order.

    Empty when the bases differ in size, the orders differ, or the
    multisets of cycle types differ; those are conjugation invariants, so
    pruning on them loses nothing.
    """
    if g.base_size != h.base_size or g.order != h.order:
        return []
    if Counter(map(cycle_type, g)) != Counter(map(cycle_type, h)):
        return []
    target = set(h.elements)
    out = []
    for b in itertools.permutations(range(g.base_size)):
        binv = invert(b)
        if all(compose(b, compose(x, binv)) in target for x in g):
            out.append(b)
    return out


def canonical_form(g: PermutationGroup) -> PermutationGroup:
    """The lexicographically least conjugate of g over all base bijections.

    The conjugate set b G b^-1 depends on b only through the left coset bG,
    so one representative per coset is inspected.
    """
    n = g.base_size
    elems = g.elements
    seen: set[tuple[int, ...]] = set()
    best: tuple[tuple[int, ...], ...] | None = None
    for b in itertools.permutations(range(n)):
        if b in seen:
            continue
        for x in elems:
            seen.add(compose(b, x))
        binv = invert(b)
        conj = tuple(sorted(compose(b, compose(x, binv)) for x in elems))
        if best is None or conj < best:
            best = conj
    assert best is not None
    return PermutationGroup(n, best, _trusted=True)


def group_key(g: PermutationGroup) -> bytes:
    """Byte encoding of canonical_form(g).

    Two groups get the same key exactly when they are base-isomorphic.
    Keys are only comparable between groups on equal-size bases, which the
    leading size bytes enforce.
    """
    canon = canonical_form(g)
    return canon.base_size.to_bytes(2, "big") + b"".join(
        bytes(p) for p in canon.elements)


def group_to_text(g: PermutationGroup) -> str:
    """Print form: sorted image lists, e.g. [[0,1],[1,0]]."""
    inner = ",".join("[" + ",".join(map(str, p)) + "]" for p in g.elements)
    return f"[{inner}]"
