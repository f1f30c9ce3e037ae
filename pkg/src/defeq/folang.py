"""First-order syntax and semantics over finite universes.

Terms and formulas are immutable trees.  The concrete syntax is the one
accepted by parse_formula and produced by formula_to_text; printing and
reparsing any tree yields an equal tree.

Concrete syntax, loosest to tightest binding:

    formula := quant | iff
    quant   := ('A' | 'E') ident '.' formula
    iff     := imp ('<->' imp)*          right associative
    imp     := or ('->' or)*             right associative
    or      := and ('|' and)*            left associative
    and     := unary ('&' unary)*        left associative
    unary   := '!' unary | atom
    atom    := '(' formula ')' | ident '(' term {',' term} ')'
             | term '=' term | term '!=' term
    term    := ident | ident '(' term {',' term} ')'

Identifiers resolve against the signature; an unresolved bare name is a
variable.  't1 != t2' is sugar for '!(t1 = t2)'.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "Signature", "Var", "Const", "App", "Term",
    "Rel", "Eq", "Not", "And", "Or", "Implies", "Iff", "Forall", "Exists",
    "Formula", "FormulaSyntaxError", "SignatureError", "UnboundVariableError",
    "parse_formula", "formula_to_text", "free_vars", "formula_size",
    "formula_depth", "used_symbols", "validate_formula",
    "eval_term", "eval_formula", "enumerate_formulas", "random_formula",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class FormulaSyntaxError(ValueError):
    """Formula text failed to parse or resolve against the signature."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class SignatureError(ValueError):
    """Name clash, bad arity, or use of a symbol not in the signature."""


class UnboundVariableError(ValueError):
    """Evaluation met a free variable missing from the assignment."""


# ============================================================
# signatures
# ============================================================

class Signature:
    """Relation and function arities plus constant names.

    Treated as immutable; symbol names are pairwise distinct identifiers
    and arities are positive.
    """

    __slots__ = ("relations", "functions", "constants", "_key")

    def __init__(self,
                 relations: Mapping[str, int] | None = None,
                 functions: Mapping[str, int] | None = None,
                 constants: Iterable[str] = ()):
        rels = dict(sorted((relations or {}).items()))
        funs = dict(sorted((functions or {}).items()))
        consts = tuple(sorted(constants))
        names = list(rels) + list(funs) + list(consts)
        if len(set(names)) != len(names):
            raise SignatureError("symbol names must be pairwise distinct")
        for name in names:
            if not _IDENT.fullmatch(name):
                raise SignatureError(f"bad symbol name {name!r}")
        for name, arity in itertools.chain(rels.items(), funs.items()):
            if not isinstance(arity, int) or arity < 1:
                raise SignatureError(f"arity of {name!r} must be a positive integer")
        self.relations = rels
        self.functions = funs
        self.constants = consts
        self._key = (tuple(rels.items()), tuple(funs.items()), consts)

    def has_symbol(self, name: str) -> bool:
        return name in self.relations or name in self.functions or name in self.constants

    def restrict(self, keep: Iterable[str]) -> "Signature":
        """Sub-signature containing exactly the named symbols."""
        keep = set(keep)
        unknown = keep - set(self.relations) - set(self.functions) - set(self.constants)
        if unknown:
            raise SignatureError(f"not in signature: {sorted(unknown)}")
        return Signature(
            {n: a for n, a in self.relations.items() if n in keep},
            {n: a for n, a in self.functions.items() if n in keep},
            [c for c in self.constants if c in keep],
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Signature) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Signature({self.relations!r}, {self.functions!r}, {self.constants!r})"


# ============================================================
# terms and formulas
# ============================================================

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class App:
    name: str
    args: "tuple[Term, ...]"


Term = Union[Var, Const, App]


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Rel, Eq, Not, And, Or, Implies, Iff, Forall, Exists]

_BINARY = {And: "&", Or: "|", Implies: "->", Iff: "<->"}
_QUANT = {Forall: "A", Exists: "E"}


def _term_vars(t: Term, out: set[str]) -> None:
    if isinstance(t, Var):
        out.add(t.name)
    elif isinstance(t, App):
        for a in t.args:
            _term_vars(a, out)


def free_vars(f: Formula) -> frozenset[str]:
    """Free variable names of f."""
    out: set[str] = set()

    def go(f: Formula, bound: frozenset[str]) -> None:
        if isinstance(f, Rel):
            vs: set[str] = set()
            for a in f.args:
                _term_vars(a, vs)
            out.update(vs - bound)
        elif isinstance(f, Eq):
            vs = set()
            _term_vars(f.left, vs)
            _term_vars(f.right, vs)
            out.update(vs - bound)
        elif isinstance(f, Not):
            go(f.body, bound)
        elif isinstance(f, (And, Or, Implies, Iff)):
            go(f.left, bound)
            go(f.right, bound)
        elif isinstance(f, (Forall, Exists)):
            go(f.body, bound | {f.var})
        else:
            raise TypeError(f"not a formula: {f!r}")

    go(f, frozenset())
    return frozenset(out)


def _term_func_nodes(t: Term) -> int:
    if isinstance(t, App):
        return 1 + sum(_term_func_nodes(a) for a in t.args)
    return 0


def formula_size(f: Formula) -> int:
    """Size used by the enumerator: formula nodes plus function applications.

    Atoms cost 1 plus one per function symbol occurrence in their terms;
    variables and constants are free.  Every connective and quantifier
    costs 1.
    """
    if isinstance(f, Rel):
        return 1 + sum(_term_func_nodes(a) for a in f.args)
    if isinstance(f, Eq):
        return 1 + _term_func_nodes(f.left) + _term_func_nodes(f.right)
    if isinstance(f, Not):
        return 1 + formula_size(f.body)
    if isinstance(f, (And, Or, Implies, Iff)):
        return 1 + formula_size(f.left) + formula_size(f.right)
    if isinstance(f, (Forall, Exists)):
        return 1 + formula_size(f.body)
    raise TypeError(f"not a formula: {f!r}")


def formula_depth(f: Formula) -> int:
    """Nesting depth of f; atoms have depth 1."""
    if isinstance(f, (Rel, Eq)):
        return 1
    if isinstance(f, Not):
        return 1 + formula_depth(f.body)
    if isinstance(f, (And, Or, Implies, Iff)):
        return 1 + max(formula_depth(f.left), formula_depth(f.right))
    if isinstance(f, (Forall, Exists)):
        return 1 + formula_depth(f.body)
    raise TypeError(f"not a formula: {f!r}")


def used_symbols(f: Formula) -> dict[str, set[str]]:
    """Signature symbols occurring in f, keyed 'relations'/'functions'/'constants'."""
    out = {"relations": set(), "functions": set(), "constants": set()}

    def go_term(t: Term) -> None:
        if isinstance(t, Const):
            out["constants"].add(t.name)
        elif isinstance(t, App):
            out["functions"].add(t.name)
            for a in t.args:
                go_term(a)

    def go(f: Formula) -> None:
        if isinstance(f, Rel):
            out["relations"].add(f.name)
            for a in f.args:
                go_term(a)
        elif isinstance(f, Eq):
            go_term(f.left)
            go_term(f.right)
        elif isinstance(f, Not):
            go(f.body)
        elif isinstance(f, (And, Or, Implies, Iff)):
            go(f.left)
            go(f.right)
        elif isinstance(f, (Forall, Exists)):
            go(f.body)

    go(f)
    return out


def validate_formula(sig: Signature, f: Formula) -> None:
    """Check that every symbol in f is declared with the right arity.

    Also rejects variables whose names shadow declared symbols, which the
    parser can never produce and evaluation would misread.
    """

    def go_term(t: Term) -> None:
        if isinstance(t, Var):
            if sig.has_symbol(t.name):
                raise SignatureError(f"variable {t.name!r} shadows a declared symbol")
        elif isinstance(t, Const):
            if t.name not in sig.constants:
                raise SignatureError(f"unknown constant {t.name!r}")
        else:
            arity = sig.functions.get(t.name)
            if arity is None:
                raise SignatureError(f"unknown function {t.name!r}")
            if arity != len(t.args):
                raise SignatureError(f"function {t.name!r} expects {arity} arguments")
            for a in t.args:
                go_term(a)

    def go(f: Formula) -> None:
        if isinstance(f, Rel):
            arity = sig.relations.get(f.name)
            if arity is None:
                raise SignatureError(f"unknown relation {f.name!r}")
            if arity != len(f.args):
                raise SignatureError(f"relation {f.name!r} expects {arity} arguments")
            for a in f.args:
                go_term(a)
        elif isinstance(f, Eq):
            go_term(f.left)
            go_term(f.right)
        elif isinstance(f, Not):
            go(f.body)
        elif isinstance(f, (And, Or, Implies, Iff)):
            go(f.left)
            go(f.right)
        elif isinstance(f, (Forall, Exists)):
            if sig.has_symbol(f.var):
                raise SignatureError(f"bound variable {f.var!r} shadows a declared symbol")
            go(f.body)
        else:
            raise TypeError(f"not a formula: {f!r}")

    go(f)


# ============================================================
# parsing
# ============================================================

_TOKEN = re.compile(r"\s*(<->|->|!=|[()=.,!&|]|[A-Za-z_][A-Za-z0-9_]*)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise FormulaSyntaxError(f"unexpected character {stripped[0]!r}", at)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    def __init__(self, sig: Signature, text: str):
        self.sig = sig
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> str:
        j = min(self.i + ahead, len(self.tokens) - 1)
        return self.tokens[j][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            found = self.peek() or "end of input"
            raise FormulaSyntaxError(f"expected {tok!r}, found {found!r}", self.pos())
        self.i += 1

    def fail(self, message: str) -> "FormulaSyntaxError":
        return FormulaSyntaxError(message, self.pos())

    # ---- formula levels ----

    def formula(self) -> Formula:
        if self.peek() in ("A", "E") and _IDENT.fullmatch(self.peek(1) or "") \
                and self.peek(2) == ".":
            quant = self.take()
            var = self.take()
            if self.sig.has_symbol(var):
                raise self.fail(f"quantified variable {var!r} clashes with a declared symbol")
            self.expect(".")
            body = self.formula()
            return Forall(var, body) if quant == "A" else Exists(var, body)
        return self.iff()

    def iff(self) -> Formula:
        parts = [self.imp()]
        while self.peek() == "<->":
            self.take()
            parts.append(self.imp())
        out = parts[-1]
        for left in reversed(parts[:-1]):
            out = Iff(left, out)
        return out

    def imp(self) -> Formula:
        parts = [self.disj()]
        while self.peek() == "->":
            self.take()
            parts.append(self.disj())
        out = parts[-1]
        for left in reversed(parts[:-1]):
            out = Implies(left, out)
        return out

    def disj(self) -> Formula:
        out = self.conj()
        while self.peek() == "|":
            self.take()
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.unary()
        while self.peek() == "&":
            self.take()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        if self.peek() == "!":
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            out = self.formula()
            self.expect(")")
            return out
        if tok in self.sig.relations and self.peek(1) == "(":
            name = self.take()
            args = self.arg_list()
            arity = self.sig.relations[name]
            if len(args) != arity:
                raise self.fail(f"relation {name!r} expects {arity} arguments, got {len(args)}")
            return Rel(name, args)
        left = self.term()
        op = self.peek()
        if op not in ("=", "!="):
            found = op or "end of input"
            raise self.fail(f"expected '=' or '!=' after term, found {found!r}")
        self.take()
        right = self.term()
        eq = Eq(left, right)
        return Not(eq) if op == "!=" else eq

    def arg_list(self) -> tuple[Term, ...]:
        self.expect("(")
        args = [self.term()]
        while self.peek() == ",":
            self.take()
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    def term(self) -> Term:
        tok = self.peek()
        if not _IDENT.fullmatch(tok or ""):
            found = tok or "end of input"
            raise self.fail(f"expected a term, found {found!r}")
        name = self.take()
        if self.peek() == "(":
            if name in self.sig.functions:
                args = self.arg_list()
                arity = self.sig.functions[name]
                if len(args) != arity:
                    raise self.fail(f"function {name!r} expects {arity} arguments, got {len(args)}")
                return App(name, args)
            if name in self.sig.relations:
                raise self.fail(f"relation {name!r} used inside a term")
            raise self.fail(f"unknown symbol {name!r} used with arguments")
        if name in self.sig.constants:
            return Const(name)
        if name in self.sig.relations or name in self.sig.functions:
            raise self.fail(f"symbol {name!r} used without arguments")
        return Var(name)


def parse_formula(sig: Signature, text: str) -> Formula:
    """Parse text against sig; raises FormulaSyntaxError on any problem."""
    p = _Parser(sig, text)
    out = p.formula()
    if p.peek() != "":
        raise FormulaSyntaxError(f"trailing input {p.peek()!r}", p.pos())
    return out


# ============================================================
# printing
# ============================================================

# precedence levels: 0 formula (quantifiers), 1 iff, 2 imp, 3 or, 4 and, 5 unary
_LEVEL = {Iff: 1, Implies: 2, Or: 3, And: 4}


def _term_text(t: Term) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    return f"{t.name}({','.join(_term_text(a) for a in t.args)})"


def _print(f: Formula, need: int) -> str:
    if isinstance(f, (Forall, Exists)):
        text = f"{_QUANT[type(f)]} {f.var}. {_print(f.body, 0)}"
        own = 0
    elif isinstance(f, Iff):
        text = f"{_print(f.left, 2)} <-> {_print(f.right, 1)}"
        own = 1
    elif isinstance(f, Implies):
        text = f"{_print(f.left, 3)} -> {_print(f.right, 2)}"
        own = 2
    elif isinstance(f, Or):
        text = f"{_print(f.left, 3)} | {_print(f.right, 4)}"
        own = 3
    elif isinstance(f, And):
        text = f"{_print(f.left, 4)} & {_print(f.right, 5)}"
        own = 4
    elif isinstance(f, Not):
        if isinstance(f.body, Eq):
            text = f"!({_print(f.body, 0)})"
        else:
            text = f"!{_print(f.body, 5)}"
        own = 5
    elif isinstance(f, Rel):
        text = f"{f.name}({','.join(_term_text(a) for a in f.args)})"
        own = 6
    elif isinstance(f, Eq):
        text = f"{_term_text(f.left)}={_term_text(f.right)}"
        own = 6
    else:
        raise TypeError(f"not a formula: {f!r}")
    if own < need:
        return f"({text})"
    return text


def formula_to_text(f: Formula) -> str:
    """Concrete syntax for f.  parse_formula(sig, formula_to_text(f)) == f."""
    return _print(f, 0)


# ============================================================
# evaluation
# ============================================================

def eval_term(m, t: Term, assignment: Mapping[str, int]) -> int:
    """Value of t in model m under the assignment."""
    if isinstance(t, Var):
        try:
            return assignment[t.name]
        except KeyError:
            raise UnboundVariableError(f"no value for variable {t.name!r}") from None
    if isinstance(t, Const):
        try:
            return m.consts[t.name]
        except KeyError:
            raise SignatureError(f"model has no constant {t.name!r}") from None
    if isinstance(t, App):
        try:
            table = m.funs[t.name]
        except KeyError:
            raise SignatureError(f"model has no function {t.name!r}") from None
        idx = 0
        for a in t.args:
            idx = idx * m.size + eval_term(m, a, assignment)
        return table[idx]
    raise TypeError(f"not a term: {t!r}")


def eval_formula(m, f: Formula, assignment: Mapping[str, int] | None = None) -> bool:
    """Tarskian truth of f in m under the assignment."""
    env = dict(assignment) if assignment else {}

    def go(f: Formula) -> bool:
        if isinstance(f, Rel):
            try:
                table = m.rels[f.name]
            except KeyError:
                raise SignatureError(f"model has no relation {f.name!r}") from None
            return tuple(eval_term(m, a, env) for a in f.args) in table
        if isinstance(f, Eq):
            return eval_term(m, f.left, env) == eval_term(m, f.right, env)
        if isinstance(f, Not):
            return not go(f.body)
        if isinstance(f, And):
            return go(f.left) and go(f.right)
        if isinstance(f, Or):
            return go(f.left) or go(f.right)
        if isinstance(f, Implies):
            return (not go(f.left)) or go(f.right)
        if isinstance(f, Iff):
            return go(f.left) == go(f.right)
        if isinstance(f, (Forall, Exists)):
            var, saved = f.var, env.get(f.var)
            hit = False
            want = isinstance(f, Exists)
            for value in range(m.size):
                env[var] = value
                if go(f.body) == want:
                    hit = True
                    break
            if saved is None:
                env.pop(var, None)
            else:
                env[var] = saved
            return hit if want else not hit
        raise TypeError(f"not a formula: {f!r}")

    return go(f)


# ============================================================
# enumeration
# ============================================================

def _fresh_names(sig: Signature, taken: Iterable[str]) -> Iterator[str]:
    taken = set(taken)
    for i in itertools.count():
        name = f"v{i}"
        if name not in taken and not sig.has_symbol(name):
            yield name


def enumerate_formulas(sig: Signature, free: Sequence[str],
                       size_bound: int) -> Iterator[Formula]:
    """All formulas over sig with free variables among `free`, by size.

    Emitted in increasing size (formula_size), with a fixed constructor
    order inside each size, so the stream is a prefix of the stream for any
    larger bound and no formula appears twice.  Bound variables are drawn
    from a canonical fresh-name sequence (one name per quantifier depth),
    so each alpha-equivalence class shows up exactly once.
    """
    free = tuple(free)
    if len(set(free)) != len(free):
        raise ValueError("free variable names must be distinct")
    for v in free:
        if sig.has_symbol(v):
            raise SignatureError(f"free variable {v!r} shadows a declared symbol")
    bound_names = list(itertools.islice(_fresh_names(sig, free), max(size_bound, 0)))
    rel_items = sorted(sig.relations.items())
    fun_items = sorted(sig.functions.items())
    const_terms = tuple(Const(c) for c in sig.constants)

    term_memo: dict[tuple[int, int], list[Term]] = {}

    def terms(k: int, depth: int) -> list[Term]:
        # terms containing exactly k function applications
        got = term_memo.get((k, depth))
        if got is not None:
            return got
        out: list[Term] = []
        if k == 0:
            out.extend(Var(v) for v in free)
            out.extend(Var(v) for v in bound_names[:depth])
            out.extend(const_terms)
        else:
            for fname, arity in fun_items:
                for args in arg_tuples(k - 1, arity, depth):
                    out.append(App(fname, args))
        term_memo[(k, depth)] = out
        return out

    def arg_tuples(k: int, arity: int, depth: int) -> Iterator[tuple[Term, ...]]:
        # argument tuples whose function applications total exactly k
        if arity == 1:
            for t in terms(k, depth):
                yield (t,)
            return
        for first in range(k + 1):
            for head in terms(first, depth):
                for rest in arg_tuples(k - first, arity - 1, depth):
                    yield (head,) + rest

    memo: dict[tuple[int, int], list[Formula]] = {}

    def formulas(s: int, depth: int) -> list[Formula]:
        got = memo.get((s, depth))
        if got is not None:
            return got
        out: list[Formula] = []
        for rname, arity in rel_items:
            for args in arg_tuples(s - 1, arity, depth):
                out.append(Rel(rname, args))
        for j in range(s):
            for left in terms(j, depth):
                for right in terms(s - 1 - j, depth):
                    out.append(Eq(left, right))
        if s >= 2:
            out.extend(Not(sub) for sub in formulas(s - 1, depth))
            for ctor in (And, Or, Implies, Iff):
                for i in range(1, s - 1):
                    for left in formulas(i, depth):
                        for right in formulas(s - 1 - i, depth):
                            out.append(ctor(left, right))
            var = bound_names[depth]
            for ctor in (Forall, Exists):
                for body in formulas(s - 1, depth + 1):
                    out.append(ctor(var, body))
        memo[(s, depth)] = out
        return out

    for s in range(1, size_bound + 1):
        yield from formulas(s, 0)


def random_formula(sig: Signature, rng: random.Random, max_depth: int,
                   free: Sequence[str] = ()) -> Formula:
    """Random formula of depth <= max_depth, closed when free is empty.

    Deterministic for a given seeded rng.  Used by the randomized Los
    harness; not a uniform distribution over anything.
    """
    fresh = _fresh_names(sig, free)

    def rand_term(vars_avail: tuple[str, ...], fuel: int) -> Term:
        pool: list[Term] = [Var(v) for v in vars_avail]
        pool.extend(Const(c) for c in sig.constants)
        if sig.functions and fuel > 0 and rng.random() < 0.3:
            name, arity = rng.choice(sorted(sig.functions.items()))
            return App(name, tuple(rand_term(vars_avail, fuel - 1) for _ in range(arity)))
        if not pool:
            raise ValueError("no terms available: no variables in scope and no constants")
        return rng.choice(pool)

    def rand_atom(vars_avail: tuple[str, ...]) -> Formula:
        choices = []
        if sig.relations:
            choices.append("rel")
        if vars_avail or sig.constants:
            choices.append("eq")
        kind = rng.choice(choices)
        if kind == "rel":
            name, arity = rng.choice(sorted(sig.relations.items()))
            return Rel(name, tuple(rand_term(vars_avail, 1) for _ in range(arity)))
        return Eq(rand_term(vars_avail, 1), rand_term(vars_avail, 1))

    def go(depth: int, vars_avail: tuple[str, ...]) -> Formula:
        atoms_possible = bool(vars_avail or sig.constants)
        if depth <= 1:
            if not atoms_possible:
                raise ValueError("cannot build a closed atom: empty scope, no constants")
            return rand_atom(vars_avail)
        kinds = ["forall", "exists"]
        if atoms_possible:
            kinds += ["atom", "not", "and", "or", "imp", "iff"]
        kind = rng.choice(kinds)
        if kind == "atom":
            return rand_atom(vars_avail)
        if kind == "not":
            return Not(go(depth - 1, vars_avail))
        if kind in ("and", "or", "imp", "iff"):
            ctor = {"and": And, "or": Or, "imp": Implies, "iff": Iff}[kind]
            return ctor(go(depth - 1, vars_avail), go(depth - 1, vars_avail))
        var = next(fresh)
        body = go(depth - 1, vars_avail + (var,))
        return Forall(var, body) if kind == "forall" else Exists(var, body)

    return go(max_depth, tuple(free))
