"""Command line front end.

Exit codes: 0 when the command succeeds and any checked property holds,
1 when a checked property fails (a witness goes to stdout), 2 on usage,
parse, file, or budget errors (one-line diagnostic on stderr).  All output
is deterministic byte for byte.

Theory files (.thy)::

    # comment
    rel NAME ARITY
    fun NAME ARITY
    const NAME
    axiom FORMULA

Model files (.mod) are token based, so one line or many::

    size N
    rel NAME { (a,b) (c,d) }
    fun NAME [ v0 v1 ... ]
    const NAME v

Relation arity is inferred from the first tuple (an empty table defaults
to arity 1), function arity from the table length.
"""

from __future__ import annotations

import argparse
import re
import sys
from importlib.resources import files as package_files
from pathlib import Path
from typing import Sequence

from . import definability, folang, groups, irregular, spectra, ultra
from .budget import BudgetExceededError, NodeCounter, WorkBudget
from .folang import FormulaSyntaxError, Signature, SignatureError
from .models import FiniteModel, Theory, enumerate_models

__all__ = [
    "CliError", "parse_theory_text", "load_theory", "theory_to_text",
    "parse_model_text", "load_model", "load_models", "model_to_text",
    "fixture_path", "dispatch", "main",
]


class CliError(Exception):
    """Bad command input; reported on stderr with exit code 2."""


# ============================================================
# theory files
# ============================================================

def parse_theory_text(text: str, name: str = "") -> Theory:
    decls: list[tuple[str, list[str], int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        decls.append((kind, [rest.strip()], lineno))
    relations: dict[str, int] = {}
    functions: dict[str, int] = {}
    constants: list[str] = []
    axiom_sources: list[tuple[str, int]] = []
    for kind, (rest,), lineno in decls:
        try:
            if kind in ("rel", "fun"):
                name_part, arity_part = rest.rsplit(" ", 1)
                target = relations if kind == "rel" else functions
                symbol = name_part.strip()
                if symbol in relations or symbol in functions:
                    raise CliError(f"line {lineno}: {symbol!r} declared twice")
                target[symbol] = int(arity_part)
            elif kind == "const":
                constants.append(rest)
            elif kind == "axiom":
                axiom_sources.append((rest, lineno))
            else:
                raise CliError(f"line {lineno}: unknown directive {kind!r}")
        except (ValueError, SignatureError) as e:
            raise CliError(f"line {lineno}: {e}") from None
    try:
        sig = Signature(relations, functions, constants)
    except SignatureError as e:
        raise CliError(str(e)) from None
    axioms = []
    for source, lineno in axiom_sources:
        try:
            axioms.append(folang.parse_formula(sig, source))
        except FormulaSyntaxError as e:
            raise CliError(f"line {lineno}: {e}") from None
    return Theory(sig, axioms, name=name)


def theory_to_text(t: Theory) -> str:
    lines = [f"# {line}" for line in t.note.splitlines()]
    lines.extend(f"rel {name} {arity}" for name, arity in t.sig.relations.items())
    lines.extend(f"fun {name} {arity}" for name, arity in t.sig.functions.items())
    lines.extend(f"const {name}" for name in t.sig.constants)
    lines.extend(f"axiom {folang.formula_to_text(ax)}" for ax in t.axioms)
    return "\n".join(lines) + "\n"


def fixture_path(name: str) -> Path:
    return Path(str(package_files("defeq") / "fixtures" / name))


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    if "/" not in path:
        packaged = fixture_path(path)
        if packaged.exists():
            return packaged
    raise CliError(f"no such file: {path}")


def load_theory(path: str) -> Theory:
    p = _resolve(path)
    return parse_theory_text(p.read_text(), name=p.stem)


# ============================================================
# model files
# ============================================================

_MOD_TOKEN = re.compile(r"[(){}\[\],]|[^\s(){}\[\],#]+|#[^\n]*")


class _RawModel:
    __slots__ = ("size", "rels", "funs", "consts")

    def __init__(self):
        self.size = None
        self.rels: dict[str, list[tuple[int, ...]]] = {}
        self.funs: dict[str, tuple[int, ...]] = {}
        self.consts: dict[str, int] = {}


def _parse_model_raw(text: str) -> _RawModel:
    tokens = [t for t in _MOD_TOKEN.findall(text) if not t.startswith("#")]
    raw = _RawModel()
    i = 0

    def take() -> str:
        nonlocal i
        if i >= len(tokens):
            raise CliError("unexpected end of model file")
        i += 1
        return tokens[i - 1]

    def take_int() -> int:
        tok = take()
        try:
            return int(tok)
        except ValueError:
            raise CliError(f"expected an integer, found {tok!r}") from None

    def expect(tok: str) -> None:
        found = take()
        if found != tok:
            raise CliError(f"expected {tok!r}, found {found!r}")

    while i < len(tokens):
        kind = take()
        if kind == "size":
            raw.size = take_int()
        elif kind == "rel":
            name = take()
            expect("{")
            table = []
            while tokens[i:i + 1] != ["}"]:
                expect("(")
                entry = [take_int()]
                while tokens[i:i + 1] == [","]:
                    take()
                    entry.append(take_int())
                expect(")")
                table.append(tuple(entry))
            expect("}")
            if name in raw.rels:
                raise CliError(f"duplicate relation {name!r}")
            raw.rels[name] = table
        elif kind == "fun":
            name = take()
            expect("[")
            values = []
            while tokens[i:i + 1] != ["]"]:
                values.append(take_int())
            expect("]")
            if name in raw.funs:
                raise CliError(f"duplicate function {name!r}")
            raw.funs[name] = tuple(values)
        elif kind == "const":
            name = take()
            raw.consts[name] = take_int()
        else:
            raise CliError(f"unknown model directive {kind!r}")
    if raw.size is None:
        raise CliError("model file needs a size directive")
    return raw


def _fun_arity(name: str, table_len: int, size: int) -> int:
    if size == 1:
        if table_len != 1:
            raise CliError(f"function {name!r}: table length {table_len} on a 1-element universe")
        return 1
    arity, space = 1, size
    while space < table_len:
        arity, space = arity + 1, space * size
    if space != table_len:
        raise CliError(f"function {name!r}: table length {table_len} is not a power of {size}")
    return arity


def _infer_signature(raws: Sequence[_RawModel]) -> Signature:
    rel_arities: dict[str, set[int]] = {}
    fun_arities: dict[str, set[int]] = {}
    consts: set[str] = set()
    for raw in raws:
        for name, table in raw.rels.items():
            rel_arities.setdefault(name, set()).update(len(t) for t in table)
        for name, table in raw.funs.items():
            fun_arities.setdefault(name, set()).add(_fun_arity(name, len(table), raw.size))
        consts.update(raw.consts)
    relations = {}
    for name, arities in rel_arities.items():
        if len(arities) > 1:
            raise CliError(f"relation {name!r} has tuples of mixed arity {sorted(arities)}")
        relations[name] = next(iter(arities)) if arities else 1
    functions = {}
    for name, arities in fun_arities.items():
        if len(arities) != 1:
            raise CliError(f"function {name!r} has inconsistent arity across files")
        functions[name] = next(iter(arities))
    try:
        return Signature(relations, functions, sorted(consts))
    except SignatureError as e:
        raise CliError(str(e)) from None


def _build_model(raw: _RawModel, sig: Signature) -> FiniteModel:
    try:
        return FiniteModel(sig, raw.size,
                           {n: raw.rels.get(n, []) for n in sig.relations},
                           raw.funs, raw.consts)
    except (ValueError, SignatureError) as e:
        raise CliError(str(e)) from None


def parse_model_text(text: str, sig: Signature | None = None) -> FiniteModel:
    raw = _parse_model_raw(text)
    return _build_model(raw, sig if sig is not None else _infer_signature([raw]))


def load_model(path: str, sig: Signature | None = None) -> FiniteModel:
    return parse_model_text(_resolve(path).read_text(), sig)


def load_models(paths: Sequence[str]) -> list[FiniteModel]:
    """Load several model files against their common inferred signature."""
    raws = [_parse_model_raw(_resolve(p).read_text()) for p in paths]
    sig = _infer_signature(raws)
    return [_build_model(raw, sig) for raw in raws]


def model_to_text(m: FiniteModel) -> str:
    """Single-line rendering in the model file syntax."""
    parts = [f"size {m.size}"]
    for name in m.sig.relations:
        tuples = " ".join(f"({','.join(map(str, t))})" for t in sorted(m.rels[name]))
        parts.append(f"rel {name} {{ {tuples} }}".replace("{  }", "{ }"))
    for name in m.sig.functions:
        parts.append(f"fun {name} [ {' '.join(map(str, m.funs[name]))} ]")
    for name in m.sig.constants:
        parts.append(f"const {name} {m.consts[name]}")
    return " ".join(parts)


# ============================================================
# subcommands
# ============================================================

def _budget(args) -> WorkBudget:
    return WorkBudget(max_nodes=args.max_nodes, max_functions=args.max_functions)


def _spec_sizes(args) -> tuple[Sequence[int] | None, int]:
    if args.size is not None:
        return [args.size], args.size
    return None, args.max_size


def cmd_parse(args):
    t = load_theory(args.theory)
    f = folang.parse_formula(t.sig, args.formula)
    return 0, [folang.formula_to_text(f)]


def cmd_models(args):
    t = load_theory(args.theory)
    ms = enumerate_models(t, args.size, _budget(args))
    if args.count_only:
        return 0, [str(len(ms))]
    return 0, [model_to_text(m) for m in ms]


def cmd_aut(args):
    m = load_model(args.model)
    return 0, [groups.group_to_text(groups.automorphism_group(m))]


def cmd_spec(args):
    t = load_theory(args.theory)
    sizes, max_size = _spec_sizes(args)
    s = spectra.aut_spec(t, max_size, _budget(args), sizes=sizes)
    return 0, s.report_lines()


def cmd_spec_compare(args):
    t1, t2 = load_theory(args.t1), load_theory(args.t2)
    sizes, max_size = _spec_sizes(args)
    budget = _budget(args)
    s1 = spectra.aut_spec(t1, max_size, budget, sizes=sizes)
    s2 = spectra.aut_spec(t2, max_size, budget, sizes=sizes)
    witness = spectra.compare_spectra(s1, s2)
    if witness is None:
        return 0, ["EQUAL"]
    return 1, [f"WITNESS {witness.describe()}"]


def cmd_build_iso(args):
    t1, t2 = load_theory(args.t1), load_theory(args.t2)
    budget = _budget(args)
    try:
        b = spectra.build_concrete_iso(t1, t2, args.max_size, budget)
    except spectra.SpectraMismatchError as e:
        return 1, [f"WITNESS {e.witness.describe()}"]
    lines = [f"{model_to_text(m)} => {model_to_text(bm)}" for m, bm in b.items()]
    if not args.verify:
        return 0, lines
    report = spectra.verify_concrete_iso(
        b, t1, t2, args.max_size,
        index_bound=args.index_bound, sample_budget=args.sample_budget,
        budget=budget)
    flag = {True: "PASS", False: "FAIL"}
    lines.append(f"verdict universes={flag[report.universes_ok]} "
                 f"isomorphisms={flag[report.iso_ok]} "
                 f"ultraproducts={flag[report.ultra_ok]} "
                 f"checked_tuples={report.checked_tuples}")
    if report.universe_witness is not None:
        lines.append(f"universe witness: {model_to_text(report.universe_witness)}")
    if report.iso_witness is not None:
        m, other, h = report.iso_witness
        lines.append(f"iso witness: h={','.join(map(str, h))} "
                     f"m: {model_to_text(m)} n: {model_to_text(other)}")
    if report.ultra_witness is not None:
        k, point, tup = report.ultra_witness
        shown = " | ".join(model_to_text(m) for m in tup)
        lines.append(f"ultra witness: k={k} point={point} models: {shown}")
    return (0 if report.ok else 1), lines


def _closed_formulas_to_depth(sig: Signature, depth: int, budget: WorkBudget):
    nodes = NodeCounter(budget, "enumerating closed formulas")
    for f in folang.enumerate_formulas(sig, (), (1 << depth) - 1):
        nodes.tick()
        if folang.formula_depth(f) <= depth:
            yield f


def cmd_ultra(args):
    ms = load_models(args.models.split(","))
    u = ultra.Ultrafilter.principal(args.principal, len(ms))
    budget = _budget(args)
    result = ultra.ultraproduct(ms, u, budget)
    lines = [model_to_text(result.quotient)]
    if args.los_depth is not None:
        checked = failures = 0
        witness = None
        for f in _closed_formulas_to_depth(ms[0].sig, args.los_depth, budget):
            report = ultra.los_check(ms, u, f, budget)
            checked += 1
            if not report.ok:
                failures += 1
                if witness is None:
                    witness = f
        lines.append(f"los depth={args.los_depth} formulas={checked} failures={failures}")
        if witness is not None:
            lines.append(f"los witness: {folang.formula_to_text(witness)}")
            return 1, lines
    return 0, lines


def cmd_beth(args):
    t = load_theory(args.theory)
    phi = definability.beth_search(t, args.target, args.size, args.bound, _budget(args))
    if phi is None:
        return 1, [f"NOTFOUND target={args.target} size<={args.size} bound<={args.bound}"]
    return 0, [folang.formula_to_text(phi)]


def cmd_idc(args):
    t = load_theory(args.theory)
    hidden = [h for h in args.hidden.split(",") if h]
    witness = definability.unique_expansion_check(t, hidden, args.size, _budget(args))
    if witness is None:
        return 0, ["OK"]
    m1, m2 = witness
    return 1, ["WITNESS", model_to_text(m1), model_to_text(m2)]


def cmd_subclosure(args):
    t = load_theory(args.theory)
    witness = definability.substructure_closure_check(t, args.size, _budget(args))
    if witness is None:
        return 0, ["OK"]
    m, subset = witness
    return 1, ["WITNESS",
               f"model: {model_to_text(m)}",
               f"subset: {','.join(map(str, subset))}"]


_RANGE = re.compile(r"(\d+)\.\.(\d+)$")


def cmd_seq(args):
    m = _RANGE.match(args.range)
    if m is None:
        raise CliError(f"bad range {args.range!r}, expected START..STOP")
    start, stop = int(m.group(1)), int(m.group(2))
    return 0, [" ".join(irregular.symbols(args.variant, start, stop))]


def cmd_pattern(args):
    p = irregular.parse_pattern(args.pattern)
    pos = irregular.find_pattern(args.variant, p, args.bound)
    if pos is None:
        return 1, ["NOTFOUND"]
    return 0, [str(pos)]


def cmd_irregular_report(args):
    report = irregular.irregularity_report(args.variant, args.max_n, args.bound)
    lines = [f"pattern={e.pattern.to_text()} "
             f"first={'-' if e.first is None else e.first} count={e.count}"
             for e in report.entries]
    tag = f"IRREGULAR-UP-TO n={report.max_n} bound={report.bound}"
    if report.ok:
        return 0, lines + [f"{tag}: PASS"]
    missing = report.missing[0].to_text()
    return 1, lines + [f"{tag}: FAIL missing={missing}"]


def cmd_ts_axioms(args):
    t = irregular.emit_ts_axioms(args.variant, args.depth)
    return 0, theory_to_text(t).rstrip("\n").splitlines()


# ============================================================
# parser and dispatch
# ============================================================

def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-nodes", type=int, default=WorkBudget().max_nodes,
                   help="cap on search nodes visited (default %(default)s)")
    p.add_argument("--max-functions", type=int, default=WorkBudget().max_functions,
                   help="cap on function/constant table combinations (default %(default)s)")


def _add_size_choice(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--size", type=int, default=None,
                   help="universe size (this size only)")
    g.add_argument("--max-size", type=int, default=None,
                   help="all universe sizes 1..N")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defeq",
        description="Finite-model workbench: automorphism spectra, concrete "
                    "model-class bijections, ultraproducts, definability "
                    "checks, and irregular 0/1 sequences.")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker count; accepted for compatibility, "
                             "evaluation is sequential (default %(default)s)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add("parse", cmd_parse, "parse a formula against a theory's signature")
    p.add_argument("--theory", required=True)
    p.add_argument("--formula", required=True)

    p = add("models", cmd_models, "enumerate the models of a theory at one size")
    p.add_argument("--theory", required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--count-only", action="store_true")
    _add_budget_flags(p)

    p = add("aut", cmd_aut, "automorphism group of a model")
    p.add_argument("--model", required=True)

    p = add("spec", cmd_spec, "automorphism spectrum of a theory")
    p.add_argument("--theory", required=True)
    _add_size_choice(p)
    _add_budget_flags(p)

    p = add("spec-compare", cmd_spec_compare, "compare two spectra")
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    _add_size_choice(p)
    _add_budget_flags(p)

    p = add("build-iso", cmd_build_iso,
            "build (and optionally verify) the spectrum-driven bijection")
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    p.add_argument("--max-size", type=int, required=True)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--index-bound", type=int, default=2,
                   help="largest ultrafilter index set for the verifier")
    p.add_argument("--sample-budget", type=int, default=2000,
                   help="model tuples sampled per (index size, point)")
    _add_budget_flags(p)

    p = add("ultra", cmd_ultra, "ultraproduct of model files")
    p.add_argument("--models", required=True,
                   help="comma-separated model files, one per index")
    p.add_argument("--principal", type=int, required=True,
                   help="principal point of the ultrafilter")
    p.add_argument("--los-depth", type=int, default=None,
                   help="also check the Los equivalence for all closed "
                        "formulas up to this depth")
    _add_budget_flags(p)

    p = add("beth", cmd_beth, "search for an explicit definition of a relation")
    p.add_argument("--theory", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--bound", type=int, required=True,
                   help="formula size bound for the search")
    _add_budget_flags(p)

    p = add("idc", cmd_idc, "implicit definability (unique expansion) check")
    p.add_argument("--theory", required=True)
    p.add_argument("--hidden", required=True,
                   help="comma-separated relation names to hide")
    p.add_argument("--size", type=int, required=True)
    _add_budget_flags(p)

    p = add("subclosure", cmd_subclosure, "substructure closure check")
    p.add_argument("--theory", required=True)
    p.add_argument("--size", type=int, required=True)
    _add_budget_flags(p)

    p = add("seq", cmd_seq, "print a stretch of a sequence variant")
    p.add_argument("--variant", required=True)
    p.add_argument("--range", required=True, help="half-open START..STOP")

    p = add("pattern", cmd_pattern, "first occurrence of a membership pattern")
    p.add_argument("--variant", required=True)
    p.add_argument("--pattern", required=True, help="'m1,m2,...:n' (':n' for empty)")
    p.add_argument("--bound", type=int, required=True)

    p = add("irregular-report", cmd_irregular_report,
            "occurrence report for all patterns up to a length")
    p.add_argument("--variant", required=True)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--bound", type=int, required=True)

    p = add("ts-axioms", cmd_ts_axioms, "emit the finite prefix theory of a variant")
    p.add_argument("--variant", required=True)
    p.add_argument("--depth", type=int, required=True)

    return parser


def dispatch(argv: Sequence[str]) -> tuple[int, str]:
    """Run one command line; returns (exit code, stdout text).

    Diagnostics go straight to stderr, witnesses and results to the
    returned text.
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        code = e.code if isinstance(e.code, int) else 2
        return code, ""
    if args.jobs < 1:
        print("defeq: --jobs must be at least 1", file=sys.stderr)
        return 2, ""
    try:
        code, lines = args.handler(args)
    except (CliError, FormulaSyntaxError, SignatureError, BudgetExceededError,
            ValueError, OSError) as e:
        print(f"defeq: {e}", file=sys.stderr)
        return 2, ""
    return code, "".join(line + "\n" for line in lines)


def main(argv: Sequence[str] | None = None) -> int:
    code, out = dispatch(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
