"""Ultrafilters and ultraproducts, checked against first principles."""

import itertools
import random

import pytest

from defeq.budget import BudgetExceededError, WorkBudget
from defeq.folang import Signature, SignatureError, parse_formula, random_formula
from defeq.models import FiniteModel
from defeq.ultra import (
    Ultrafilter, diagonal_embedding, los_check, ultrafilters_on, ultraproduct,
)

SIG = Signature({"P": 1, "E": 2}, {}, ["c"])


def model_of(size, p_members, edges=(), c=0):
    return FiniteModel(SIG, size,
                       {"P": [(a,) for a in p_members], "E": edges}, {}, {"c": c})


def random_family(rng, count):
    out = []
    for _ in range(count):
        size = rng.choice([1, 2, 3])
        out.append(model_of(
            size,
            [a for a in range(size) if rng.random() < 0.5],
            [t for t in itertools.product(range(size), repeat=2)
             if rng.random() < 0.3],
            rng.randrange(size)))
    return out


# ------------------------------------------------------------
# ultrafilter axioms
# ------------------------------------------------------------

def naive_is_ultrafilter(size, members):
    """Definition chasing over the powerset, independent of validate()."""
    subsets = [frozenset(s) for r in range(size + 1)
               for s in itertools.combinations(range(size), r)]
    fam = {frozenset(s) for s in members}
    if frozenset() in fam:
        return False
    if any(s & t not in fam for s in fam for t in fam):
        return False
    if any(s in fam and s <= t and t not in fam for s in fam for t in subsets):
        return False
    universe = frozenset(range(size))
    return all((s in fam) != (universe - s in fam) for s in subsets)


def test_principal_ultrafilters_validate():
    for size in (1, 2, 3, 4):
        for point in range(size):
            u = Ultrafilter.principal(point, size)
            u.validate()
            assert u.principal_point() == point
            assert naive_is_ultrafilter(size, u.members)
    with pytest.raises(ValueError):
        Ultrafilter.principal(3, 3)


def test_validate_names_the_broken_axiom():
    with pytest.raises(ValueError, match="empty set"):
        Ultrafilter(2, [frozenset(), frozenset({0}), frozenset({0, 1})]).validate()
    with pytest.raises(ValueError, match="intersection"):
        Ultrafilter(3, [{0}, {1}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}]).validate()
    with pytest.raises(ValueError, match="upward|complement"):
        Ultrafilter(2, [{0}]).validate()
    with pytest.raises(ValueError, match="complement|exactly one"):
        Ultrafilter(2, [{0, 1}]).validate()


def test_every_ultrafilter_on_a_small_index_set_is_principal():
    # sweep every family of subsets, keep the ones passing the naive
    # definition, and confirm they are exactly the principal ones
    for size in (1, 2, 3):
        subsets = [frozenset(s) for r in range(size + 1)
                   for s in itertools.combinations(range(size), r)]
        valid = []
        for picks in itertools.product([False, True], repeat=len(subsets)):
            fam = [s for s, take in zip(subsets, picks) if take]
            if naive_is_ultrafilter(size, fam):
                valid.append(frozenset(fam))
        expected = {Ultrafilter.principal(p, size).members for p in range(size)}
        assert set(valid) == expected
        assert len(ultrafilters_on(size)) == size


# ------------------------------------------------------------
# quotients
# ------------------------------------------------------------

def test_principal_quotient_equals_the_pointed_factor_frozen():
    ms = [model_of(1, []), model_of(1, [0]), model_of(1, [0])]
    res = ultraproduct(ms, Ultrafilter.principal(2, 3))
    assert res.quotient == ms[2]
    assert res.reps[0] == (0, 0, 0)


def test_principal_quotient_equals_the_pointed_factor_randomized():
    rng = random.Random(414)
    for _ in range(25):
        ms = random_family(rng, rng.choice([1, 2, 3]))
        for point in range(len(ms)):
            res = ultraproduct(ms, Ultrafilter.principal(point, len(ms)))
            assert res.quotient == ms[point]


def test_class_map_is_consistent_with_representatives():
    ms = [model_of(2, [0]), model_of(3, [1, 2])]
    u = Ultrafilter.principal(1, 2)
    res = ultraproduct(ms, u)
    assert res.quotient.size == len(res.reps)
    for func, cls in res.class_map.items():
        rep = res.reps[cls]
        agree = frozenset(i for i in range(2) if func[i] == rep[i])
        assert u.contains(agree)
    # distinct classes disagree on an ultrafilter-large set complement
    for a, b in itertools.combinations(res.reps, 2):
        agree = frozenset(i for i in range(2) if a[i] == b[i])
        assert not u.contains(agree)


def test_mismatched_signatures_are_rejected():
    other = FiniteModel(Signature({"P": 1}, {}, []), 1, {"P": []})
    with pytest.raises(SignatureError):
        ultraproduct([model_of(1, []), other], Ultrafilter.principal(0, 2))
    with pytest.raises(ValueError):
        ultraproduct([model_of(1, [])], Ultrafilter.principal(0, 2))


def test_ultraproduct_budget_guard():
    ms = [model_of(3, []), model_of(3, []), model_of(3, [])]
    with pytest.raises(BudgetExceededError):
        ultraproduct(ms, Ultrafilter.principal(0, 3), WorkBudget(max_nodes=8))


# ------------------------------------------------------------
# diagonal embedding and the product-truth equivalence
# ------------------------------------------------------------

def test_diagonal_embedding_is_the_identity_on_constant_families():
    m = model_of(3, [1], [(0, 1), (2, 2)], c=2)
    u = Ultrafilter.principal(1, 2)
    emb = diagonal_embedding(m, u)
    assert emb == {0: 0, 1: 1, 2: 2}
    assert ultraproduct([m, m], u).quotient == m


def test_diagonal_embedding_is_elementary_for_closed_formulas():
    from defeq.folang import enumerate_formulas, eval_formula, formula_depth

    m = model_of(2, [1], [(0, 1)], c=0)
    u = Ultrafilter.principal(0, 2)
    quotient = ultraproduct([m, m], u).quotient
    checked = 0
    for f in enumerate_formulas(SIG, (), 5):
        if formula_depth(f) > 3:
            continue
        assert eval_formula(m, f) == eval_formula(quotient, f)
        checked += 1
    assert checked > 100


def test_los_equivalence_on_random_triples():
    rng = random.Random(20260815)
    failures = 0
    for _ in range(100):
        ms = random_family(rng, rng.choice([2, 3]))
        point = rng.randrange(len(ms))
        f = random_formula(SIG, rng, rng.choice([2, 3, 4]))
        report = los_check(ms, Ultrafilter.principal(point, len(ms)), f)
        if not report.ok:
            failures += 1
    assert failures == 0


def test_los_report_fields_frozen():
    ms = [model_of(1, []), model_of(1, [0]), model_of(1, [0])]
    u = Ultrafilter.principal(2, 3)
    f = parse_formula(SIG, "E x. P(x)")
    report = los_check(ms, u, f)
    assert report.lhs is True
    assert sorted(report.truth_set) == [1, 2]
    assert report.rhs is True and report.ok
    g = parse_formula(SIG, "A x. P(x) & E(x,x)")
    report2 = los_check(ms, u, g)
    assert report2.lhs is False and sorted(report2.truth_set) == [] and report2.ok


def test_los_check_requires_closed_formulas():
    ms = [model_of(1, []), model_of(1, [0])]
    with pytest.raises(ValueError):
        los_check(ms, Ultrafilter.principal(0, 2), parse_formula(SIG, "P(x)"))
