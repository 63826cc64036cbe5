import itertools
import random

from hypothesis import given, settings, strategies as st

from gen import xor_strand
from prudent.basis import equality_basis, holds, refines
from prudent.deduction import reach
from prudent.terms import Term, hole, instantiate_context, parse_term
from prudent.xor import (
    ZERO,
    MixedTermError,
    XorSystem,
    nullspace,
    solve,
    to_term,
    xor_basis,
    xor_canonicalize,
    xor_of,
    xor_reach,
)

X = XorSystem()
a, b, c = Term("a"), Term("b"), Term("c")


def P(text):
    return parse_term(text, X.sig)


def test_canonicalize_examples():
    assert xor_canonicalize([a, b, a]) == frozenset([b])
    assert xor_canonicalize([ZERO, a]) == frozenset([a])
    assert xor_canonicalize([a, b, c]) == frozenset([a, b, c])
    assert xor_of(P("a (+) b (+) a")) == frozenset([b])


def test_mixed_terms_rejected():
    try:
        xor_of(P("msg(a,b) (+) c"))
    except MixedTermError:
        pass
    else:
        raise AssertionError("mixed term accepted")


def test_reach_examples():
    assert xor_reach([P("a (+) b"), b], a) == P("x_1 (+) x_2")
    assert xor_reach([a], ZERO) == ZERO
    assert xor_reach([a], b) is None


def test_basis_examples():
    assert xor_basis([a, a]) == [(P("x_1 (+) x_2"), ZERO)]
    [(lhs, rhs)] = xor_basis([P("a (+) b"), a, b])
    names = [Term("h1"), Term("h2"), Term("h3")]
    assert xor_of(instantiate_context(lhs, names)) == frozenset(names) and rhs == ZERO
    assert xor_basis([a, b]) == []


def test_solve_and_nullspace_small():
    cols = [frozenset([a, b]), frozenset([b]), frozenset([a])]
    assert solve(cols, frozenset([a])) in ([0, 1], [2])
    assert len(nullspace(cols)) == 1


def test_message_envelopes():
    s = [P("msg(A, a (+) b)"), b]
    r = reach(s, a, X)
    assert X.equal_mod(instantiate_context(r, s), a)
    basis = equality_basis(s, X)
    assert all(holds(p, s, X) for p in basis)
    assert any(str(p.left) == "msg(partner(x_1),payload(x_1))" for p in basis)


def _subset_sum_zero(msgs):
    for k in range(1, len(msgs) + 1):
        for idx in itertools.combinations(range(len(msgs)), k):
            if not xor_canonicalize([t for i in idx for t in msgs[i]]):
                yield idx


def _satisfies_all_subsets(cand, zero_sets):
    return all(not xor_canonicalize([t for i in idx for t in cand[i]]) for idx in zero_sets)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_basis_matches_exhaustive_subsets(seed):
    rng = random.Random(seed)
    s = xor_strand(rng)
    basis = xor_basis(s)
    terms = [to_term(m) for m in s]
    assert all(X.equal_mod(instantiate_context(l, terms), instantiate_context(r, terms)) for l, r in basis)
    zero_sets = list(_subset_sum_zero(s))
    for _ in range(6):
        cand = xor_strand(rng, len(s), 6)
        cand = (cand + [frozenset()] * len(s))[: len(s)]
        cterms = [to_term(m) for m in cand]
        assert refines(cterms, basis, X) == _satisfies_all_subsets(cand, zero_sets)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reach_each_message(seed):
    s = xor_strand(random.Random(seed))
    terms = [to_term(m) for m in s]
    for i, m in enumerate(terms):
        r = xor_reach(terms, m)
        assert r is not None and X.equal_mod(instantiate_context(r, terms), m)


def test_solution_hole_order():
    assert xor_reach([a, b, c], P("c (+) a")) == Term("xor", [hole(1), hole(3)])
