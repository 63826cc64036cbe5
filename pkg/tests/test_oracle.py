import random

import pytest
from hypothesis import given, settings, strategies as st

from gen import deduction_instance
from prudent.basis import ContextPair, holds
from prudent.oracle import EnumerationBudget, audit_role, brute_pairs, brute_reach, enumerate_contexts, mutants
from prudent.compiler import compile_role
from prudent.deduction import reach
from prudent.rewriting import parse_theory
from prudent.roles import role_input
from prudent.terms import Term, dag_size, hole

UNARY = parse_theory("theory unary\npublic f/1\nend\n")
ZERO = parse_theory("theory zero\npublic f/1 0/0\nend\n")
BARE = parse_theory("theory bare\npublic g/2\nend\n")
DESTRUCT = parse_theory(
    "theory destruct\npublic proj1/1 proj2/1 dec/2 partner/1 payload/1\nprivate pair/2 enc/2 inv/1 msg/2\n"
    "vars X Y\nrule proj1(pair(X,Y)) -> X\nrule proj2(pair(X,Y)) -> Y\nrule dec(enc(X,Y),inv(Y)) -> X\n"
    "rule partner(msg(X,Y)) -> X\nrule payload(msg(X,Y)) -> Y\nend\n")


def test_stream_starts_with_hole():
    assert list(enumerate_contexts(1, EnumerationBudget(2), UNARY)) == [hole(1), Term("f", [hole(1)])]


def test_public_constant_enumerated():
    assert Term("0") in list(enumerate_contexts(0, EnumerationBudget(2), ZERO))


def test_size_one_without_constants():
    assert list(enumerate_contexts(3, EnumerationBudget(1), BARE)) == [hole(1), hole(2), hole(3)]


def test_dag_sizes_and_count_bound(dy):
    stream = list(enumerate_contexts(2, EnumerationBudget(3), dy))
    assert all(dag_size(c) <= 3 for c in stream)
    sizes = [dag_size(c) for c in stream]
    assert sizes == sorted(sizes)
    assert len(list(enumerate_contexts(2, EnumerationBudget(3, 5), dy))) == 5
    # sharing counts once: g(x_1,x_1) has dag size 2
    assert Term("g", [hole(1), hole(1)]) in list(enumerate_contexts(1, EnumerationBudget(2), BARE))


def test_budget_validation():
    with pytest.raises(ValueError):
        EnumerationBudget(0)


def test_stream_deterministic(dy):
    a = list(enumerate_contexts(2, EnumerationBudget(3), dy))
    b = list(enumerate_contexts(2, EnumerationBudget(3), dy))
    assert a == b


def test_brute_reach_examples(dy):
    s = [dy.parse("enc(a,k)"), dy.parse("inv(k)")]
    assert brute_reach(s, Term("a"), EnumerationBudget(3), dy) == dy.parse("dec(x_1,x_2)")
    assert brute_reach([Term("a")], Term("a"), EnumerationBudget(1), dy) == hole(1)
    assert brute_reach([Term("a")], Term("b"), EnumerationBudget(3), dy) is None


def test_brute_pairs_examples(dy, nspk_roles):
    assert ContextPair(hole(1), hole(2)) in brute_pairs([Term("a"), Term("a")], EnumerationBudget(2), dy)
    no_tests = parse_theory(
        "theory plain\npublic pair/2 proj1/1 proj2/1\nvars X Y\n"
        "rule proj1(pair(X,Y)) -> X\nrule proj2(pair(X,Y)) -> Y\nend\n")
    assert brute_pairs([Term("a"), Term("b")], EnumerationBudget(2), no_tests) == set()
    s = [m.message for m in role_input(nspk_roles["A"])]
    assert ContextPair(dy.parse("partner(x_7)"), hole(3)) in brute_pairs(s, EnumerationBudget(2), dy)
    # the Na check sits at dag size 5; enumerate over the destructors only
    small = [s[0], s[5], s[6]]
    assert ContextPair(DESTRUCT.parse("proj1(dec(payload(x_3),x_2))"), hole(1)) in brute_pairs(small, EnumerationBudget(5), DESTRUCT)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_brute_pairs_hold(dy, seed):
    s, _ = deduction_instance(random.Random(seed))
    assert all(holds(p, s, dy) for p in brute_pairs(s, EnumerationBudget(3), dy))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_oracle_no_stronger_than_reach(dy, seed):
    s, t = deduction_instance(random.Random(seed))
    if brute_reach(s, t, EnumerationBudget(3), dy) is not None:
        assert reach(s, t, dy) is not None


def test_mutants_differ_in_one_message(dy):
    s = [dy.parse("pair(a,b)"), Term("k")]
    stream = mutants(s, random.Random(0))
    for _ in range(30):
        m = next(stream)
        assert len(m) == 2 and sum(x != y for x, y in zip(m, s)) == 1


def test_audit_nspk(dy, nspk_roles):
    r = nspk_roles["A"]
    report = audit_role(compile_role(r, dy), r, dy, depth=3, samples=60)
    assert report.ok and report.rejected_breaking == report.breaking > 0
    stripped = audit_role(compile_role(r, dy, emit="none"), r, dy, depth=3, samples=60)
    assert not stripped.ok
