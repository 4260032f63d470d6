import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lithium.core import ANY_SORT, App, Clause, Literal, Var, apply_literal
from lithium.unify import (
    NoUnifier,
    bipolar_report,
    constrained_vars,
    mgu,
    try_mgu,
    unconstrained_count,
    unifiable_apart,
    unify_terms,
)

x, x2 = Var("x", "Subjects"), Var("x2", "Subjects")
y = Var("y", "Actions")
alice = App("Alice", (), "Subjects")
play = App("play", (), "Actions")


def f(t):
    return App("f", (t,), "Subjects")


def P(s, a, positive=True):
    return Literal(positive, "Permitted", (s, a))


def test_mgu_binds_variables():
    assert mgu(P(x, y), P(alice, play)) == {x: alice, y: play}


def test_mgu_resolves_chains():
    s = mgu(Literal(True, "R", (x, f(x2))), Literal(True, "R", (x2, f(alice))))
    assert apply_literal(Literal(True, "R", (x, x2)), s) == Literal(True, "R", (alice, alice))


def test_occurs_check():
    with pytest.raises(NoUnifier):
        mgu(Literal(True, "Q", (x,)), Literal(True, "Q", (f(x),)))


def test_sort_clash_fails():
    assert unify_terms(Var("z", "Actions"), alice) is None


def test_wildcard_sort_unifies_with_any_sort():
    r = Var("r", ANY_SORT)
    assert unify_terms(r, play) == {r: play}
    assert unify_terms(r, alice) == {r: alice}


def test_different_predicates_never_unify():
    assert try_mgu(Literal(True, "Q", (x,)), Literal(True, "R", (x,))) is None


def test_unifiable_apart_renames():
    # Q(x) and Q(f(x)) clash by occurs check unless renamed apart
    assert unifiable_apart(Literal(True, "Q", (x,)), Literal(True, "Q", (f(x),)))


def test_bipolar_pair_within_one_clause():
    # forall x1, x2: Permitted(x2, play) => Permitted(x1, play)
    c = Clause([P(x2, play, False), P(x, play)])
    rep = bipolar_report([c])
    assert rep.count(0) == 2
    assert len(rep.pairs) == 1


def test_bipolar_pairs_across_clauses():
    c0 = Clause([Literal(False, "Q", (x,)), P(x, play)])
    c1 = Clause([P(alice, play, False), Literal(True, "R", (alice,))])
    c2 = Clause([Literal(True, "S", (alice,))])
    rep = bipolar_report([c0, c1, c2])
    assert rep.pairs == [(0, P(x, play), 1, P(alice, play, False))]
    assert rep.count(2) == 0
    assert rep.partners(1, P(alice, play, False)) == [(0, P(x, play))]


def test_no_bipolars_on_distinct_ground_args():
    c0 = Clause([P(alice, play)])
    c1 = Clause([P(App("Bob", (), "Subjects"), play, False)])
    assert bipolar_report([c0, c1]).empty


def test_constrained_variables():
    c = Clause([Literal(False, "Q", (x,)), Literal(False, "R", (x2,)), P(f(x), y)])
    assert constrained_vars(c) == {x, y}
    assert unconstrained_count(c) == 1
    # a bipolar Permitted literal does not constrain
    assert unconstrained_count(c, {P(f(x), y)}) == 3


names = st.sampled_from([x, x2, alice, App("Bob", (), "Subjects")])
terms = st.recursive(names, lambda inner: inner.map(f), max_leaves=3)


@settings(max_examples=200, deadline=None)
@given(terms, terms, terms, terms)
def test_mgu_is_a_unifier(a, b, c, d):
    l1, l2 = Literal(True, "R", (a, b)), Literal(True, "R", (c, d))
    s = try_mgu(l1, l2)
    if s is not None:
        assert apply_literal(l1, s) == apply_literal(l2, s)
        # idempotent
        assert apply_literal(apply_literal(l1, s), s) == apply_literal(l1, s)
