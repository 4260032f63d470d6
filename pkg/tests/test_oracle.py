import itertools

import pytest
from conftest import query

from lithium.core import App, Clause, Literal, Status, Var
from lithium.oracle import (
    FunctionSymbolsPresent,
    OracleRefused,
    dpll,
    equality_axioms,
    evaluate,
    finite_countermodel,
    finite_model_satisfiable,
    finite_model_valid,
    ground_saturation_valid,
)
from lithium.parser import parse_query
from lithium.resolution import saturate

x = Var("x", "Subjects")
a, b = App("a", (), "Subjects"), App("b", (), "Subjects")


def L(pred, *args, positive=True):
    return Literal(positive, pred, args)


def brute_sat(cnf, n):
    return any(
        all(any((v > 0) == bits[abs(v) - 1] for v in cl) for cl in cnf)
        for bits in itertools.product((False, True), repeat=n)
    )


@pytest.mark.parametrize(
    "cnf,n",
    [
        ([[1, 2], [-1], [-2]], 2),
        ([[1, -2], [2, 3], [-3, -1]], 3),
        ([[1], [-1, 2], [-2, 3], [-3]], 3),
        ([], 2),
        ([[1, 2, 3], [-1, -2], [-2, -3], [-1, -3]], 3),
    ],
)
def test_dpll_against_truth_tables(cnf, n):
    got = dpll(cnf, n)
    assert (got is not None) == brute_sat(cnf, n)
    if got is not None:
        assert all(any(got[abs(v)] == (v > 0) for v in cl) for cl in cnf)


def test_satisfiable_and_unsatisfiable_sets():
    assert finite_model_satisfiable([Clause([L("Q", a)]), Clause([L("Q", x, positive=False), L("R", x)])])
    assert finite_model_satisfiable([Clause([L("Q", a)]), Clause([L("Q", x, positive=False)])]) is None


def test_distinct_constants_may_coincide():
    # a != b is not assumed: Q(a), !Q(b) is satisfiable, but a = b on top is not
    cs = [Clause([L("Q", a)]), Clause([L("Q", b, positive=False)])]
    assert finite_model_satisfiable(cs) is not None
    assert finite_model_satisfiable(cs + [Clause([L("=", a, b)])]) is None


def test_countermodel_falsifies_query():
    q = query("cry")
    sub = q.with_base(q.base.replace(policies=q.base.policies[:1]))
    v = finite_model_valid(sub)
    assert v.status is Status.INVALID
    assert not evaluate(v.countermodel, sub)
    assert "Happy" in v.countermodel.table()


def test_valid_query_has_no_countermodel():
    v = finite_model_valid(query("dance"))
    assert v.status is Status.VALID and v.countermodel is None and v.models_checked > 0


def test_oracle_refuses_functions_and_big_signatures():
    with pytest.raises(FunctionSymbolsPresent):
        finite_model_valid(query("wife"))
    with pytest.raises(OracleRefused):
        finite_model_valid(query("dance"), max_predicates=0)


def test_function_countermodel():
    q = parse_query(
        "const a : Subjects; const r : Actions; func f(Subjects) : Subjects;\npred Q(Subjects);\n"
        "env Q(a);\npolicy p: forall x. Q(f(x)) => permit(x, r);\nquery q: permit(a, r);\n"
    )
    m = finite_countermodel(q)
    assert m is not None and not evaluate(m, q)
    assert "f:" in m.table()


def test_equality_axioms_make_resolution_complete():
    # Q(a), a = b, !Q(b) needs the congruence axiom for Q
    cs = [Clause([L("Q", a)]), Clause([L("=", a, b)]), Clause([L("Q", b, positive=False)])]
    ax = equality_axioms(cs)
    assert any(len(c) == 3 and any(l.pred == "Q" for l in c) for c in ax)
    assert saturate(cs + ax, 10_000).empty is not None


def test_ground_saturation():
    assert ground_saturation_valid(query("wife")) is Status.VALID
    assert ground_saturation_valid(query("boss"), fuel=0) is Status.UNKNOWN
