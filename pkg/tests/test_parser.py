import pathlib

import pytest
from conftest import SAMPLES

from lithium.core import App, LithiumError, Clause, Literal, Var, is_variant
from lithium.parser import (
    LithSortError,
    LithSyntaxError,
    ShapeError,
    parse_base,
    parse_query,
    render,
    tokenize,
)

HEADER = "pred Q(Subjects), R(Subjects, Actions);\nconst a, b : Subjects;\nconst r : Actions;\n"


def same_base(b1, q1, b2, q2):
    assert list(b1.e0) == list(b2.e0)
    assert [r.label for r in b1.e1] == [r.label for r in b2.e1]
    assert all(is_variant(r1.clause, r2.clause) for r1, r2 in zip(b1.e1, b2.e1))
    assert [(p.label, p.sign) for p in b1.policies] == [(p.label, p.sign) for p in b2.policies]
    assert all(is_variant(p1.clause, p2.clause) for p1, p2 in zip(b1.policies, b2.policies))
    assert [(q.name, q.sign, q.args) for q in q1] == [(q.name, q.sign, q.args) for q in q2]


@pytest.mark.parametrize("path", sorted(SAMPLES.glob("*.lith")), ids=lambda p: p.stem)
def test_round_trip(path: pathlib.Path):
    b1, q1 = parse_base(path.read_text())
    text = render(b1, q1)
    b2, q2 = parse_base(text)
    same_base(b1, q1, b2, q2)
    assert render(b2, q2) == text


def test_statements_and_comments():
    b, qs = parse_base(
        HEADER
        + "# a comment\n"
        + "env Q(a);  # trailing comment\n"
        + "env fact !Q(b);\n"
        + "env a != b;\n"
        + "env rule1: forall x. Q(x) => R(x, r);\n"
        + "env true => Q(a);\n"
        + "policy p1: forall x. Q(x) & !R(x, r) => permit(x, r);\n"
        + "policy p2: deny(b, r);\n"
        + "query q1: permit(a, r);\n"
    )
    a, bb, r = App("a", (), "Subjects"), App("b", (), "Subjects"), App("r", (), "Actions")
    assert b.e0 == (Literal(True, "Q", (a,)), Literal(False, "Q", (bb,)), Literal(False, "=", (a, bb)))
    assert [e.label for e in b.e1] == ["rule1", "e2"]
    x = Var("x", "Subjects")
    assert b.e1[0].clause == Clause([Literal(False, "Q", (x,)), Literal(True, "R", (x, r))])
    assert b.e1[1].clause == Clause([Literal(True, "Q", (a,))])
    assert b.policies[0].antecedent == (Literal(True, "Q", (x,)), Literal(False, "R", (x, r)))
    assert b.policies[1].antecedent == () and b.policies[1].sign == "deny"
    assert [q.name for q in qs] == ["q1"]


def test_sort_inference_through_functions():
    b, _ = parse_base(
        "sort Ages;\nconst n : Ages;\nfunc age(Subjects) : Ages;\npred G(Ages, Ages);\n"
        "const s : Actions;\npolicy p: forall x. G(age(x), n) => permit(x, s);\n"
    )
    assert b.policies[0].subject == Var("x", "Subjects")


def test_zero_ary_func_is_a_constant():
    b, _ = parse_base("func k() : Subjects;\npred Q(Subjects);\nenv Q(k);\n")
    assert b.e0[0].args[0] == App("k", (), "Subjects")
    assert b.signature.get("k").kind == "constant"


def test_permitted_configuration():
    b, qs = parse_base(
        "const t : Times; const a : Subjects; const r : Actions;\n"
        "pred Permitted(Subjects, Actions, Times);\nquery q: permit(a, r, t);\n"
    )
    assert qs[0].goal.args == (App("a", (), "Subjects"), App("r", (), "Actions"), App("t", (), "Times"))


def test_parse_query_picks_by_name():
    text = HEADER + "query one: permit(a, r);\nquery two: deny(b, r);\n"
    assert parse_query(text).name == "one"
    assert parse_query(text, "two").sign == "deny"
    with pytest.raises(LithiumError):
        parse_query(text, "three")


def test_tokenizer_positions():
    toks = tokenize("env\n  Q(a) => !R;")
    assert [(t.text, t.line, t.col) for t in toks[:3]] == [("env", 1, 1), ("Q", 2, 3), ("(", 2, 4)]
    assert toks[-1].kind == "eof"


@pytest.mark.parametrize(
    "text,err,line,col,fragment",
    [
        ("pred Q(Subjects)\nconst a : Subjects;\n", LithSyntaxError, 2, 1, "expected ';'"),
        ("pred Q(Subjects); $\n", LithSyntaxError, 1, 19, "unexpected character"),
        ("const a : Subjects;\nenv Student(a);\n", LithSortError, 2, 5, "undeclared predicate"),
        (HEADER + "env Q(r);\n", LithSortError, 4, 7, "has sort Actions, expected Subjects"),
        ("const a : Subjects;\nconst a : Subjects;\n", LithSortError, 2, 7, "already declared"),
        ("const r : Actions;\nquery q: permit(x, r);\n", LithSortError, 2, 17, "undeclared symbol"),
        (HEADER + "query q: permit(a, r);\nquery q: deny(a, r);\n", LithSortError, 5, 7, "duplicate query"),
        (HEADER + "env Q(a) | Q(b);\n", ShapeError, 4, 10, "disjunction"),
        (HEADER + "env exists x. Q(x);\n", ShapeError, 4, 5, "existential"),
        (HEADER + "env Permitted(a, r);\n", ShapeError, 4, 5, "must not mention Permitted"),
        (HEADER + "env !a = b;\n", ShapeError, 4, 5, "!="),
        (HEADER + "policy p: forall x. Q(x) => Permitted(x, r);\n", ShapeError, 4, 29, "permit(...)"),
        (HEADER + "env Q(a) & Q(b);\n", ShapeError, 4, 1, "single literal"),
        (HEADER + "policy p: forall x. Q(x) => permit(x, r);\npolicy p: permit(a, r);\n",
         LithSortError, 5, 8, "duplicate label"),
        (HEADER + "policy p: forall x. R(x, x) => permit(x, r);\n", LithSortError, 4, 26, "sort"),
    ],
)
def test_errors_carry_positions(text, err, line, col, fragment):
    with pytest.raises(err) as info:
        parse_base(text)
    e = info.value
    assert (e.line, e.col) == (line, col)
    assert fragment in e.message


def test_uninferable_variable_sort():
    with pytest.raises(LithSortError, match="annotate"):
        parse_base(HEADER + "env forall x, z. Q(x) & z = z => Q(a);\n")
    # an annotation fixes it
    parse_base(HEADER + "env forall x, z: Actions. Q(x) & z = z => Q(a);\n")


def test_render_empty_policy_antecedent():
    b, qs = parse_base(HEADER + "policy p: permit(a, r);\n")
    assert "policy p: permit(a, r);" in render(b, qs)


def test_empty_document_round_trip():
    b, qs = parse_base("")
    assert render(b, qs) == "" and qs == []


def test_parsing_is_deterministic():
    text = (SAMPLES / "faculty.lith").read_text()
    assert render(*parse_base(text)) == render(*parse_base(text))


@pytest.mark.parametrize("seed", range(10))
def test_round_trip_generated(seed):
    import random

    from generators import Options, query_text

    rng = random.Random(seed)
    for _ in range(30):
        text = query_text(rng, Options(functions=rng.random() < 0.5))
        b1, q1 = parse_base(text)
        b2, q2 = parse_base(render(b1, q1))
        same_base(b1, q1, b2, q2)
