import random

import pytest
from conftest import load, query

from generators import Options, random_query
from lithium.core import Clause, Literal, Status
from lithium.derivation import replay
from lithium.engine import (
    NotADefinition,
    answer,
    check_consistency,
    check_separation,
    input_clauses,
    membership,
    unfold_definitions,
)
from lithium.equality import to_equation_free
from lithium.oracle import finite_model_valid
from lithium.parser import parse_base, render

# (sample, query, status, path, status with fallback)
EXPECTED = [
    ("librarian", "alice", Status.VALID, "separated", Status.VALID),
    ("librarian", "bob", Status.VALID, "separated", Status.VALID),
    ("dance", "dance", Status.VALID, "full", Status.VALID),
    ("cry", "cry", Status.VALID, "full", Status.VALID),
    ("play", "play", Status.VALID, "fast", Status.VALID),
    ("faculty", "nap", Status.VALID, "separated", Status.VALID),
    ("faculty", "chair", Status.VALID, "separated", Status.VALID),
    ("copy", "read", Status.VALID, "full", Status.VALID),
    ("boss", "boss", Status.NOT_IN_LITHIUM, "none", Status.VALID),
    ("wife", "bob", Status.NOT_IN_LITHIUM, "none", Status.VALID),
    ("videostore", "helpdesk", Status.NOT_IN_LITHIUM, "none", Status.VALID),
    ("smoking", "smoke", Status.VALID, "separated", Status.VALID),
]


@pytest.mark.parametrize("name,qname,status,path,fb", EXPECTED, ids=[f"{n}-{q}" for n, q, *_ in EXPECTED])
def test_sample_verdicts(name, qname, status, path, fb):
    q = query(name, qname)
    v = answer(q)
    assert (v.status, v.path) == (status, path)
    vf = answer(q, fallback=True)
    assert vf.status is fb
    for verdict in (v, vf):
        if verdict.valid:
            assert replay(verdict.witness, verdict.inputs).ok


def test_verdicts_match_oracle_on_function_free_samples():
    for name, qname, *_ in EXPECTED:
        q = query(name, qname)
        if name in ("copy", "wife", "smoking"):
            continue  # function symbols
        assert finite_model_valid(q, max_predicates=12).status is Status.VALID


def test_each_happy_policy_alone_is_invalid():
    q = query("cry")
    for p in q.base.policies:
        sub = q.with_base(q.base.replace(policies=(p,)))
        assert answer(sub).status is Status.INVALID
        assert finite_model_valid(sub).status is Status.INVALID


def test_membership_names_offending_literals():
    m = membership(query("boss"))
    assert not m.in_lithium
    assert {k: sorted(repr(l) for l in v) for k, v in m.flagged().items()} == {
        "p2": ["!Permitted(x1, play)", "Permitted(x2, play)"]
    }
    assert any("p2 has 2 bipolar literals" in s for s in m.violations)


def test_membership_relative_k():
    m = membership(query("copy"))
    assert m.in_lithium and m.suggested_path == "full"
    assert m.per_clause_k == {"p1": 2, "p2": 1}


def test_membership_invariant_under_transform():
    rng = random.Random(11)
    n = 0
    while n < 60:
        _, q = random_query(rng, Options(eq_rate=0.5))
        if not any(l.pred == "=" for l in q.base.e0):
            continue
        m = membership(q)
        if not m.equality_safe.safe:
            continue
        n += 1
        assert membership(to_equation_free(q)).in_lithium == m.in_lithium


def test_fallback_out_of_fuel_is_unknown():
    v = answer(query("boss"), fallback=True, fuel=0)
    assert v.status is Status.UNKNOWN and v.witness is None


def test_deny_goal():
    q = query("faculty", "chair")
    assert q.sign == "deny" and answer(q).valid


def test_witness_inputs_come_from_query():
    q = query("copy")
    v = answer(q)
    assert replay(v.witness, input_clauses(to_equation_free(q))).ok


# -- separation ---------------------------------------------------------------


def test_separation_missing_resolvent():
    b, _ = load("faculty")
    b = b.replace(e1=())
    s = check_separation(b)
    assert not s.satisfied
    assert [(e.p_label, e.d_label, repr(e.clause)) for e in s.missing] == [
        ("p1", "p2", "!Faculty(x) | !Student(x)")
    ]


def test_separation_satisfied_by_environment():
    b, _ = load("faculty")
    s = check_separation(b)
    assert s.satisfied
    assert [(e.p_label, e.d_label, e.status, e.by) for e in s.resolvents] == [("p1", "p2", "impliedByE", "e")]


def test_separation_flags_impure_policies():
    b, _ = load("dance")
    s = check_separation(b)
    assert not s.satisfied and s.impure_policies == ["p2"]


def test_separation_modulo_equalities():
    b, _ = parse_base(
        "const a, a2 : Actions;\npred Q(Subjects);\nenv a = a2;\n"
        "policy p: forall x. Q(x) => permit(x, a);\npolicy d: forall x. deny(x, a2);\n"
    )
    assert [repr(e.clause) for e in check_separation(b).missing] == ["!Q(x)"]


# -- consistency ----------------------------------------------------------------


def test_sample_bases_are_consistent():
    for name in ("librarian", "faculty", "smoking", "videostore"):
        b, _ = load(name)
        assert check_consistency(b).status is Status.CONSISTENT


def test_inconsistent_base_with_witnesses():
    b, _ = parse_base("const r : Actions;\npolicy p: forall x. permit(x, r);\npolicy d: forall x. deny(x, r);\n")
    c = check_consistency(b)
    assert c.status is Status.INCONSISTENT
    assert len(c.witnesses) == 2 and all(replay(w).ok for w in c.witnesses)


def test_unsatisfiable_environment():
    b, _ = parse_base("pred Q(Subjects);\nconst a : Subjects;\nenv Q(a);\nenv e: forall x. Q(x) => !Q(x);\n")
    assert check_consistency(b).status is Status.INCONSISTENT


# -- unfolding ----------------------------------------------------------------


def test_unfold_videostore():
    b, qs = load("videostore")
    u = unfold_definitions(b, ["Adult", "Member"])
    assert [p.label for p in u.policies] == [f"p1_{i}" for i in range(1, 7)]
    assert u.e1 == ()
    text = render(u)
    assert "policy p1_4: forall x: Subjects . InAK(x) & Over18(x) & RegMember(x) => permit(x, queryHelpdesk);" in text
    q = qs[0].with_base(u)
    assert membership(q).in_lithium and answer(q).valid


def test_unfold_with_pruning_keeps_applicable_definitions():
    b, qs = load("videostore")
    u = unfold_definitions(b, ["Adult", "Member"], prune=True)
    assert len(u.policies) == 1
    assert [repr(l) for l in u.policies[0].antecedent] == ["InAK(x)", "Over18(x)", "RegMember(x)"]
    assert answer(qs[0].with_base(u)).valid


def test_unfold_rejects_ground_predicates():
    b, _ = load("videostore")
    with pytest.raises(NotADefinition):
        unfold_definitions(b, ["Over18"])


def test_unfold_preserves_validity():
    b, qs = load("videostore")
    for prune in (False, True):
        u = unfold_definitions(b, ["Adult", "Member"], prune=prune)
        assert finite_model_valid(qs[0].with_base(u), max_predicates=12).status is Status.VALID


def test_goal_clause_shape():
    q = query("play")
    assert input_clauses(q)[-2] == Clause([Literal(False, "Permitted", q.args)])
