import random

from hypothesis import given, settings
from hypothesis import strategies as st

from lithium.core import App, Literal
from lithium.index import LiteralIndex, SortedArrayMap, SplayTree


def test_splay_basic_operations():
    t = SplayTree()
    assert t.insert("b", 2) and t.insert("a", 1) and t.insert("c", 3)
    assert not t.insert("a", 9)
    assert t.find("a") == 1 and "c" in t and "z" not in t
    assert list(t.keys()) == ["a", "b", "c"]
    assert t.remove("b") and not t.remove("b")
    assert list(t.keys()) == ["a", "c"] and len(t) == 2


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["ins", "del"]), st.integers(0, 30)), max_size=60))
def test_splay_matches_sorted_map(ops):
    t, ref = SplayTree(), {}
    for op, k in ops:
        key = f"k{k:02d}"
        if op == "ins":
            assert t.insert(key, k) == (key not in ref)
            ref.setdefault(key, k)
        else:
            assert t.remove(key) == (key in ref)
            ref.pop(key, None)
    assert list(t.items()) == sorted(ref.items())
    m = SortedArrayMap.from_pairs(ref.items())
    assert list(m.items()) == list(t.items())


def lits(n, seed=0):
    rng = random.Random(seed)
    out = []
    for i in range(n):
        s = App(f"s{rng.randrange(n)}", (), "Subjects")
        out.append(Literal(rng.random() < 0.7, rng.choice("PQR"), (s,)))
    return out


def test_backends_agree():
    ls = lits(300)
    a, b = LiteralIndex(ls, "sorted"), LiteralIndex(ls, "splay")
    probe = lits(300, seed=1)
    assert [l in a for l in probe] == [l in b for l in probe]
    assert len(a) == len(b) == len(set(ls))
    assert list(a.map.keys()) == list(b.map.keys())


def test_candidates_narrow_by_argument():
    s0, s1 = App("s0", (), "Subjects"), App("s1", (), "Subjects")
    ls = [Literal(True, "P", (s0,)), Literal(True, "P", (s1,)), Literal(False, "P", (s0,))]
    idx = LiteralIndex(ls)
    assert idx.candidates(True, "P") == ls[:2]
    assert idx.candidates(True, "P", {0: s1}) == [ls[1]]
    assert idx.candidates(True, "Q") == []


def test_find_clash():
    s0 = App("s0", (), "Subjects")
    assert LiteralIndex([Literal(True, "P", (s0,))]).find_clash() is None
    assert LiteralIndex([Literal(False, "P", (s0,)), Literal(True, "P", (s0,))]).find_clash() == (
        Literal(True, "P", (s0,)),
        Literal(False, "P", (s0,)),
    )
    assert LiteralIndex([Literal(False, "=", (s0, s0))]).find_clash() == (Literal(False, "=", (s0, s0)),)
