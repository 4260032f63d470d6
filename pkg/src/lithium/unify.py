"""Most general unifiers, bipolar literals and constrained variables."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    ANY_SORT,
    PERMITTED,
    Clause,
    Literal,
    LithiumError,
    Var,
    apply_literal,
    apply_term,
    term_vars,
)


class NoUnifier(LithiumError):
    pass


def _walk(t, s: dict):
    while t.is_var:
        b = s.get(t)
        if b is None:
            return t
        t = b
    return t


def _occurs(v: Var, t, s: dict) -> bool:
    t = _walk(t, s)
    if t.is_var:
        return t == v
    if t.ground:
        return False
    return any(_occurs(v, a, s) for a in t.args)


def _sorts_ok(v: Var, t) -> bool:
    return v.sort == t.sort or v.sort == ANY_SORT or t.sort == ANY_SORT


def _unify(a, b, s: dict) -> bool:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = _walk(x, s)
        y = _walk(y, s)
        if x is y or x == y:
            continue
        if y.is_var and y.sort == ANY_SORT:
            x, y = y, x  # bind the wildcard, never leak it into the result
        if x.is_var:
            if not _sorts_ok(x, y) or _occurs(x, y, s):
                return False
            s[x] = y
        elif y.is_var:
            if not _sorts_ok(y, x) or _occurs(y, x, s):
                return False
            s[y] = x
        else:
            if x.fn != y.fn or len(x.args) != len(y.args):
                return False
            if x.ground and y.ground:
                return False  # equal ground terms were caught above
            stack.extend(zip(x.args, y.args))
    return True


def _resolve(s: dict) -> dict:
    """Turn a triangular substitution into an idempotent one."""
    out = {}
    for v in s:
        t = v
        # apply until fixpoint; terminates because of the occurs check
        while True:
            u = apply_term(t, s)
            if u == t:
                break
            t = u
        out[v] = t
    return out


def unify_terms(a, b, s: dict | None = None) -> dict | None:
    s = dict(s) if s else {}
    if not _unify(a, b, s):
        return None
    return _resolve(s)


def try_mgu(l1: Literal, l2: Literal) -> dict | None:
    """Unifier of the two atoms (signs ignored), or None."""
    if l1.pred != l2.pred or len(l1.args) != len(l2.args):
        return None
    if l1.ground and l2.ground:
        return {} if l1.args == l2.args else None
    s: dict = {}
    for a, b in zip(l1.args, l2.args):
        if not _unify(a, b, s):
            return None
    return _resolve(s)


def mgu(l1: Literal, l2: Literal) -> dict:
    """Most general unifier of the atoms of ``l1`` and ``l2``.

    Raises NoUnifier on a symbol, arity or sort clash or when the occurs
    check fails.
    """
    s = try_mgu(l1, l2)
    if s is None:
        raise NoUnifier(f"{l1!r} and {l2!r} do not unify")
    return s


def unifiable_apart(l1: Literal, l2: Literal) -> bool:
    """Whether the atoms unify after renaming the two literals apart."""
    if l1.pred != l2.pred or len(l1.args) != len(l2.args):
        return False
    if l1.ground and l2.ground:
        return l1.args == l2.args
    if not l1.ground and not l2.ground:
        ren = {v: Var(v.name + "#", v.sort) for v in l2.vars()}
        l2 = apply_literal(l2, ren)
    return try_mgu(l1, l2) is not None


# ---------------------------------------------------------------------------
# Bipolar literals
# ---------------------------------------------------------------------------


@dataclass
class BipolarReport:
    """Bipolar pairs over a list of clauses.

    Each unordered pair is listed once as ``(a, lit, b, lit2)`` with
    ``(a, key(lit)) <= (b, key(lit2))``.
    """

    pairs: list[tuple[int, Literal, int, Literal]] = field(default_factory=list)
    bipolar: dict[int, set[Literal]] = field(default_factory=dict)

    @property
    def per_clause_count(self) -> dict[int, int]:
        return {i: len(ls) for i, ls in self.bipolar.items()}

    def count(self, i: int) -> int:
        return len(self.bipolar.get(i, ()))

    def bipolar_in(self, i: int) -> set[Literal]:
        return self.bipolar.get(i, set())

    def is_bipolar(self, i: int, lit: Literal) -> bool:
        return lit in self.bipolar.get(i, ())

    def partners(self, i: int, lit: Literal) -> list[tuple[int, Literal]]:
        out = []
        for a, l, b, l2 in self.pairs:
            if (a, l) == (i, lit):
                out.append((b, l2))
            if (b, l2) == (i, lit):
                out.append((a, l))
        return out

    @property
    def empty(self) -> bool:
        return not self.pairs


def bipolar_report(clauses: Sequence[Clause], eq=None) -> BipolarReport:
    """Find every bipolar pair among the literal occurrences of ``clauses``.

    With ``eq`` (an EqClasses) terms are rewritten to class representatives
    before unifying, which gives bipolarity relative to those equations.
    """
    rep = BipolarReport()
    # (pred, positive) -> list of (clause index, original literal, rewritten)
    buckets: dict[tuple[str, bool], list[tuple[int, Literal, Literal]]] = {}
    for i, c in enumerate(clauses):
        for l in c.literals:
            r = eq.rewrite_literal(l) if eq is not None else l
            buckets.setdefault((l.pred, l.positive), []).append((i, l, r))
    for (pred, positive), pos in buckets.items():
        if not positive:
            continue
        neg = buckets.get((pred, False), ())
        if not neg:
            continue
        ground_neg: dict = {}
        open_neg = []
        for item in neg:
            if item[2].ground:
                ground_neg.setdefault(item[2].args, []).append(item)
            else:
                open_neg.append(item)
        for i, l, r in pos:
            if r.ground:
                cands = ground_neg.get(r.args, []) + [
                    x for x in open_neg if unifiable_apart(r, x[2])
                ]
            else:
                cands = [x for x in neg if unifiable_apart(r, x[2])]
            for j, l2, _ in cands:
                rep.bipolar.setdefault(i, set()).add(l)
                rep.bipolar.setdefault(j, set()).add(l2)
                a, b = (i, l), (j, l2)
                if (a[0], a[1].key) > (b[0], b[1].key):
                    a, b = b, a
                rep.pairs.append((a[0], a[1], b[0], b[1]))
    rep.pairs.sort(key=lambda p: (p[0], p[1].key, p[2], p[3].key))
    return rep


# ---------------------------------------------------------------------------
# Constrained variables
# ---------------------------------------------------------------------------


def constrained_vars(c: Clause, bipolar: set[Literal] | None = None) -> set[Var]:
    """Variables occurring inside an argument of a Permitted literal of ``c``.

    With ``bipolar`` given (the bipolar literals of ``c``), Permitted
    literals in that set do not constrain anything.
    """
    out: dict = {}
    for l in c.literals:
        if l.pred != PERMITTED:
            continue
        if bipolar is not None and l in bipolar:
            continue
        for a in l.args:
            term_vars(a, out)
    return set(out)


def unconstrained_count(c: Clause, bipolar: set[Literal] | None = None) -> int:
    return len(set(c.vars()) - constrained_vars(c, bipolar))
