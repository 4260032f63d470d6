"""Equality classes over the ground environment and the equation-free rewrite."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .core import (
    EQ,
    App,
    Clause,
    EnvRule,
    Literal,
    LithiumError,
    Policy,
    Query,
    subterms,
)


class NotEqualitySafe(LithiumError):
    def __init__(self, report: "SafeReport"):
        super().__init__("query is not equality-safe: " + "; ".join(report.violations))
        self.report = report


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True

    def groups(self) -> dict:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return out


def _closed_subterms(lits: Iterable[Literal]):
    seen: dict = {}
    for l in lits:
        for a in l.args:
            for t in subterms(a):
                if t.ground:
                    seen.setdefault(t, None)
    return seen


def _rep_choice(members) -> App:
    funcs = sorted((t for t in members if t.args), key=lambda t: t.key)
    if funcs:
        return funcs[0]
    return min(members, key=lambda t: t.fn)


class EqClasses:
    """Partition of the closed terms of E0 induced by its positive equations.

    Only reflexivity, symmetry and transitivity are applied.  Each class
    has a representative: its function-bearing member if there is one,
    otherwise the alphabetically least constant.
    """

    def __init__(self, e0: Iterable[Literal]):
        e0 = list(e0)
        uf = _UnionFind()
        for t in _closed_subterms(e0):
            uf.add(t)
        self.equations = [l for l in e0 if l.pred == EQ and l.positive]
        for l in self.equations:
            uf.union(l.args[0], l.args[1])
        self.classes: list[list[App]] = []
        self._class_of: dict = {}
        self._rep: dict = {}
        for members in uf.groups().values():
            members.sort(key=lambda t: t.key)
            idx = len(self.classes)
            self.classes.append(members)
            for t in members:
                self._class_of[t] = idx
        self.raw_rep = [_rep_choice(m) for m in self.classes]
        self.cyclic = False
        self._norm_rep: dict[int, App] = {}

    # -- queries ---------------------------------------------------------

    @property
    def trivial(self) -> bool:
        return not self.equations

    def terms(self) -> list[App]:
        return list(self._class_of)

    def class_of(self, t) -> list[App]:
        i = self._class_of.get(t)
        return [t] if i is None else self.classes[i]

    def same(self, a, b) -> bool:
        if a == b:
            return True
        i = self._class_of.get(a)
        return i is not None and i == self._class_of.get(b)

    def nontrivial_classes(self) -> list[list[App]]:
        return [m for m in self.classes if len(m) > 1]

    def representative(self, t):
        """Class representative of ``t``, normalised in its own arguments."""
        i = self._class_of.get(t)
        if i is None or len(self.classes[i]) == 1:
            return t
        return self._normal_rep(i, ())

    def _normal_rep(self, i: int, stack: tuple):
        got = self._norm_rep.get(i)
        if got is not None:
            return got
        r = self.raw_rep[i]
        if i in stack:
            self.cyclic = True
            return r
        if r.args:
            r = App(r.fn, tuple(self._rewrite(a, stack + (i,)) for a in r.args), r.sort)
        self._norm_rep[i] = r
        return r

    # -- rewriting -------------------------------------------------------

    def _rewrite(self, t, stack: tuple = ()):
        if t.is_var:
            return t
        if t.ground:
            i = self._class_of.get(t)
            if i is not None and len(self.classes[i]) > 1:
                return self._normal_rep(i, stack)
        if not t.args:
            return t
        new = App(t.fn, tuple(self._rewrite(a, stack) for a in t.args), t.sort)
        if new != t and new.ground:
            i = self._class_of.get(new)
            if i is not None and len(self.classes[i]) > 1:
                return self._normal_rep(i, stack)
        return new

    def rewrite_term(self, t):
        """Replace maximal closed terms that have an equality class by its representative."""
        if self.trivial:
            return t
        return self._rewrite(t)

    def rewrite_literal(self, l: Literal) -> Literal:
        if self.trivial:
            return l
        args = tuple(self._rewrite(a) for a in l.args)
        if args == l.args:
            return l
        return Literal(l.positive, l.pred, args)

    def rewrite_clause(self, c: Clause) -> Clause:
        if self.trivial:
            return c
        return Clause(self.rewrite_literal(l) for l in c.literals)


def build_eq_classes(e0: Iterable[Literal]) -> EqClasses:
    return EqClasses(e0)


# ---------------------------------------------------------------------------
# Equality safety
# ---------------------------------------------------------------------------


@dataclass
class SafeReport:
    safe: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.safe


def _query_literals(q: Query) -> list[Literal]:
    lits = list(q.base.e0)
    for r in q.base.e1:
        lits.extend(r.clause.literals)
    for p in q.base.policies:
        lits.extend(p.clause.literals)
    lits.append(q.goal)
    return lits


def _congruence_classes(terms: list, equations: list[Literal]) -> _UnionFind:
    """Congruence closure of ``equations`` over ``terms`` (a subterm-closed list)."""
    uf = _UnionFind()
    for t in terms:
        uf.add(t)
    for l in equations:
        uf.union(l.args[0], l.args[1])
    apps = [t for t in terms if t.args]
    changed = True
    while changed:
        changed = False
        table: dict = {}
        for t in apps:
            sig = (t.fn, tuple(uf.find(a) for a in t.args))
            other = table.get(sig)
            if other is None:
                table[sig] = t
            elif uf.union(other, t):
                changed = True
    return uf


def equality_safe(q: Query) -> SafeReport:
    """Check the equality restrictions of the Lithium fragment.

    (a) no clause of E1 and P has a positive equality literal;
    (b) no equality class holds two function-bearing terms;
    (c) no class holds a term together with one of its proper subterms.

    Classes for (b) and (c) are computed by congruence closure over every
    closed term of the query, so equations implied through function
    arguments are caught as well.  A representative that would need to be
    rewritten inside itself is also reported.
    """
    violations: list[str] = []
    for label, c in q.base.universal_clauses():
        for l in c.literals:
            if l.pred == EQ and l.positive:
                violations.append(f"clause {label} has the positive equation {l!r}")
    equations = [l for l in q.base.e0 if l.pred == EQ and l.positive]
    if equations:
        terms = list(_closed_subterms(_query_literals(q)))
        uf = _congruence_classes(terms, equations)
        groups = [sorted(m, key=lambda t: t.key) for m in uf.groups().values() if len(m) > 1]
        groups.sort(key=lambda m: m[0].key)
        for members in groups:
            funcs = [t for t in members if t.args]
            text = "{" + ", ".join(map(repr, members)) + "}"
            if len(funcs) > 1:
                violations.append(f"class {text} equates function terms {funcs[0]!r} and {funcs[1]!r}")
            mset = set(members)
            for t in funcs:
                inner = [s for a in t.args for s in subterms(a) if s in mset]
                if inner:
                    violations.append(f"class {text} equates {t!r} with its subterm {inner[0]!r}")
                    break
        if not violations:
            eq = EqClasses(q.base.e0)
            for i, m in enumerate(eq.classes):
                if len(m) > 1:
                    eq._normal_rep(i, ())
            if eq.cyclic:
                violations.append("equations define a term through itself across classes")
    return SafeReport(not violations, violations)


# ---------------------------------------------------------------------------
# Equation-free transformation
# ---------------------------------------------------------------------------


def _dedupe(lits: Iterable[Literal]) -> tuple[Literal, ...]:
    return tuple(dict.fromkeys(lits))


def to_equation_free(q: Query, check: bool = True) -> Query:
    """Drop the positive ground equations and rewrite terms to representatives."""
    if check:
        rep = equality_safe(q)
        if not rep.safe:
            raise NotEqualitySafe(rep)
    eq = EqClasses(q.base.e0)
    if eq.trivial:
        return q
    base = q.base
    e0 = _dedupe(eq.rewrite_literal(l) for l in base.e0 if not (l.pred == EQ and l.positive))
    e1 = tuple(EnvRule(r.label, eq.rewrite_clause(r.clause)) for r in base.e1)
    policies = tuple(
        Policy(
            p.label,
            _dedupe(eq.rewrite_literal(l) for l in p.antecedent),
            p.sign,
            tuple(eq.rewrite_term(a) for a in p.args),
        )
        for p in base.policies
    )
    new_base = base.replace(e0=e0, e1=e1, policies=policies)
    return Query(new_base, q.sign, tuple(eq.rewrite_term(a) for a in q.args), q.name)
