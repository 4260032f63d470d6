"""Sorted first-order terms, literals, clauses and policy bases.

Everything here is immutable once built.  Terms and literals cache their
hash and ordering key, so they are cheap to put in sets and to sort.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping

SUBJECTS = "Subjects"
ACTIONS = "Actions"
TIMES = "Times"
BUILTIN_SORTS = (SUBJECTS, ACTIONS, TIMES)

PERMITTED = "Permitted"
EQ = "="
NOW = "now"

# Sort of the variable in the reflexivity clause; unifies with any sort.
ANY_SORT = "*"


class Status(str, Enum):
    """Every verdict the engine, the oracles and the CLI can report."""

    VALID = "Valid"
    INVALID = "Invalid"
    NOT_IN_LITHIUM = "NotInLithium"
    UNKNOWN = "Unknown"
    CONSISTENT = "Consistent"
    INCONSISTENT = "Inconsistent"

    def __str__(self) -> str:
        return self.value


class LithiumError(Exception):
    """Base class for every error raised by this package."""


class SortError(LithiumError):
    pass


# ---------------------------------------------------------------------------
# Signature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str  # "constant" | "function" | "predicate"
    arg_sorts: tuple[str, ...] = ()
    result_sort: str | None = None

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


class Signature:
    """Symbol table for one policy base.

    Built by a single writer (the parser) and then frozen.
    """

    def __init__(self, permitted_sorts: tuple[str, ...] = (SUBJECTS, ACTIONS)):
        self.sorts: list[str] = list(BUILTIN_SORTS)
        self.symbols: dict[str, Symbol] = {}
        self.frozen = False
        self.symbols[PERMITTED] = Symbol(PERMITTED, "predicate", tuple(permitted_sorts))
        self.symbols[NOW] = Symbol(NOW, "constant", (), TIMES)

    def _check_open(self) -> None:
        if self.frozen:
            raise LithiumError("signature is frozen")

    def add_sort(self, name: str) -> None:
        self._check_open()
        if name in self.sorts:
            raise SortError(f"sort {name!r} already declared")
        self.sorts.append(name)

    def declare(self, sym: Symbol) -> Symbol:
        self._check_open()
        for s in sym.arg_sorts + ((sym.result_sort,) if sym.result_sort else ()):
            if s not in self.sorts:
                raise SortError(f"unknown sort {s!r} in declaration of {sym.name!r}")
        if sym.name in self.symbols:
            raise SortError(f"symbol {sym.name!r} already declared")
        self.symbols[sym.name] = sym
        return sym

    def set_permitted(self, arg_sorts: tuple[str, ...]) -> None:
        self._check_open()
        for s in arg_sorts:
            if s not in self.sorts:
                raise SortError(f"unknown sort {s!r} for {PERMITTED}")
        self.symbols[PERMITTED] = Symbol(PERMITTED, "predicate", tuple(arg_sorts))

    def freeze(self) -> "Signature":
        self.frozen = True
        return self

    def copy(self) -> "Signature":
        other = Signature()
        other.sorts = list(self.sorts)
        other.symbols = dict(self.symbols)
        return other

    @property
    def permitted(self) -> Symbol:
        return self.symbols[PERMITTED]

    def get(self, name: str) -> Symbol | None:
        return self.symbols.get(name)

    def constants(self, sort: str | None = None) -> list[Symbol]:
        return [
            s for s in self.symbols.values()
            if s.kind == "constant" and (sort is None or s.result_sort == sort)
        ]

    def constant(self, name: str) -> "App":
        sym = self.symbols[name]
        if sym.kind != "constant":
            raise SortError(f"{name!r} is not a constant")
        return App(name, (), sym.result_sort)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Signature):
            return NotImplemented
        return self.sorts == other.sorts and self.symbols == other.symbols

    __hash__ = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


class Var:
    __slots__ = ("name", "sort", "_hash")
    is_var = True
    ground = False

    def __init__(self, name: str, sort: str):
        self.name = name
        self.sort = sort
        self._hash = hash(("V", name, sort))

    def __eq__(self, other: object) -> bool:
        return (
            other.__class__ is Var
            and self.name == other.name  # type: ignore[attr-defined]
            and self.sort == other.sort  # type: ignore[attr-defined]
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return self.name

    @property
    def key(self) -> tuple:
        return (0, self.name, self.sort)

    @property
    def masked_key(self) -> tuple:
        return (0,)

    @property
    def size(self) -> int:
        return 1


class App:
    """Function application; a constant is an application with no arguments."""

    __slots__ = ("fn", "args", "sort", "ground", "_hash", "_key", "_mkey", "_text", "size")
    is_var = False

    def __init__(self, fn: str, args: tuple = (), sort: str = ""):
        self.fn = fn
        self.args = args
        self.sort = sort
        self.ground = all(a.ground for a in args)
        self._hash = hash((fn, args))
        self._key = None
        self._mkey = None
        self._text = None
        self.size = 1 + sum(a.size for a in args)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (
            other.__class__ is App
            and self._hash == other._hash  # type: ignore[attr-defined]
            and self.fn == other.fn  # type: ignore[attr-defined]
            and self.args == other.args  # type: ignore[attr-defined]
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if self._text is None:
            if self.args:
                self._text = f"{self.fn}({', '.join(map(repr, self.args))})"
            else:
                self._text = self.fn
        return self._text

    @property
    def is_constant(self) -> bool:
        return not self.args

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = (1, self.fn, tuple(a.key for a in self.args))
        return self._key

    @property
    def masked_key(self) -> tuple:
        if self._mkey is None:
            self._mkey = (1, self.fn, tuple(a.masked_key for a in self.args))
        return self._mkey


Term = Var | App


def const(name: str, sort: str) -> App:
    return App(name, (), sort)


def term_vars(t: Term, out: dict | None = None) -> dict:
    """Variables of ``t`` in first-occurrence order (dict used as ordered set)."""
    if out is None:
        out = {}
    if t.is_var:
        out.setdefault(t, None)
    elif not t.ground:
        for a in t.args:
            term_vars(a, out)
    return out


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if not t.is_var:
        for a in t.args:
            yield from subterms(a)


def mentions_function(t: Term) -> bool:
    return not t.is_var and bool(t.args)


def occurs(v: Var, t: Term) -> bool:
    if t.is_var:
        return t == v
    if t.ground:
        return False
    return any(occurs(v, a) for a in t.args)


# ---------------------------------------------------------------------------
# Literals and clauses
# ---------------------------------------------------------------------------


class Literal:
    __slots__ = ("positive", "pred", "args", "ground", "_hash", "_key", "_mkey", "_text")

    def __init__(self, positive: bool, pred: str, args: tuple = ()):
        self.positive = positive
        self.pred = pred
        self.args = args
        self.ground = all(a.ground for a in args)
        self._hash = hash((positive, pred, args))
        self._key = None
        self._mkey = None
        self._text = None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (
            other.__class__ is Literal
            and self._hash == other._hash  # type: ignore[attr-defined]
            and self.positive == other.positive  # type: ignore[attr-defined]
            and self.pred == other.pred  # type: ignore[attr-defined]
            and self.args == other.args  # type: ignore[attr-defined]
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if self._text is None:
            if self.pred == EQ:
                op = "=" if self.positive else "!="
                self._text = f"{self.args[0]!r} {op} {self.args[1]!r}"
            else:
                atom = self.pred
                if self.args:
                    atom += f"({', '.join(map(repr, self.args))})"
                self._text = atom if self.positive else "!" + atom
        return self._text

    def negate(self) -> "Literal":
        return Literal(not self.positive, self.pred, self.args)

    @property
    def is_equality(self) -> bool:
        return self.pred == EQ

    @property
    def mentions_permitted(self) -> bool:
        return self.pred == PERMITTED

    @property
    def atom_text(self) -> str:
        """Canonical text of the atom, without the sign."""
        text = repr(self)
        if self.pred == EQ:
            return text.replace(" != ", " = ") if not self.positive else text
        return text if self.positive else text[1:]

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = (self.pred, not self.positive, tuple(a.key for a in self.args))
        return self._key

    @property
    def masked_key(self) -> tuple:
        if self._mkey is None:
            self._mkey = (self.pred, not self.positive, tuple(a.masked_key for a in self.args))
        return self._mkey

    def vars(self) -> dict:
        out: dict = {}
        if not self.ground:
            for a in self.args:
                term_vars(a, out)
        return out

    @property
    def size(self) -> int:
        return 1 + sum(a.size for a in self.args) + (0 if self.positive else 1)


def complement(lit: Literal) -> Literal:
    return lit.negate()


class Clause:
    """A universally closed disjunction, stored as a sorted duplicate-free tuple."""

    __slots__ = ("literals", "_hash")

    def __init__(self, literals: Iterable[Literal] = ()):
        lits = set(literals)
        self.literals: tuple[Literal, ...] = tuple(sorted(lits, key=lambda l: l.key))
        self._hash = hash(self.literals)

    def __eq__(self, other: object) -> bool:
        return other.__class__ is Clause and self.literals == other.literals  # type: ignore[attr-defined]

    def __hash__(self) -> int:
        return self._hash

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __contains__(self, lit: object) -> bool:
        return lit in self.literals

    def __repr__(self) -> str:
        if not self.literals:
            return "false"
        return " | ".join(map(repr, self.literals))

    @property
    def is_empty(self) -> bool:
        return not self.literals

    @property
    def ground(self) -> bool:
        return all(l.ground for l in self.literals)

    def vars(self) -> dict:
        out: dict = {}
        for l in self.literals:
            if not l.ground:
                for a in l.args:
                    term_vars(a, out)
        return out

    @property
    def size(self) -> int:
        """Length in symbols: predicates, negation signs and term symbols."""
        return sum(l.size for l in self.literals)

    def permitted_part(self) -> tuple[Literal, ...]:
        return tuple(l for l in self.literals if l.pred == PERMITTED)

    def env_part(self) -> tuple[Literal, ...]:
        return tuple(l for l in self.literals if l.pred != PERMITTED)

    def is_tautology(self) -> bool:
        lits = set(self.literals)
        for l in self.literals:
            if l.positive and l.negate() in lits:
                return True
            if l.pred == EQ and l.positive and l.args[0] == l.args[1]:
                return True
        return False


EMPTY_CLAUSE = Clause()


# ---------------------------------------------------------------------------
# Substitutions
# ---------------------------------------------------------------------------

Substitution = dict  # Var -> Term


def apply_term(t: Term, s: Mapping) -> Term:
    if t.is_var:
        return s.get(t, t)
    if t.ground:
        return t
    return App(t.fn, tuple(apply_term(a, s) for a in t.args), t.sort)


def apply_literal(lit: Literal, s: Mapping) -> Literal:
    if lit.ground or not s:
        return lit
    return Literal(lit.positive, lit.pred, tuple(apply_term(a, s) for a in lit.args))


def apply_substitution(c: Clause, s: Mapping) -> Clause:
    """Apply ``s`` to every literal; literals that become equal merge."""
    if not s:
        return c
    return Clause(apply_literal(l, s) for l in c.literals)


def compose(s: Mapping, t: Mapping) -> dict:
    """Return the substitution equivalent to applying ``s`` then ``t``."""
    out = {v: apply_term(u, t) for v, u in s.items()}
    for v, u in t.items():
        if v not in out:
            out[v] = u
    return {v: u for v, u in out.items() if u != v}


def rename_clause(c: Clause, suffix: str) -> tuple[Clause, dict]:
    ren = {v: Var(v.name + suffix, v.sort) for v in c.vars()}
    return apply_substitution(c, ren), ren


def standardize_apart(c1: Clause, c2: Clause) -> tuple[Clause, Clause]:
    """Variable-renamed copies of ``c1`` and ``c2`` sharing no variables."""
    return rename_clause(c1, "1")[0], rename_clause(c2, "2")[0]


_TRAILING_DIGITS = re.compile(r"\d+$")


def tidy_variables(c: Clause) -> Clause:
    """Rename variables to short readable names, deterministically.

    Variables are taken in order of first occurrence (literal order with
    variable names masked) and named after their base name with trailing
    digits stripped; bases shared by several variables get an index.
    """
    vs = c.vars()
    if not vs:
        return c
    ordered: dict = {}
    for l in sorted(c.literals, key=lambda l: l.masked_key):
        for a in l.args:
            term_vars(a, ordered)
    groups: dict[tuple[str, str], list[Var]] = {}
    for v in ordered:
        base = _TRAILING_DIGITS.sub("", v.name) or "x"
        groups.setdefault((base, v.sort), []).append(v)
    taken: dict[str, str] = {}
    ren: dict = {}
    for (base, sort), members in groups.items():
        for i, v in enumerate(members, 1):
            name = base if len(members) == 1 else f"{base}{i}"
            # different sorts may share a base name
            while name in taken and taken[name] != sort:
                name += "_"
            taken[name] = sort
            ren[v] = Var(name, v.sort)
    if all(ren[v] == v for v in ren):
        return c
    return apply_substitution(c, ren)


def canonical_key(c: Clause) -> tuple:
    """Key equal for clauses that are variants of each other (modulo rare ties)."""
    lits = sorted(c.literals, key=lambda l: l.masked_key)
    order: dict = {}
    for l in lits:
        for a in l.args:
            term_vars(a, order)
    ren = {v: Var(f"_{i}", v.sort) for i, v in enumerate(order)}
    return tuple(sorted((apply_literal(l, ren).key for l in lits)))


def match_term(pattern: Term, target: Term, s: dict) -> bool:
    """One-way matching: extend ``s`` so that pattern·s == target."""
    if pattern.is_var:
        bound = s.get(pattern)
        if bound is None:
            if pattern.sort != target.sort and ANY_SORT not in (pattern.sort, target.sort):
                return False
            s[pattern] = target
            return True
        return bound == target
    if target.is_var or pattern.fn != target.fn or len(pattern.args) != len(target.args):
        return False
    if pattern.ground:
        return pattern == target
    for p, t in zip(pattern.args, target.args):
        if not match_term(p, t, s):
            return False
    return True


def match_literal(pattern: Literal, target: Literal, s: dict) -> bool:
    if (
        pattern.positive != target.positive
        or pattern.pred != target.pred
        or len(pattern.args) != len(target.args)
    ):
        return False
    saved = dict(s)
    for p, t in zip(pattern.args, target.args):
        if not match_term(p, t, s):
            s.clear()
            s.update(saved)
            return False
    return True


def subsumes(c: Clause, d: Clause) -> dict | None:
    """Return θ with S(cθ) ⊆ S(d), treating d's variables as constants."""
    if len(c) > len(d) and len({l.masked_key for l in c}) > len(d):
        return None
    dlits = d.literals
    by_pred: dict = {}
    for l in dlits:
        by_pred.setdefault((l.positive, l.pred), []).append(l)
    clits = sorted(c.literals, key=lambda l: len(by_pred.get((l.positive, l.pred), ())))

    def search(i: int, s: dict) -> dict | None:
        if i == len(clits):
            return s
        for target in by_pred.get((clits[i].positive, clits[i].pred), ()):
            s2 = dict(s)
            if match_literal(clits[i], target, s2):
                found = search(i + 1, s2)
                if found is not None:
                    return found
        return None

    return search(0, {})


def _rename_match(p: Term, t: Term, fwd: dict, back: dict) -> bool:
    if p.is_var:
        if not t.is_var or p.sort != t.sort:
            return False
        a, b = fwd.get(p), back.get(t)
        if a is None and b is None:
            fwd[p] = t
            back[t] = p
            return True
        return a == t and b == p
    if t.is_var or p.fn != t.fn or len(p.args) != len(t.args):
        return False
    if p.ground or t.ground:
        return p == t
    return all(_rename_match(x, y, fwd, back) for x, y in zip(p.args, t.args))


def is_variant(c: Clause, d: Clause) -> bool:
    """Whether ``d`` is ``c`` under a bijective, sort-preserving variable renaming."""
    if len(c) != len(d):
        return False
    if c == d:
        return True
    if sorted(l.masked_key for l in c) != sorted(l.masked_key for l in d):
        return False
    clits = c.literals
    dlits = d.literals

    def search(i: int, used: frozenset, fwd: dict, back: dict) -> bool:
        if i == len(clits):
            return True
        a = clits[i]
        for j, b in enumerate(dlits):
            if j in used or a.masked_key != b.masked_key:
                continue
            f2, b2 = dict(fwd), dict(back)
            if all(_rename_match(x, y, f2, b2) for x, y in zip(a.args, b.args)):
                if search(i + 1, used | {j}, f2, b2):
                    return True
        return False

    return search(0, frozenset(), {}, {})


# ---------------------------------------------------------------------------
# Policies, environments, queries
# ---------------------------------------------------------------------------

PERMIT = "permit"
DENY = "deny"


@dataclass(frozen=True)
class Policy:
    """∀x̄ (ℓ1 ∧ … ∧ ℓk ⇒ (¬)Permitted(args))."""

    label: str
    antecedent: tuple[Literal, ...]
    sign: str  # PERMIT | DENY
    args: tuple  # the Permitted arguments, subject and action first

    @property
    def subject(self) -> Term:
        return self.args[0]

    @property
    def action(self) -> Term:
        return self.args[1]

    @property
    def conclusion(self) -> Literal:
        return Literal(self.sign == PERMIT, PERMITTED, self.args)

    @property
    def clause(self) -> Clause:
        return policy_to_clause(self)

    @property
    def is_permitting(self) -> bool:
        return self.sign == PERMIT


def policy_to_clause(p: Policy) -> Clause:
    return Clause([l.negate() for l in p.antecedent] + [p.conclusion])


@dataclass(frozen=True)
class EnvRule:
    """A universal environment fact, kept in clause form."""

    label: str
    clause: Clause


@dataclass(frozen=True, repr=False)
class PolicyBase:
    signature: Signature = field(compare=False, default_factory=Signature)
    e0: tuple[Literal, ...] = ()
    e1: tuple[EnvRule, ...] = ()
    policies: tuple[Policy, ...] = ()

    def __post_init__(self) -> None:
        for l in self.e0:
            if not l.ground:
                raise LithiumError(f"ground environment literal expected, got {l!r}")
            if l.pred == PERMITTED:
                raise LithiumError("the environment must not mention Permitted")
        for r in self.e1:
            if any(l.pred == PERMITTED for l in r.clause):
                raise LithiumError(f"environment rule {r.label} mentions Permitted")

    @property
    def f0(self) -> tuple[Literal, ...]:
        """Positive ground equations of E0."""
        return tuple(l for l in self.e0 if l.pred == EQ and l.positive)

    @property
    def f1(self) -> tuple[Literal, ...]:
        return tuple(l for l in self.e0 if not (l.pred == EQ and l.positive))

    def e1_clauses(self) -> list[Clause]:
        return [r.clause for r in self.e1]

    def policy_clauses(self) -> list[Clause]:
        return [p.clause for p in self.policies]

    def universal_clauses(self) -> list[tuple[str, Clause]]:
        """Labelled clauses of E1 ∧ P, in document order."""
        return [(r.label, r.clause) for r in self.e1] + [(p.label, p.clause) for p in self.policies]

    def __repr__(self) -> str:
        return (
            f"PolicyBase(e0={len(self.e0)}, e1={[r.label for r in self.e1]}, "
            f"policies={[p.label for p in self.policies]})"
        )

    def replace(self, **changes) -> "PolicyBase":
        kw = dict(signature=self.signature, e0=self.e0, e1=self.e1, policies=self.policies)
        kw.update(changes)
        return PolicyBase(**kw)


@dataclass(frozen=True, repr=False)
class Query:
    base: PolicyBase
    sign: str  # PERMIT | DENY
    args: tuple  # closed terms
    name: str = "query"

    def __repr__(self) -> str:
        return f"Query({self.name}: {self.sign}({', '.join(map(repr, self.args))}))"

    def __post_init__(self) -> None:
        if not all(a.ground for a in self.args):
            raise LithiumError("query goal terms must be closed")

    @property
    def goal(self) -> Literal:
        return Literal(self.sign == PERMIT, PERMITTED, self.args)

    @property
    def subject(self) -> Term:
        return self.args[0]

    @property
    def action(self) -> Term:
        return self.args[1]

    def with_base(self, base: PolicyBase) -> "Query":
        return Query(base, self.sign, self.args, self.name)


def reflexivity_clause() -> Clause:
    x = Var("r", ANY_SORT)
    return Clause([Literal(True, EQ, (x, x))])


REFLEXIVITY = reflexivity_clause()


def negated_query_clauses(q: Query) -> list[tuple[str, Clause]]:
    """Labelled clause set whose unsatisfiability is the validity of ``q``."""
    out: list[tuple[str, Clause]] = [(f"E0:{l!r}", Clause([l])) for l in q.base.e0]
    out += q.base.universal_clauses()
    out.append(("goal", Clause([q.goal.negate()])))
    return out


# ---------------------------------------------------------------------------
# Sort checking
# ---------------------------------------------------------------------------


def check_term(sig: Signature, t: Term) -> str:
    if t.is_var:
        return t.sort
    sym = sig.get(t.fn)
    if sym is None or sym.kind == "predicate":
        raise SortError(f"undeclared function or constant {t.fn!r}")
    if len(t.args) != sym.arity:
        raise SortError(f"{t.fn!r} expects {sym.arity} argument(s), got {len(t.args)}")
    for a, s in zip(t.args, sym.arg_sorts):
        got = check_term(sig, a)
        if got != s:
            raise SortError(f"argument {a!r} of {t.fn!r} has sort {got}, expected {s}")
    if t.sort != sym.result_sort:
        raise SortError(f"term {t!r} carries sort {t.sort}, expected {sym.result_sort}")
    return sym.result_sort  # type: ignore[return-value]


def check_literal(sig: Signature, lit: Literal) -> None:
    if lit.pred == EQ:
        if len(lit.args) != 2:
            raise SortError("equality takes exactly two arguments")
        a, b = (check_term(sig, t) for t in lit.args)
        if a != b:
            raise SortError(f"equality between sorts {a} and {b} in {lit!r}")
        return
    sym = sig.get(lit.pred)
    if sym is None or sym.kind != "predicate":
        raise SortError(f"undeclared predicate {lit.pred!r}")
    if len(lit.args) != sym.arity:
        raise SortError(f"{lit.pred!r} expects {sym.arity} argument(s), got {len(lit.args)}")
    for a, s in zip(lit.args, sym.arg_sorts):
        got = check_term(sig, a)
        if got != s:
            raise SortError(f"argument {a!r} of {lit.pred!r} has sort {got}, expected {s}")


def check_policy(sig: Signature, p: Policy) -> None:
    for l in p.antecedent:
        check_literal(sig, l)
    check_literal(sig, p.conclusion)
