"""Brute-force ground truth for tests and for ``--oracle``.

``finite_model_valid`` decides function-free queries exactly.  A universal
sentence true in some model stays true in the substructure generated by
its named elements, so it is enough to enumerate, per sort, the ways the
constants can be identified with each other (set partitions), plus one
anonymous element for each sort that has no constants.  Each such domain
is grounded and handed to a small DPLL solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .core import (
    EQ,
    App,
    Clause,
    Literal,
    LithiumError,
    Query,
    Status,
    negated_query_clauses,
    Var,
    subterms,
)
from .equality import equality_safe, to_equation_free
from .resolution import DEFAULT_FUEL, saturate


class OracleRefused(LithiumError):
    pass


class FunctionSymbolsPresent(OracleRefused):
    pass


@dataclass
class FiniteModel:
    domains: dict[str, int]
    constants: dict[str, tuple[str, int]]  # name -> (sort, element)
    relations: dict[str, set[tuple[int, ...]]] = field(default_factory=dict)
    functions: dict[str, dict[tuple[int, ...], int]] = field(default_factory=dict)

    def holds(self, pred: str, args: tuple[int, ...]) -> bool:
        return args in self.relations.get(pred, ())

    def table(self) -> str:
        lines = ["domains: " + ", ".join(f"{s}={n}" for s, n in sorted(self.domains.items()))]
        for name, (sort, e) in sorted(self.constants.items()):
            lines.append(f"  {name} : {sort} -> {e}")
        for fn in sorted(self.functions):
            rows = sorted(self.functions[fn].items())
            lines.append(f"  {fn}: " + ", ".join(f"{a}->{r}" for a, r in rows))
        for pred in sorted(self.relations):
            rows = sorted(self.relations[pred])
            lines.append(f"  {pred}: " + (", ".join(str(r) for r in rows) or "{}"))
        return "\n".join(lines)


@dataclass
class OracleVerdict:
    status: Status
    countermodel: FiniteModel | None = None
    models_checked: int = 0


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _restricted_growth(n: int) -> Iterator[tuple[int, ...]]:
    """All set partitions of n items as restricted growth strings."""
    if n == 0:
        yield ()
        return

    def rec(prefix: list[int], mx: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(mx + 2):
            prefix.append(v)
            yield from rec(prefix, max(mx, v))
            prefix.pop()

    yield from rec([0], 0)


def _signature_of(clauses: Sequence[Clause]):
    consts: dict[str, dict[str, None]] = {}
    var_sorts: set[str] = set()
    preds: dict[str, int] = {}
    for c in clauses:
        for l in c.literals:
            if l.pred != EQ:
                preds[l.pred] = len(l.args)
            for a in l.args:
                for t in subterms(a):
                    if t.is_var:
                        var_sorts.add(t.sort)
                    elif t.args:
                        raise FunctionSymbolsPresent(f"function symbol {t.fn!r} present")
                    else:
                        consts.setdefault(t.sort, {})[t.fn] = None
    return {s: list(cs) for s, cs in consts.items()}, var_sorts, preds


def _check_caps(consts, preds, max_constants: int, max_predicates: int, max_arity: int) -> None:
    for s, cs in consts.items():
        if len(cs) > max_constants:
            raise OracleRefused(f"{len(cs)} constants of sort {s} exceed the cap of {max_constants}")
    if len(preds) > max_predicates:
        raise OracleRefused(f"{len(preds)} predicates exceed the cap of {max_predicates}")
    for p, n in preds.items():
        if n > max_arity:
            raise OracleRefused(f"predicate {p} has arity {n} above the cap of {max_arity}")


def _structures(consts: dict[str, list[str]], var_sorts: set[str]):
    """(domain sizes, constant map) for every identification pattern."""
    sorts = sorted(set(consts) | var_sorts)
    per_sort = []
    for s in sorts:
        cs = consts.get(s, [])
        if not cs:
            per_sort.append([((s, 1), ())])
        else:
            per_sort.append([((s, max(rg) + 1), tuple(zip(cs, rg))) for rg in _restricted_growth(len(cs))])
    for combo in itertools.product(*per_sort):
        domains = {}
        cmap = {}
        for (s, n), pairs in combo:
            domains[s] = n
            for name, e in pairs:
                cmap[name] = (s, e)
        yield domains, cmap


def _term_value(t, cmap, env, funcs=None):
    if t.is_var:
        return env[t]
    if t.args:
        return funcs[t.fn][tuple(_term_value(a, cmap, env, funcs) for a in t.args)]
    return cmap[t.fn][1]


# ---------------------------------------------------------------------------
# Grounding and DPLL
# ---------------------------------------------------------------------------


def _ground(clauses: Sequence[Clause], domains, cmap, funcs=None):
    """Propositional clauses over atom ids; None if some clause is false outright."""
    atoms: dict[tuple, int] = {}
    out: list[list[int]] = []
    for c in clauses:
        vs = list(c.vars())
        ranges = [range(domains[v.sort]) for v in vs]
        for values in itertools.product(*ranges):
            env = dict(zip(vs, values))
            lits: list[int] = []
            sat = False
            for l in c.literals:
                args = tuple(_term_value(a, cmap, env, funcs) for a in l.args)
                if l.pred == EQ:
                    if (args[0] == args[1]) == l.positive:
                        sat = True
                        break
                    continue
                key = (l.pred, args)
                aid = atoms.get(key)
                if aid is None:
                    aid = len(atoms) + 1
                    atoms[key] = aid
                lits.append(aid if l.positive else -aid)
            if sat:
                continue
            if not lits:
                return None, atoms
            out.append(sorted(set(lits), key=abs))
    return out, atoms


def dpll(clauses: list[list[int]], nvars: int) -> dict[int, bool] | None:
    """Deterministic DPLL with unit propagation; returns a full assignment or None."""

    def propagate(cls, assign):
        changed = True
        while changed:
            changed = False
            new = []
            for c in cls:
                unassigned = []
                done = False
                for x in c:
                    v = assign.get(abs(x))
                    if v is None:
                        unassigned.append(x)
                    elif v == (x > 0):
                        done = True
                        break
                if done:
                    continue
                if not unassigned:
                    return None
                if len(unassigned) == 1:
                    x = unassigned[0]
                    assign[abs(x)] = x > 0
                    changed = True
                    continue
                new.append(unassigned)
            cls = new
        return cls

    def rec(cls, assign):
        cls = propagate(cls, assign)
        if cls is None:
            return None
        if not cls:
            return assign
        var = min(abs(x) for x in cls[0])
        for val in (False, True):
            a2 = dict(assign)
            a2[var] = val
            got = rec(cls, a2)
            if got is not None:
                return got
        return None

    got = rec(clauses, {})
    if got is None:
        return None
    return {v: got.get(v, False) for v in range(1, nvars + 1)}


def _search(clauses: Sequence[Clause], max_constants, max_predicates, max_arity):
    consts, var_sorts, preds = _signature_of(clauses)
    _check_caps(consts, preds, max_constants, max_predicates, max_arity)
    checked = 0
    for domains, cmap in _structures(consts, var_sorts):
        checked += 1
        ground, atoms = _ground(clauses, domains, cmap)
        if ground is None:
            continue
        assign = dpll(ground, len(atoms))
        if assign is None:
            continue
        rel: dict[str, set] = {p: set() for p in preds}
        for (pred, args), aid in atoms.items():
            if assign[aid]:
                rel[pred].add(args)
        return FiniteModel(domains, cmap, rel), checked
    return None, checked


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def finite_model_satisfiable(
    clauses: Iterable[Clause],
    max_constants: int = 4,
    max_predicates: int = 6,
    max_arity: int = 2,
) -> FiniteModel | None:
    """A model of the function-free clause set, or None if it has none."""
    model, _ = _search(list(clauses), max_constants, max_predicates, max_arity)
    return model


def finite_model_valid(
    q: Query,
    max_constants: int = 4,
    max_predicates: int = 6,
    max_arity: int = 2,
) -> OracleVerdict:
    """Exact validity of a function-free query by model enumeration."""
    clauses = [c for _, c in negated_query_clauses(q)]
    model, checked = _search(clauses, max_constants, max_predicates, max_arity)
    if model is None:
        return OracleVerdict(Status.VALID, None, checked)
    return OracleVerdict(Status.INVALID, model, checked)


def evaluate(model: FiniteModel, q: Query) -> bool:
    """Truth value of ``E ∧ P ⇒ goal`` in ``model``, by direct evaluation."""

    def lit_true(l: Literal, env) -> bool:
        args = tuple(_term_value(a, model.constants, env, model.functions) for a in l.args)
        if l.pred == EQ:
            val = args[0] == args[1]
        else:
            val = model.holds(l.pred, args)
        return val if l.positive else not val

    def clause_true(c: Clause) -> bool:
        vs = list(c.vars())
        for values in itertools.product(*(range(model.domains[v.sort]) for v in vs)):
            env = dict(zip(vs, values))
            if not any(lit_true(l, env) for l in c.literals):
                return False
        return True

    base = q.base
    antecedent = (
        all(lit_true(l, {}) for l in base.e0)
        and all(clause_true(r.clause) for r in base.e1)
        and all(clause_true(p.clause) for p in base.policies)
    )
    return (not antecedent) or lit_true(q.goal, {})


def _function_symbols(clauses: Sequence[Clause]):
    funcs: dict[str, tuple[tuple[str, ...], str]] = {}
    consts: dict[str, dict[str, None]] = {}
    var_sorts: set[str] = set()
    preds: dict[str, int] = {}
    for c in clauses:
        for l in c.literals:
            if l.pred != EQ:
                preds[l.pred] = len(l.args)
            for a in l.args:
                for t in subterms(a):
                    if t.is_var:
                        var_sorts.add(t.sort)
                    elif t.args:
                        funcs[t.fn] = (tuple(x.sort for x in t.args), t.sort)
                    else:
                        consts.setdefault(t.sort, {})[t.fn] = None
    for args, res in funcs.values():
        var_sorts.update(args)
        var_sorts.add(res)
    return {s: list(cs) for s, cs in consts.items()}, var_sorts, preds, funcs


def _constant_maps(cs: list[str], size: int):
    """Maps of the constants into range(size), up to renaming of elements."""
    for rg in _restricted_growth(len(cs)):
        if max(rg, default=-1) < size:
            yield tuple(zip(cs, rg))


def equality_axioms(clauses: Sequence[Clause]) -> list[Clause]:
    """Symmetry, transitivity and congruence axioms for the symbols used.

    Together with reflexivity they make plain resolution complete for
    equality, at the price of a large search space.
    """
    consts, var_sorts, preds, funcs = _function_symbols(clauses)
    arities: dict[str, tuple[str, ...]] = {}
    for c in clauses:
        for l in c.literals:
            if l.pred != EQ:
                arities[l.pred] = tuple(a.sort for a in l.args)
    sorts = sorted(set(consts) | var_sorts)
    out: list[Clause] = []

    def eq(a, b, positive=True):
        return Literal(positive, EQ, (a, b))

    for s in sorts:
        x, y, z = (Var(n, s) for n in ("x", "y", "z"))
        out.append(Clause([eq(x, y, False), eq(y, x)]))
        out.append(Clause([eq(x, y, False), eq(y, z, False), eq(x, z)]))
    for fn, (args, res) in sorted(funcs.items()):
        for i, s in enumerate(args):
            xs = [Var(f"u{j}", a) for j, a in enumerate(args)]
            ys = list(xs)
            ys[i] = Var("w", s)
            out.append(Clause([eq(xs[i], ys[i], False), eq(App(fn, tuple(xs), res), App(fn, tuple(ys), res))]))
    for pred, args in sorted(arities.items()):
        for i, s in enumerate(args):
            xs = [Var(f"u{j}", a) for j, a in enumerate(args)]
            ys = list(xs)
            ys[i] = Var("w", s)
            out.append(Clause([eq(xs[i], ys[i], False), Literal(False, pred, tuple(xs)), Literal(True, pred, tuple(ys))]))
    return out


def finite_countermodel(
    q: Query,
    max_domain: int = 3,
    max_structures: int = 20_000,
) -> FiniteModel | None:
    """Search small structures, function tables included, for a countermodel.

    Sound for Invalid only: a returned model falsifies ``q``; None proves
    nothing when function symbols are present.
    """
    clauses = [c for _, c in negated_query_clauses(q)]
    consts, var_sorts, preds, funcs = _function_symbols(clauses)
    sorts = sorted(set(consts) | var_sorts)
    low = {s: 1 for s in sorts}
    checked = 0
    for sizes in itertools.product(*(range(low[s], max_domain + 1) for s in sorts)):
        domains = dict(zip(sorts, sizes))
        cmaps = [list(_constant_maps(consts.get(s, []), domains[s])) for s in sorts]
        tables = []
        for fn, (args, res) in sorted(funcs.items()):
            points = list(itertools.product(*(range(domains[a]) for a in args)))
            tables.append([(fn, dict(zip(points, vals)))
                           for vals in itertools.product(range(domains[res]), repeat=len(points))])
        for cm in itertools.product(*cmaps):
            cmap = {}
            for s, pairs in zip(sorts, cm):
                for name, e in pairs:
                    cmap[name] = (s, e)
            for ft in itertools.product(*tables):
                checked += 1
                if checked > max_structures:
                    return None
                fmap = dict(ft)
                ground, atoms = _ground(clauses, domains, cmap, fmap)
                if ground is None:
                    continue
                assign = dpll(ground, len(atoms))
                if assign is None:
                    continue
                rel: dict[str, set] = {p: set() for p in preds}
                for (pred, args), aid in atoms.items():
                    if assign[aid]:
                        rel[pred].add(args)
                return FiniteModel(domains, cmap, rel, fmap)
    return None


def ground_saturation_valid(q: Query, fuel: int = DEFAULT_FUEL) -> Status:
    """Semi-decision by saturation: Valid if false is derived, else Unknown."""
    if equality_safe(q).safe:
        q = to_equation_free(q, check=False)
    clauses = [c for _, c in negated_query_clauses(q)]
    if any(c.is_empty for c in clauses):
        return Status.VALID
    res = saturate(clauses, fuel)
    return Status.VALID if res.empty is not None else Status.UNKNOWN
