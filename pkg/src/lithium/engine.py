"""The Lithium decision procedure and the analyses built around it."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    DENY,
    EQ,
    PERMIT,
    PERMITTED,
    REFLEXIVITY,
    App,
    Clause,
    EnvRule,
    Literal,
    LithiumError,
    Policy,
    PolicyBase,
    Query,
    Status,
    Symbol,
    Var,
    apply_literal,
    apply_term,
    canonical_key,
    compose,
    match_literal,
    negated_query_clauses,
    rename_clause,
    subsumes,
    term_vars,
)
from .derivation import Derivation
from .equality import EqClasses, SafeReport, equality_safe, to_equation_free
from .index import LiteralIndex
from .resolution import (
    DEFAULT_FUEL,
    Step,
    ancestry,
    factors,
    resolve,
    restricted_closure,
    saturate,
)
from .unify import BipolarReport, bipolar_report, try_mgu, unconstrained_count, unify_terms

log = logging.getLogger(__name__)

FRESH_PREFIX = "$c_"


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------


@dataclass
class MembershipReport:
    in_lithium: bool
    equality_safe: SafeReport
    bipolar: BipolarReport
    labels: list[str]
    clauses: list[Clause]
    per_clause_k: dict[str, int]
    suggested_path: str  # "fast" | "full" | "fallback"
    violations: list[str] = field(default_factory=list)

    def bipolar_literals(self, label: str) -> list[Literal]:
        i = self.labels.index(label)
        return sorted(self.bipolar.bipolar_in(i), key=lambda l: l.key)

    def flagged(self) -> dict[str, list[Literal]]:
        """Clauses with more than one bipolar literal."""
        return {
            self.labels[i]: sorted(ls, key=lambda l: l.key)
            for i, ls in sorted(self.bipolar.bipolar.items())
            if len(ls) > 1
        }

    def to_dict(self) -> dict:
        return {
            "in_lithium": self.in_lithium,
            "equality_safe": self.equality_safe.safe,
            "equality_violations": self.equality_safe.violations,
            "bipolar_pairs": [
                [self.labels[a], repr(l), self.labels[b], repr(l2)]
                for a, l, b, l2 in self.bipolar.pairs
            ],
            "bipolar_count": {self.labels[i]: n for i, n in sorted(self.bipolar.per_clause_count.items())},
            "k": self.per_clause_k,
            "suggested_path": self.suggested_path,
            "violations": self.violations,
        }


def _mentions_equality(clauses: Sequence[Clause]) -> bool:
    return any(l.pred == EQ for c in clauses for l in c.literals)


def membership(q: Query) -> MembershipReport:
    """Decide whether ``q`` lies in the Lithium fragment and say why not."""
    base = q.base
    safe = equality_safe(q)
    eq = EqClasses(base.e0)
    labelled = base.universal_clauses()
    labels = [lab for lab, _ in labelled]
    # relative to E0's equalities: rewrite first, so literals that become
    # identical merge before counting
    clauses = [c if eq.trivial else eq.rewrite_clause(c) for _, c in labelled]
    rep = bipolar_report(clauses)
    k = {labels[i]: unconstrained_count(c, rep.bipolar_in(i)) for i, c in enumerate(clauses)}
    violations = list(safe.violations)
    for i in sorted(rep.bipolar):
        ls = rep.bipolar[i]
        if len(ls) > 1:
            shown = ", ".join(repr(l) for l in sorted(ls, key=lambda l: l.key))
            violations.append(f"{labels[i]} has {len(ls)} bipolar literals: {shown}")
    in_lithium = not violations
    if not in_lithium:
        path = "fallback"
    elif (
        not base.e1
        and not any(l.pred == EQ for l in base.e0)
        and not _mentions_equality(clauses)
        and rep.empty
        and all(v == 0 for v in k.values())
    ):
        path = "fast"
    else:
        path = "full"
    return MembershipReport(in_lithium, safe, rep, labels, clauses, k, path, violations)


# ---------------------------------------------------------------------------
# Answering queries
# ---------------------------------------------------------------------------


@dataclass
class Verdict:
    status: Status
    witness: Derivation | None = None
    membership: MembershipReport | None = None
    path: str = ""
    fuel_spent: int = 0
    inputs: list[Clause] = field(default_factory=list)
    detail: str = ""

    @property
    def valid(self) -> bool:
        return self.status is Status.VALID

    def to_dict(self) -> dict:
        d: dict = {"verdict": self.status.value, "path": self.path}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        if self.membership is not None and not self.membership.in_lithium:
            d["diagnosis"] = self.membership.to_dict()
        if self.fuel_spent:
            d["fuel_spent"] = self.fuel_spent
        if self.detail:
            d["detail"] = self.detail
        return d


def input_clauses(q: Query) -> list[Clause]:
    """Clauses a witness for ``q`` may start from (``q`` already equation-free)."""
    return [c for _, c in negated_query_clauses(q)] + [REFLEXIVITY]


class _Builder:
    """Accumulates a derivation with fresh, dense step ids."""

    def __init__(self):
        self.steps: list[Step] = []
        self._inputs: dict[tuple[Clause, str], int] = {}

    def add_input(self, clause: Clause, label: str) -> int:
        key = (clause, label)
        got = self._inputs.get(key)
        if got is not None:
            return got
        sid = len(self.steps)
        self.steps.append(Step(sid, clause, "input", label))
        self._inputs[key] = sid
        return sid

    def copy_from(self, source: Sequence[Step], root: int) -> int:
        remap: dict[int, int] = {}
        for i in ancestry(source, root):
            st = source[i]
            if st.rule == "input":
                remap[i] = self.add_input(st.clause, st.label)
            else:
                nid = len(self.steps)
                self.steps.append(
                    Step(nid, st.clause, st.rule, st.label, tuple(remap[p] for p in st.parents),
                         st.left, st.right, st.pivots, st.unifier)
                )
                remap[i] = nid
        return remap[root]

    def add_resolution(self, a: int, b: int, pivot_left: Literal) -> int:
        """Resolve step ``a`` with step ``b`` on the literal ``pivot_left`` of ``a``."""
        ca, cb = self.steps[a].clause, self.steps[b].clause
        for r in resolve(ca, cb, allow_same=True):
            # left literals are renamed copies of ca's literals
            if _unrename(r.pivots[0], "1") == pivot_left:
                nid = len(self.steps)
                self.steps.append(
                    Step(nid, r.clause, "resolve", "", (a, b), r.left, r.right, r.pivots, r.unifier)
                )
                return nid
        raise LithiumError(f"internal: cannot resolve {ca!r} with {cb!r} on {pivot_left!r}")

    def derivation(self, note: str = "") -> Derivation:
        return Derivation(self.steps, note)


def _unrename(l: Literal, suffix: str) -> Literal:
    ren = {v: Var(v.name[: -len(suffix)], v.sort) for v in l.vars() if v.name.endswith(suffix)}
    return apply_literal(l, ren)


class _Matcher:
    """Condition (ii): find σ with S(cσ) ⊆ S(¬E0 ∨ goal) ∪ {s ≠ s}."""

    def __init__(self, index: LiteralIndex, goal: Literal):
        self.index = index
        self.goal = goal

    def match(self, c: Clause) -> dict | None:
        s: dict = {}
        env: list[Literal] = []
        for l in c.literals:
            if l.pred == PERMITTED:
                if l.positive != self.goal.positive:
                    return None
                if not match_literal(l, self.goal, s):
                    return None
            else:
                env.append(l)
        if not env:
            return s
        pending = [apply_literal(l, s) for l in env]
        for comp in _components(pending):
            got = self._solve(comp, {})
            if got is None:
                return None
            s = compose(s, got) if s else got
        return s

    def _options(self, l: Literal, s: dict):
        """Extensions of ``s`` making l·s the complement of an E0 literal (or s = s)."""
        ls = apply_literal(l, s)
        if ls.pred == EQ:
            if ls.positive:
                return []
            u = unify_terms(ls.args[0], ls.args[1])
            return [] if u is None else [u]
        want = ls.negate()
        if ls.ground:
            return [{}] if want in self.index else []
        bound = {i: a for i, a in enumerate(want.args) if a.ground}
        out = []
        for e in self.index.candidates(want.positive, want.pred, bound):
            th: dict = {}
            if match_literal(want, e, th):
                out.append(th)
        return out

    def _solve(self, lits: list[Literal], s: dict) -> dict | None:
        if not lits:
            return s
        # most constrained literal first
        best_i, best_opts = 0, None
        for i, l in enumerate(lits):
            opts = self._options(l, s)
            if best_opts is None or len(opts) < len(best_opts):
                best_i, best_opts = i, opts
                if not opts:
                    return None
                if len(opts) == 1:
                    break
        rest = lits[:best_i] + lits[best_i + 1:]
        for th in best_opts:
            s2 = compose(s, th) if s else dict(th)
            got = self._solve(rest, s2)
            if got is not None:
                return got
        return None


def _components(lits: list[Literal]) -> list[list[Literal]]:
    """Group literals that share variables; ground literals stand alone."""
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    groups: dict = {}
    owners: list = []
    for i, l in enumerate(lits):
        vs = list(l.vars())
        node = ("lit", i)
        parent.setdefault(node, node)
        for v in vs:
            parent.setdefault(v, v)
            a, b = find(node), find(v)
            if a != b:
                parent[b] = a
        owners.append(node)
    for i, node in enumerate(owners):
        groups.setdefault(find(node), []).append(lits[i])
    return list(groups.values())


def _clash_witness(b: _Builder, clash: tuple[Literal, ...]) -> int:
    if len(clash) == 1:
        a = b.add_input(Clause([clash[0]]), f"E0:{clash[0]!r}")
        r = b.add_input(REFLEXIVITY, "reflexivity")
        return b.add_resolution(a, r, clash[0])
    pos, neg = clash
    a = b.add_input(Clause([pos]), f"E0:{pos!r}")
    c = b.add_input(Clause([neg]), f"E0:{neg!r}")
    return b.add_resolution(a, c, pos)


def _unit_refutation(b: _Builder, sid: int, matcher: _Matcher, goal_neg: Clause) -> int:
    """Resolve clause ``sid`` down to the empty clause with unit inputs."""
    while not b.steps[sid].clause.is_empty:
        x = b.steps[sid].clause
        s = matcher.match(x)
        if s is None:
            raise LithiumError(f"internal: lost the match for {x!r}")
        lit = x.literals[0]
        if lit.pred == PERMITTED:
            unit = b.add_input(goal_neg, "goal")
        elif lit.pred == EQ and not lit.positive:
            unit = b.add_input(REFLEXIVITY, "reflexivity")
        else:
            e = apply_literal(lit, s).negate()
            if not e.ground:
                # an unconstrained variable left free: any instance in E0 does
                opts = matcher._options(lit, s)
                e = apply_literal(apply_literal(lit, s), opts[0]).negate()
            unit = b.add_input(Clause([e]), f"E0:{e!r}")
        sid = b.add_resolution(sid, unit, lit)
    return sid


def answer(
    q: Query,
    fallback: bool = False,
    fuel: int = DEFAULT_FUEL,
    backend: str = "sorted",
    separate: bool = True,
) -> Verdict:
    """Decide whether the base of ``q`` entails its goal literal.

    A base outside Lithium can still be answered exactly when the policies
    opposite to the goal can be separated away and what remains is in
    Lithium (``separate``).  Otherwise ``fallback`` runs general saturation.
    """
    report = membership(q)
    if not report.in_lithium:
        if separate:
            routed = _separated(q, report, backend)
            if routed is not None:
                return routed
        if not fallback:
            return Verdict(Status.NOT_IN_LITHIUM, membership=report, path="none",
                           detail="; ".join(report.violations))
        return _fallback(q, report, fuel)
    qf = to_equation_free(q, check=False)
    base = qf.base
    goal = qf.goal
    inputs = input_clauses(qf)
    index = LiteralIndex(base.e0, backend)
    clash = index.find_clash()
    if clash is not None:
        b = _Builder()
        _clash_witness(b, clash)
        return Verdict(Status.VALID, b.derivation("environment is inconsistent"), report,
                       "clash", inputs=inputs)
    labelled = base.universal_clauses()
    closure = restricted_closure(
        [c for _, c in labelled], [lab for lab, _ in labelled], check=False
    )
    goal_neg = Clause([goal.negate()])
    matcher = _Matcher(index, goal)
    if closure.empty is not None:
        b = _Builder()
        b.copy_from(closure.steps, closure.empty.id)
        return Verdict(Status.VALID, b.derivation("universal part is inconsistent"), report,
                       report.suggested_path, inputs=inputs)
    for st in closure.steps:
        s = matcher.match(st.clause)
        if s is None:
            continue
        b = _Builder()
        sid = b.copy_from(closure.steps, st.id)
        _unit_refutation(b, sid, matcher, goal_neg)
        note = f"matched {st.label}: {st.clause!r}"
        return Verdict(Status.VALID, b.derivation(note), report, report.suggested_path,
                       inputs=inputs)
    return Verdict(Status.INVALID, None, report, report.suggested_path, inputs=inputs)


def _separated(q: Query, report: MembershipReport, backend: str) -> Verdict | None:
    """Answer on E ∧ P (or E ∧ D for deny goals) when separation allows it."""
    base = q.base
    if not any(p.sign == PERMIT for p in base.policies) or not any(p.sign == DENY for p in base.policies):
        return None
    sep = check_separation(base)
    ok = sep.satisfied if q.sign == PERMIT else sep.mirror_satisfied
    if not ok:
        return None
    kept = tuple(p for p in base.policies if p.sign == q.sign)
    sub = q.with_base(base.replace(policies=kept))
    v = answer(sub, backend=backend, separate=False)
    if v.status not in (Status.VALID, Status.INVALID):
        return None
    side = "permitting" if q.sign == PERMIT else "denying"
    note = f"answered on the {side} policies alone after separation"
    if v.witness is not None:
        v.witness.note = f"{v.witness.note}; {note}" if v.witness.note else note
    return Verdict(v.status, v.witness, report, "separated", inputs=v.inputs, detail=note)


def _fallback(q: Query, report: MembershipReport, fuel: int) -> Verdict:
    qf = to_equation_free(q, check=False) if report.equality_safe.safe else q
    labelled = negated_query_clauses(qf)
    res = saturate([c for _, c in labelled], fuel, [lab for lab, _ in labelled])
    inputs = input_clauses(qf)
    if res.empty is not None:
        b = _Builder()
        b.copy_from(res.steps, res.empty.id)
        return Verdict(Status.VALID, b.derivation("found by general saturation"), report,
                       "fallback", res.generated, inputs)
    why = "fuel exhausted" if res.exhausted else "saturated without refutation"
    return Verdict(Status.UNKNOWN, None, report, "fallback", res.generated, inputs, why)


# ---------------------------------------------------------------------------
# Separation
# ---------------------------------------------------------------------------


@dataclass
class SeparationEntry:
    p_label: str
    d_label: str
    clause: Clause
    status: str  # "impliedByE" | "impliedByConjunct" | "missing"
    by: str = ""

    def to_dict(self) -> dict:
        d = {"p": self.p_label, "d": self.d_label, "resolvent": repr(self.clause), "status": self.status}
        if self.by:
            d["by"] = self.by
        return d


@dataclass
class SeparationReport:
    satisfied: bool
    resolvents: list[SeparationEntry]
    impure_policies: list[str]
    impure_denying: list[str] = field(default_factory=list)

    @property
    def missing(self) -> list[SeparationEntry]:
        return [r for r in self.resolvents if r.status == "missing"]

    @property
    def mirror_satisfied(self) -> bool:
        """Same test with the roles of permitting and denying policies swapped."""
        return not self.missing and not self.impure_denying

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "impure_policies": self.impure_policies,
            "resolvents": [r.to_dict() for r in self.resolvents],
        }


def _implied_by_e(f: Clause, e0: LiteralIndex, e1: Sequence[EnvRule]) -> str | None:
    if f.is_tautology():
        return "tautology"
    for l in f.literals:
        if l.ground and l in e0:
            return f"E0:{l!r}"
    for r in e1:
        if subsumes(r.clause, f) is not None:
            return r.label
    if e0.find_clash() is not None:
        return "inconsistent E0"
    return None


def _factor_closure(c: Clause) -> list[Clause]:
    """``c`` and every clause reachable from it by factoring.

    A resolvent may unify more than the two pivot literals, so the
    separation test has to look at resolvents of factors too.
    """
    out = [c]
    keys = {canonical_key(c)}
    i = 0
    while i < len(out):
        for fc, _, _ in factors(out[i]):
            k = canonical_key(fc)
            if k not in keys:
                keys.add(k)
                out.append(fc)
        i += 1
    return out


def _classify(p_label: str, d_label: str, f: Clause, e0: LiteralIndex, e1, conjuncts) -> SeparationEntry:
    by = _implied_by_e(f, e0, e1)
    if by is not None:
        return SeparationEntry(p_label, d_label, f, "impliedByE", by)
    for lab, c in conjuncts:
        if subsumes(c, f) is not None:
            return SeparationEntry(p_label, d_label, f, "impliedByConjunct", lab)
    return SeparationEntry(p_label, d_label, f, "missing")


def check_separation(
    base: PolicyBase,
    permitting: Sequence[Policy] | None = None,
    denying: Sequence[Policy] | None = None,
) -> SeparationReport:
    """Test whether denying policies can be ignored when deciding permissions.

    Every resolvent of a permitting and a denying policy on a Permitted
    literal must already follow from the environment or from a single
    conjunct; conservatively, "follows" means syntactic subsumption.
    Terms are first rewritten to their E0 equality representatives, so
    pivots that only clash modulo E0 are found too.
    """
    if permitting is None:
        permitting = [p for p in base.policies if p.sign == PERMIT]
    if denying is None:
        denying = [p for p in base.policies if p.sign == DENY]
    eq = EqClasses(base.e0)
    rw = (lambda c: c) if eq.trivial else eq.rewrite_clause
    e0 = LiteralIndex(base.e0 if eq.trivial else [eq.rewrite_literal(l) for l in base.e0])
    e1 = [EnvRule(r.label, rw(r.clause)) for r in base.e1]
    pclauses = [(p.label, rw(p.clause)) for p in permitting]
    dclauses = [(d.label, rw(d.clause)) for d in denying]
    conjuncts = [(r.label, r.clause) for r in e1] + pclauses + dclauses
    impure = [lab for lab, c in pclauses
              if any(l.pred == PERMITTED and not l.positive for l in c.literals)]
    impure_d = [lab for lab, c in dclauses
                if any(l.pred == PERMITTED and l.positive for l in c.literals)]
    entries: list[SeparationEntry] = []
    seen: set = set()
    for plab, pclause in pclauses:
        for dlab, dclause in dclauses:
            for pc, dc in itertools.product(_factor_closure(pclause), _factor_closure(dclause)):
                for r in resolve(pc, dc, allow_same=True):
                    if r.pivots[0].pred != PERMITTED:
                        continue
                    f = r.clause
                    key = (plab, dlab, canonical_key(f))
                    if key in seen:
                        continue
                    seen.add(key)
                    entries.append(_classify(plab, dlab, f, e0, e1, conjuncts))
    satisfied = not impure and all(e.status != "missing" for e in entries)
    return SeparationReport(satisfied, entries, impure, impure_d)


# ---------------------------------------------------------------------------
# Consistency
# ---------------------------------------------------------------------------


@dataclass
class ConsistencyResult:
    status: Status
    reason: str = ""
    witnesses: list[Derivation] = field(default_factory=list)
    separation: SeparationReport | None = None
    verdicts: list[Verdict] = field(default_factory=list)

    def to_dict(self) -> dict:
        d: dict = {"verdict": self.status.value, "reason": self.reason}
        if self.witnesses:
            d["witness"] = [w.to_dict() for w in self.witnesses]
        if self.separation is not None:
            d["separation"] = self.separation.to_dict()
        return d


def fresh_goal_args(base: PolicyBase) -> tuple[App, ...]:
    """One constant per Permitted argument sort, outside the user namespace."""
    return tuple(App(f"{FRESH_PREFIX}{s}", (), s) for s in base.signature.permitted.arg_sorts)


def env_satisfiable(base: PolicyBase, fuel: int = DEFAULT_FUEL) -> bool | None:
    """Satisfiability of E0 ∧ E1 (None when undecided within fuel)."""
    env_only = base.replace(policies=())
    q = Query(env_only, PERMIT, fresh_goal_args(base), "env")
    if LiteralIndex(base.e0).find_clash() is not None:
        return False
    safe = equality_safe(q)
    qf = to_equation_free(q, check=False) if safe.safe else q
    if safe.safe and LiteralIndex(qf.base.e0).find_clash() is not None:
        return False
    clauses = [Clause([l]) for l in qf.base.e0] + qf.base.e1_clauses()
    res = saturate(clauses, fuel)
    if res.empty is not None:
        return False
    if res.exhausted or not safe.safe:
        return None
    return True


def check_consistency(base: PolicyBase, fallback: bool = False, fuel: int = DEFAULT_FUEL) -> ConsistencyResult:
    """Is E ∧ P ∧ D satisfiable?"""
    sep = check_separation(base)
    sat = env_satisfiable(base, fuel)
    if sat is False:
        return ConsistencyResult(Status.INCONSISTENT, "the environment is unsatisfiable", separation=sep)
    if sat and (sep.satisfied or sep.mirror_satisfied):
        return ConsistencyResult(Status.CONSISTENT, "separation holds and the environment is satisfiable",
                                 separation=sep)
    args = fresh_goal_args(base)
    sig = base.signature.copy()
    for a in args:
        if a.fn not in sig.symbols:
            sig.symbols[a.fn] = Symbol(a.fn, "constant", (), a.sort)
    fresh_base = base.replace(signature=sig.freeze())
    vp = answer(Query(fresh_base, PERMIT, args, "fresh-permit"), fallback, fuel)
    vd = answer(Query(fresh_base, DENY, args, "fresh-deny"), fallback, fuel)
    verdicts = [vp, vd]
    if vp.valid and vd.valid:
        return ConsistencyResult(Status.INCONSISTENT, "both permit and deny hold for fresh constants",
                                 [vp.witness, vd.witness], sep, verdicts)
    if Status.INVALID in (vp.status, vd.status):
        return ConsistencyResult(Status.CONSISTENT, "a fresh-constant query is invalid",
                                 separation=sep, verdicts=verdicts)
    return ConsistencyResult(Status.UNKNOWN, "fresh-constant queries undecided", separation=sep,
                             verdicts=verdicts)


# ---------------------------------------------------------------------------
# Definition unfolding
# ---------------------------------------------------------------------------


class NotADefinition(LithiumError):
    pass


def _definitions(base: PolicyBase, pred: str) -> list[EnvRule]:
    defs = []
    for r in base.e1:
        heads = [l for l in r.clause.literals if l.pred == pred and l.positive]
        negs = [l for l in r.clause.literals if l.pred == pred and not l.positive]
        if negs:
            raise NotADefinition(f"{pred} occurs negated in environment rule {r.label}")
        if len(heads) > 1:
            raise NotADefinition(f"environment rule {r.label} concludes {pred} twice")
        if heads:
            defs.append(r)
    return defs


def _derivable(lit: Literal, base: PolicyBase, skip: str) -> bool:
    """Could ``lit`` (an antecedent condition) possibly be established?"""
    for e in base.e0:
        if e.positive == lit.positive and e.pred == lit.pred and try_mgu(lit, e) is not None:
            return True
    probe = rename_clause(Clause([lit]), "#")[0].literals[0]
    for lab, c in base.universal_clauses():
        if lab == skip:
            continue
        for l in c.literals:
            if l.positive == probe.positive and l.pred == probe.pred and try_mgu(probe, l) is not None:
                return True
    return False


def prune_definitions(base: PolicyBase, preds: set[str]) -> PolicyBase:
    """Drop definitions with a body condition that nothing can establish."""
    keep = []
    for r in base.e1:
        heads = [l for l in r.clause.literals if l.pred in preds and l.positive]
        if heads:
            body = [l.negate() for l in r.clause.literals if l is not heads[0]]
            if any(not _derivable(b, base, r.label) for b in body):
                log.debug("pruning definition %s", r.label)
                continue
        keep.append(r)
    return base.replace(e1=tuple(keep))


def unfold_definitions(base: PolicyBase, preds, prune: bool = False) -> PolicyBase:
    """Replace defined predicates in policy antecedents by their definitions."""
    preds = set(preds)
    for pr in preds:
        sym = base.signature.get(pr)
        if sym is None or sym.kind != "predicate" or pr == PERMITTED:
            raise NotADefinition(f"{pr!r} is not a user predicate")
        if any(l.pred == pr for l in base.e0):
            raise NotADefinition(f"{pr} occurs in the ground environment")
        for p in base.policies:
            for l in p.antecedent:
                if l.pred == pr and not l.positive:
                    raise NotADefinition(f"{pr} is negated in policy {p.label}")
    if prune:
        base = prune_definitions(base, preds)
    defs = {pr: _definitions(base, pr) for pr in preds}
    used: set[str] = set()
    new_policies: list[Policy] = []
    for p in base.policies:
        if not any(l.pred in preds for l in p.antecedent):
            new_policies.append(p)
            continue
        work = [(list(p.antecedent), p.args)]
        done: list[tuple[list[Literal], tuple]] = []
        rounds = 0
        while work:
            rounds += 1
            if rounds > 10_000:
                raise NotADefinition(f"definitions used by {p.label} do not terminate")
            ante, args = work.pop(0)
            idx = next((i for i, l in enumerate(ante) if l.pred in preds), None)
            if idx is None:
                done.append((ante, args))
                continue
            lit = ante[idx]
            for r in defs[lit.pred]:
                dc, _ = rename_clause(r.clause, "#d")
                head = next(l for l in dc.literals if l.pred == lit.pred and l.positive)
                s = try_mgu(lit, head)
                if s is None:
                    continue
                used.add(r.label)
                body = [apply_literal(l.negate(), s) for l in dc.literals if l is not head]
                rest = [apply_literal(l, s) for l in ante[:idx] + ante[idx + 1:]]
                merged = list(dict.fromkeys(rest[:idx] + body + rest[idx:]))
                work.append((merged, tuple(apply_term(a, s) for a in args)))
        for n, (ante, args) in enumerate(done, 1):
            label = p.label if len(done) == 1 else f"{p.label}_{n}"
            new_policies.append(_tidy_policy(Policy(label, tuple(ante), p.sign, args)))
    e1 = tuple(r for r in base.e1 if r.label not in used)
    return base.replace(e1=e1, policies=tuple(new_policies))


def _tidy_policy(p: Policy) -> Policy:
    """Rename variables to plain names in order of appearance."""
    vs: dict = {}
    for l in p.antecedent:
        for a in l.args:
            term_vars(a, vs)
    for a in p.args:
        term_vars(a, vs)
    names: dict = {}
    taken: set[str] = set()
    for v in vs:
        base_name = v.name.split("#")[0].rstrip("0123456789") or "x"
        name = base_name
        i = 1
        while name in taken:
            i += 1
            name = f"{base_name}{i}"
        taken.add(name)
        names[v] = Var(name, v.sort)
    return Policy(
        p.label,
        tuple(apply_literal(l, names) for l in p.antecedent),
        p.sign,
        tuple(apply_term(a, names) for a in p.args),
    )
