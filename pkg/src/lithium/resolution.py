"""Binary resolution, the one-level restricted closure and general saturation."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    REFLEXIVITY,
    Clause,
    Literal,
    LithiumError,
    apply_literal,
    apply_substitution,
    canonical_key,
    rename_clause,
    subsumes,
    term_vars,
    tidy_variables,
)
from .unify import bipolar_report, try_mgu, unconstrained_count

log = logging.getLogger(__name__)

DEFAULT_FUEL = 50_000


class SameClause(LithiumError):
    pass


class PreconditionViolated(LithiumError):
    def __init__(self, message: str, offenders: list):
        super().__init__(message)
        self.offenders = offenders


@dataclass(eq=False)
class Step:
    """One node of a derivation.

    ``rule`` is "input", "resolve" or "factor".  For a resolution step
    ``left``/``right`` are the renamed-apart parent copies actually
    unified, ``pivots`` the two literals resolved upon (from left and
    right) and ``unifier`` their mgu.  For a factoring step ``left`` is the
    parent, ``pivots`` the two merged literals.
    """

    id: int
    clause: Clause
    rule: str
    label: str = ""
    parents: tuple[int, ...] = ()
    left: Clause | None = None
    right: Clause | None = None
    pivots: tuple[Literal, Literal] | None = None
    unifier: dict = field(default_factory=dict)

    @property
    def depth_one(self) -> bool:
        return self.rule == "input"


@dataclass(eq=False)
class Resolvent:
    clause: Clause
    left: Clause
    right: Clause
    pivots: tuple[Literal, Literal]
    unifier: dict
    parents: tuple = ()


def _rename_apart(c1: Clause, c2: Clause) -> tuple[Clause, Clause]:
    left = rename_clause(c1, "1")[0] if not c1.ground else c1
    right = rename_clause(c2, "2")[0] if not c2.ground else c2
    return left, right


def resolvent_of(left: Clause, right: Clause, l1: Literal, l2: Literal, s: dict) -> Clause:
    """(S(left·s) − {l1·s}) ∪ (S(right·s) − {l2·s})."""
    p1 = apply_literal(l1, s)
    p2 = apply_literal(l2, s)
    lits = [x for x in (apply_literal(l, s) for l in left.literals) if x != p1]
    lits += [x for x in (apply_literal(l, s) for l in right.literals) if x != p2]
    return Clause(lits)


def resolve(c1: Clause, c2: Clause, parents: tuple = (), allow_same: bool = False) -> list[Resolvent]:
    """All binary resolvents of two distinct clauses, one per unifiable pivot pair."""
    if c1 == c2 and not allow_same:
        raise SameClause(f"refusing to resolve {c1!r} with itself")
    left, right = _rename_apart(c1, c2)
    out: list[Resolvent] = []
    rlits = right.literals
    for l1 in left.literals:
        for l2 in rlits:
            if l1.positive == l2.positive or l1.pred != l2.pred:
                continue
            s = try_mgu(l1, l2)
            if s is None:
                continue
            clause = tidy_variables(resolvent_of(left, right, l1, l2, s))
            out.append(Resolvent(clause, left, right, (l1, l2), s, parents))
    return out


def factors(c: Clause) -> list[tuple[Clause, tuple[Literal, Literal], dict]]:
    """Factors from unifying two same-sign literals of ``c``."""
    out = []
    lits = c.literals
    for i in range(len(lits)):
        for j in range(i + 1, len(lits)):
            a, b = lits[i], lits[j]
            if a.positive != b.positive or a.pred != b.pred:
                continue
            s = try_mgu(a, b)
            if s is None:
                continue
            out.append((tidy_variables(apply_substitution(c, s)), (a, b), s))
    return out


@dataclass
class ClosureResult:
    steps: list[Step]
    exhausted: bool = False
    generated: int = 0
    empty: Step | None = None

    @property
    def clauses(self) -> list[Clause]:
        return [s.clause for s in self.steps]

    def step(self, i: int) -> Step:
        return self.steps[i]

    @property
    def contains_empty(self) -> bool:
        return self.empty is not None


def _clause_length(c: Clause) -> int:
    return c.size


def _max_term_size(clauses: Sequence[Clause]) -> int:
    best = 1
    for c in clauses:
        for l in c.literals:
            for a in l.args:
                best = max(best, a.size)
    return best


def restricted_closure(
    clauses: Sequence[Clause],
    labels: Sequence[str] | None = None,
    check: bool = True,
    relative_eq=None,
) -> ClosureResult:
    """Inputs plus every resolvent of two distinct inputs (one level only).

    Sound as the full closure when every input clause has at most one
    bipolar literal; ``check`` enforces that and the size bounds.
    """
    clauses = list(clauses)
    labels = list(labels) if labels is not None else [f"c{i}" for i in range(len(clauses))]
    n = len(clauses)
    if check:
        rep = bipolar_report(clauses, relative_eq)
        bad = [i for i in range(n) if rep.count(i) > 1]
        if bad:
            offenders = [(labels[i], sorted(rep.bipolar_in(i), key=lambda l: l.key)) for i in bad]
            raise PreconditionViolated(
                "clauses with more than one bipolar literal: "
                + ", ".join(f"{lab} {ls}" for lab, ls in offenders),
                offenders,
            )
    steps: list[Step] = []
    seen: dict = {}
    for i, c in enumerate(clauses):
        steps.append(Step(len(steps), c, "input", labels[i]))
        seen.setdefault(canonical_key(c), len(steps) - 1)
    generated = 0
    for i in range(n):
        for j in range(i + 1, n):
            if clauses[i] == clauses[j]:
                continue
            for r in resolve(clauses[i], clauses[j]):
                generated += 1
                key = canonical_key(r.clause)
                if key in seen:
                    continue
                st = Step(
                    len(steps), r.clause, "resolve", f"{labels[i]}*{labels[j]}",
                    (i, j), r.left, r.right, r.pivots, r.unifier,
                )
                seen[key] = st.id
                steps.append(st)
    result = ClosureResult(steps, False, generated)
    for st in steps:
        if st.clause.is_empty:
            result.empty = st
            break
    if check:
        check_closure_bounds(clauses, result)
    return result


def check_closure_bounds(inputs: Sequence[Clause], result: ClosureResult, k: int | None = None) -> None:
    """Assert the size, length and provenance bounds of a restricted closure."""
    n = len(inputs)
    if len(result.steps) > n + n * (n - 1):
        raise AssertionError(f"closure has {len(result.steps)} clauses for {n} inputs")
    L = max((_clause_length(c) for c in inputs), default=0)
    Lp = _max_term_size(inputs)
    for st in result.steps:
        if st.rule != "input":
            if any(result.steps[p].rule != "input" for p in st.parents):
                raise AssertionError(f"clause {st.id} has a derived parent")
            if _clause_length(st.clause) > 2 * L * Lp:
                raise AssertionError(f"clause {st.clause!r} longer than 2*{L}*{Lp}")
    if k is not None:
        for st in result.steps:
            if unconstrained_count(st.clause) > 2 * k:
                raise AssertionError(f"clause {st.clause!r} has more than {2 * k} unconstrained variables")


def saturate(
    clauses: Sequence[Clause],
    fuel: int = DEFAULT_FUEL,
    labels: Sequence[str] | None = None,
    reflexivity: bool = True,
) -> ClosureResult:
    """Breadth-first given-clause saturation.

    Includes the reflexivity clause, factoring, tautology deletion and
    forward subsumption.  A clause is never resolved with itself.  Stops
    at the empty clause, when no new clause can be produced, or once more
    than ``fuel`` clauses have been generated.
    """
    labels = list(labels) if labels is not None else [f"c{i}" for i in range(len(clauses))]
    steps: list[Step] = []
    result = ClosureResult(steps)
    seen: set = set()
    queue: deque[int] = deque()

    def add(st: Step) -> bool:
        steps.append(st)
        if st.clause.is_empty:
            result.empty = st
            return True
        queue.append(st.id)
        return False

    inputs = list(zip(labels, clauses))
    if reflexivity:
        inputs.append(("reflexivity", REFLEXIVITY))
    for lab, c in inputs:
        key = canonical_key(c)
        if key in seen:
            continue
        seen.add(key)
        if add(Step(len(steps), c, "input", lab)):
            return result
    processed: list[int] = []
    while queue:
        gid = queue.popleft()
        given = steps[gid]
        gc = given.clause
        if gc.is_tautology():
            continue
        # a longer clause may subsume its own factor; keeping that factor
        # is what makes factoring complete
        if any(
            len(steps[p].clause) <= len(gc) and subsumes(steps[p].clause, gc) is not None
            for p in processed
        ):
            continue
        new: list[Step] = []
        for fc, piv, s in factors(gc):
            new.append(Step(0, fc, "factor", "", (gid,), gc, None, piv, s))
        for pid in processed:
            other = steps[pid].clause
            if other == gc:
                continue
            for r in resolve(other, gc):
                new.append(Step(0, r.clause, "resolve", "", (pid, gid), r.left, r.right, r.pivots, r.unifier))
        processed.append(gid)
        for st in new:
            result.generated += 1
            if result.generated > fuel:
                result.exhausted = True
                log.debug("saturation out of fuel after %d clauses", result.generated - 1)
                return result
            if st.clause.is_tautology():
                continue
            key = canonical_key(st.clause)
            if key in seen:
                continue
            seen.add(key)
            st.id = len(steps)
            if add(st):
                return result
    return result


def ancestry(steps: Sequence[Step], root: int) -> list[int]:
    """Ids of every step ``root`` depends on, parents before children."""
    order: list[int] = []
    done: set = set()
    stack = [(root, False)]
    while stack:
        i, expanded = stack.pop()
        if i in done:
            continue
        if expanded:
            done.add(i)
            order.append(i)
            continue
        stack.append((i, True))
        for p in reversed(steps[i].parents):
            if p not in done:
                stack.append((p, False))
    return order


__all__ = [
    "DEFAULT_FUEL",
    "ClosureResult",
    "PreconditionViolated",
    "Resolvent",
    "SameClause",
    "Step",
    "ancestry",
    "check_closure_bounds",
    "factors",
    "resolve",
    "restricted_closure",
    "saturate",
    "term_vars",
]
