"""Resolution derivations: an independent replay checker and text/JSON export.

The checker deliberately avoids the unifier and the resolution code.  It
re-applies the recorded substitutions and compares clause sets, so a bug
in ``unify`` or ``resolution`` cannot vouch for itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import ANY_SORT, Clause, apply_literal, apply_substitution, is_variant
from .resolution import Step


@dataclass
class Derivation:
    """Steps in dependency order; the last one is the conclusion."""

    steps: list[Step]
    note: str = ""

    @property
    def root(self) -> Step:
        return self.steps[-1]

    def by_id(self) -> dict[int, Step]:
        return {s.id: s for s in self.steps}

    def inputs(self) -> list[Step]:
        return [s for s in self.steps if s.rule == "input"]

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        return {"steps": [step_to_dict(s) for s in self.steps], "note": self.note}


def _subst_text(s: dict) -> dict:
    return {repr(v): repr(t) for v, t in sorted(s.items(), key=lambda kv: kv[0].name)}


def step_to_dict(s: Step) -> dict:
    d = {"id": s.id, "clause": repr(s.clause), "rule": s.rule}
    if s.label:
        d["label"] = s.label
    if s.parents:
        d["parents"] = list(s.parents)
    if s.pivots is not None:
        d["pivots"] = [repr(p) for p in s.pivots]
        d["unifier"] = _subst_text(s.unifier)
    return d


def explain(d: Derivation) -> str:
    lines = []
    for s in d.steps:
        head = f"[{s.id}] {s.clause!r}"
        if s.rule == "input":
            lines.append(f"{head}    input {s.label}".rstrip())
            continue
        sub = ", ".join(f"{k}->{v}" for k, v in _subst_text(s.unifier).items())
        parents = ",".join(map(str, s.parents))
        piv = " / ".join(map(repr, s.pivots or ()))
        lines.append(f"{head}    {s.rule} of {parents} on {piv} with {{{sub}}}")
    if d.note:
        lines.append(d.note)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass
class ReplayResult:
    ok: bool
    errors: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _sort_preserving(s: dict) -> bool:
    return all(v.sort == ANY_SORT or v.sort == t.sort for v, t in s.items())


def _is_input(c: Clause, allowed: Sequence[Clause], exact: set) -> bool:
    if c in exact:
        return True
    return any(is_variant(c, a) for a in allowed if len(a) == len(c))


def replay(d: Derivation, allowed_inputs: Iterable[Clause] | None = None) -> ReplayResult:
    """Check every step of ``d`` and that it ends in the empty clause.

    ``allowed_inputs`` is the clause set of the question being answered;
    every input step must be one of them up to renaming.
    """
    errors: list[str] = []
    allowed = list(allowed_inputs) if allowed_inputs is not None else None
    exact = set(allowed or ())
    known: dict[int, Clause] = {}
    for s in d.steps:
        where = f"step {s.id}"
        if s.id in known:
            errors.append(f"{where}: duplicate id")
            continue
        if any(p not in known for p in s.parents):
            errors.append(f"{where}: parent used before it is derived")
            continue
        if s.rule == "input":
            if s.parents:
                errors.append(f"{where}: input step with parents")
            if allowed is not None and not _is_input(s.clause, allowed, exact):
                errors.append(f"{where}: {s.clause!r} is not an input clause")
        elif s.rule == "resolve":
            if len(s.parents) != 2 or s.left is None or s.right is None or s.pivots is None:
                errors.append(f"{where}: malformed resolution step")
            else:
                errors.extend(_check_resolution(s, known))
        elif s.rule == "factor":
            if len(s.parents) != 1 or s.left is None or s.pivots is None:
                errors.append(f"{where}: malformed factoring step")
            else:
                errors.extend(_check_factor(s, known))
        else:
            errors.append(f"{where}: unknown rule {s.rule!r}")
        known[s.id] = s.clause
    if not d.steps or not d.steps[-1].clause.is_empty:
        errors.append("derivation does not end in the empty clause")
    return ReplayResult(not errors, errors)


def _check_resolution(s: Step, known: dict[int, Clause]) -> list[str]:
    errs = []
    where = f"step {s.id}"
    p1, p2 = (known[p] for p in s.parents)
    left, right = s.left, s.right
    if not is_variant(left, p1):
        errs.append(f"{where}: left copy is not a renaming of parent {s.parents[0]}")
    if not is_variant(right, p2):
        errs.append(f"{where}: right copy is not a renaming of parent {s.parents[1]}")
    if set(left.vars()) & set(right.vars()):
        errs.append(f"{where}: parent copies share variables")
    a, b = s.pivots
    if a not in left or b not in right:
        errs.append(f"{where}: pivot literal not in its parent")
        return errs
    th = s.unifier
    if not _sort_preserving(th):
        errs.append(f"{where}: unifier is not sort preserving")
    at, bt = apply_literal(a, th), apply_literal(b, th)
    if at.positive == bt.positive or at.pred != bt.pred or at.args != bt.args:
        errs.append(f"{where}: pivots are not complementary under the unifier")
    lits = [x for x in apply_substitution(left, th).literals if x != at]
    lits += [x for x in apply_substitution(right, th).literals if x != bt]
    expected = Clause(lits)
    if not is_variant(expected, s.clause):
        errs.append(f"{where}: resolvent {s.clause!r} differs from {expected!r}")
    return errs


def _check_factor(s: Step, known: dict[int, Clause]) -> list[str]:
    errs = []
    where = f"step {s.id}"
    parent = known[s.parents[0]]
    if not is_variant(s.left, parent):
        errs.append(f"{where}: factored clause is not its parent")
    a, b = s.pivots
    th = s.unifier
    if a not in s.left or b not in s.left or a.positive != b.positive:
        errs.append(f"{where}: bad factoring literals")
        return errs
    if not _sort_preserving(th):
        errs.append(f"{where}: unifier is not sort preserving")
    if apply_literal(a, th) != apply_literal(b, th):
        errs.append(f"{where}: factoring literals not identified by the unifier")
    if not is_variant(apply_substitution(s.left, th), s.clause):
        errs.append(f"{where}: factor {s.clause!r} is wrong")
    return errs
