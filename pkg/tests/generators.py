"""Seeded random generators of small .lith documents for property tests.

Everything is produced as source text and parsed, so a failing instance
can be printed and replayed with the CLI.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from lithium.parser import parse_base

SORT_CONSTS = {"Subjects": "s", "Actions": "a", "Obj": "o"}
VAR_NAMES = {"Subjects": ("x", "x2"), "Actions": ("y", "y2"), "Obj": ("z", "z2")}


@dataclass
class Vocab:
    consts: dict[str, list[str]]
    preds: dict[str, tuple[str, ...]]
    funcs: dict[str, tuple[tuple[str, ...], str]] = field(default_factory=dict)

    def header(self) -> str:
        lines = []
        if "Obj" in self.consts:
            lines.append("sort Obj;")
        for s, cs in self.consts.items():
            if cs:
                lines.append(f"const {', '.join(cs)} : {s};")
        for f, (args, res) in self.funcs.items():
            lines.append(f"func {f}({', '.join(args)}) : {res};")
        for p, args in self.preds.items():
            lines.append(f"pred {p}({', '.join(args)});")
        return "\n".join(lines)


def vocab(rng: random.Random, max_consts: int = 3, max_preds: int = 4, functions: bool = False) -> Vocab:
    consts = {
        "Subjects": [f"s{i}" for i in range(rng.randint(1, max_consts))],
        "Actions": [f"a{i}" for i in range(rng.randint(1, max_consts))],
    }
    arg_sorts = ["Subjects", "Actions"]
    if rng.random() < 0.4:
        consts["Obj"] = [f"o{i}" for i in range(rng.randint(1, max_consts))]
        arg_sorts.append("Obj")
    preds = {}
    for i in range(rng.randint(1, max_preds)):
        n = rng.choice((1, 1, 2))
        preds[f"P{i}"] = tuple(rng.choice(arg_sorts) for _ in range(n))
    funcs = {}
    if functions:
        funcs["f"] = (("Subjects",), "Subjects")
        if rng.random() < 0.5:
            funcs["g"] = (("Subjects",), "Actions")
    return Vocab(consts, preds, funcs)


class _Vars:
    def __init__(self):
        self.used: dict[str, str] = {}

    def pick(self, rng, sort):
        name = rng.choice(VAR_NAMES[sort])
        self.used[name] = sort
        return name

    def forall(self) -> str:
        if not self.used:
            return ""
        return "forall " + ", ".join(f"{v}: {s}" for v, s in self.used.items()) + ". "


def _term(rng, v: Vocab, sort: str, vs: _Vars | None, p_var: float = 0.5, depth: int = 0) -> str:
    if v.funcs and depth == 0 and rng.random() < 0.2:
        cands = [f for f, (_, res) in v.funcs.items() if res == sort]
        if cands:
            f = rng.choice(cands)
            args = v.funcs[f][0]
            return f"{f}({', '.join(_term(rng, v, s, vs, p_var, depth + 1) for s in args)})"
    if vs is not None and rng.random() < p_var:
        return vs.pick(rng, sort)
    return rng.choice(v.consts[sort])


def _atom(rng, v: Vocab, vs: _Vars | None, p_var: float = 0.5) -> str:
    p = rng.choice(list(v.preds))
    args = ", ".join(_term(rng, v, s, vs, p_var) for s in v.preds[p])
    return f"{p}({args})"


def _literal(rng, v: Vocab, vs: _Vars | None, p_neg: float = 0.35, p_var: float = 0.5) -> str:
    a = _atom(rng, v, vs, p_var)
    return ("!" if rng.random() < p_neg else "") + a


def _ground_eq(rng, v: Vocab, positive: bool) -> str | None:
    if v.funcs and rng.random() < 0.5:
        f = rng.choice(list(v.funcs))
        args, res = v.funcs[f]
        lhs = rng.choice(v.consts[res])
        rhs = f"{f}({', '.join(rng.choice(v.consts[a]) for a in args)})"
        return f"{lhs} {'=' if positive else '!='} {rhs}"
    sorts = [s for s, cs in v.consts.items() if len(cs) >= 2]
    if not sorts:
        return None
    s = rng.choice(sorts)
    a, b = rng.sample(v.consts[s], 2)
    return f"{a} {'=' if positive else '!='} {b}"


def _permitted(rng, v: Vocab, vs: _Vars | None, p_var=0.6) -> str:
    return f"{_term(rng, v, 'Subjects', vs, p_var)}, {_term(rng, v, 'Actions', vs, p_var)}"


@dataclass
class Options:
    max_consts: int = 3
    max_preds: int = 4
    max_policies: int = 4
    max_env: int = 6
    max_rules: int = 2
    equality: bool = True
    functions: bool = False
    permitted_in_antecedent: float = 0.15
    deny: float = 0.35
    rules: bool = True
    eq_rate: float = 0.15


def query_text(rng: random.Random, opt: Options | None = None) -> str:
    opt = opt or Options()
    v = vocab(rng, opt.max_consts, opt.max_preds, opt.functions)
    out = [v.header()]
    for _ in range(rng.randint(0, opt.max_env)):
        if opt.equality and rng.random() < opt.eq_rate:
            eq = _ground_eq(rng, v, rng.random() < 0.6)
            if eq:
                out.append(f"env {eq};")
                continue
        out.append(f"env {_literal(rng, v, None)};")
    if opt.rules:
        for i in range(rng.randint(0, opt.max_rules)):
            vs = _Vars()
            body = [_literal(rng, v, vs) for _ in range(rng.randint(1, 2))]
            if opt.equality and rng.random() < 0.15:
                s = rng.choice(["Subjects"])
                body.append(f"{vs.pick(rng, s)} = {_term(rng, v, s, None)}")
            head = _literal(rng, v, vs)
            out.append(f"env e{i}: {vs.forall()}{' & '.join(body)} => {head};")
    for i in range(rng.randint(1, opt.max_policies)):
        vs = _Vars()
        ante = [_literal(rng, v, vs) for _ in range(rng.randint(0, 2))]
        if rng.random() < opt.permitted_in_antecedent:
            ante.append(("!" if rng.random() < 0.3 else "") + f"Permitted({_permitted(rng, v, vs)})")
        sign = "deny" if rng.random() < opt.deny else "permit"
        concl = f"{sign}({_permitted(rng, v, vs)})"
        body = " & ".join(ante) + " => " if ante else ""
        out.append(f"policy p{i}: {vs.forall()}{body}{concl};")
    gsign = "deny" if rng.random() < opt.deny else "permit"
    out.append(f"query q: {gsign}({_permitted(rng, v, None, 0.0)});")
    return "\n".join(out) + "\n"


def random_query(rng: random.Random, opt: Options | None = None):
    text = query_text(rng, opt)
    base, queries = parse_base(text)
    return text, queries[0]


def simple_policies_text(rng: random.Random, n_p: int, n_d: int, v: Vocab, x_only: bool = True) -> list[str]:
    """Simple policies (no Permitted in antecedents) with subject variable x."""
    out = []
    for i in range(n_p + n_d):
        vs = _Vars()
        vs.used["x"] = "Subjects"
        unary = [p for p, a in v.preds.items() if a == ("Subjects",)]
        ante = []
        for _ in range(rng.randint(0, 2)):
            if unary and rng.random() < 0.7:
                ante.append(("!" if rng.random() < 0.4 else "") + f"{rng.choice(unary)}(x)")
            else:
                ante.append(_literal(rng, v, vs, p_var=0.3))
        sign = "permit" if i < n_p else "deny"
        act = rng.choice(v.consts["Actions"])
        body = " & ".join(ante) + " => " if ante else ""
        out.append(f"policy p{i}: {vs.forall()}{body}{sign}(x, {act});")
    return out


def random_clause_set(rng: random.Random, max_clauses: int = 5, functions: bool = True):
    """Universal clauses over Q/1, R/2 and Permitted, possibly with one function."""
    from lithium.core import App, Clause, Literal, Var

    subj = [App("s0", (), "Subjects"), App("s1", (), "Subjects")]
    acts = [App("a0", (), "Actions"), App("a1", (), "Actions")]

    def term(sort, vs, depth=0):
        r = rng.random()
        if functions and depth == 0 and sort == "Subjects" and r < 0.2:
            return App("f", (term("Subjects", vs, 1),), "Subjects")
        if r < 0.6:
            name = rng.choice(vs[sort])
            return Var(name, sort)
        return rng.choice(subj if sort == "Subjects" else acts)

    out = []
    for _ in range(rng.randint(2, max_clauses)):
        vs = {"Subjects": ["x", "x2", "x3"][: rng.randint(1, 3)], "Actions": ["y", "y2"][: rng.randint(1, 2)]}
        lits = []
        for _ in range(rng.randint(1, 3)):
            kind = rng.random()
            pos = rng.random() < 0.5
            if kind < 0.4:
                lits.append(Literal(pos, "Permitted", (term("Subjects", vs), term("Actions", vs))))
            elif kind < 0.7:
                lits.append(Literal(pos, "Q", (term("Subjects", vs),)))
            else:
                lits.append(Literal(pos, "R", (term("Subjects", vs), term("Actions", vs))))
        c = Clause(lits)
        if not c.is_tautology():
            out.append(c)
    return out
