"""Reader and writer for the ``.lith`` policy-base format.

The grammar is documented in the README.  A document is a sequence of
``;``-terminated statements; ``#`` starts a comment that runs to the end
of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import (
    DENY,
    EQ,
    PERMIT,
    PERMITTED,
    App,
    Clause,
    EnvRule,
    Literal,
    LithiumError,
    Policy,
    PolicyBase,
    Query,
    Signature,
    SortError,
    Symbol,
    Var,
    term_vars,
)

KEYWORDS = frozenset(
    "sort const func pred env policy query forall exists permit deny true".split()
)


class ParseError(LithiumError):
    """An input error with a 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class LithSyntaxError(ParseError):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        if expected:
            message = f"{message}; expected {' or '.join(expected)}"
        super().__init__(message, line, col)
        self.expected = expected


class LithSortError(ParseError, SortError):
    pass


class ShapeError(ParseError):
    """The formula is well formed but outside the supported standard shapes."""


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>=>|!=|[(),;:.&!=|])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # "name" | "op" | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise LithSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind in ("name", "op"):
            out.append(Token(kind, tok, line, pos - line_start + 1))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# ---------------------------------------------------------------------------
# Raw syntax trees (names not yet resolved)
# ---------------------------------------------------------------------------


@dataclass
class RTerm:
    name: str
    args: list["RTerm"] | None  # None: bare name, no parentheses
    line: int
    col: int


@dataclass
class RLit:
    positive: bool
    kind: str  # "atom" | "eq"
    atom: RTerm | None = None
    lhs: RTerm | None = None
    rhs: RTerm | None = None
    line: int = 0
    col: int = 0


@dataclass
class VarDecl:
    name: str
    sort: str | None
    line: int
    col: int


@dataclass
class _Scope:
    """Variables bound by one ``forall`` with their (possibly inferred) sorts."""

    decls: dict[str, VarDecl] = field(default_factory=dict)
    sorts: dict[str, str | None] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.sig = Signature()
        self.permitted_used = False
        self.e0: list[Literal] = []
        self.e1: list[EnvRule] = []
        self.policies: list[Policy] = []
        self.queries: list[tuple[str, str, tuple]] = []
        self.labels: set[str] = set()
        self.query_names: set[str] = set()
        self.rule_counter = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"unexpected {self.describe(self.tok)}", (repr(text),))
        return self.advance()

    def expect_name(self, what: str = "name") -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.fail(f"unexpected {self.describe(t)}", (what,))
        return self.advance()

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def fail(self, msg: str, expected: tuple[str, ...] = (), tok: Token | None = None):
        t = tok or self.tok
        raise LithSyntaxError(msg, t.line, t.col, expected)

    def shape(self, msg: str, tok: Token | None = None):
        t = tok or self.tok
        raise ShapeError(msg, t.line, t.col)

    def sort_err(self, msg: str, line: int, col: int):
        raise LithSortError(msg, line, col)

    # -- document ----------------------------------------------------------

    def parse(self) -> tuple[PolicyBase, list[Query]]:
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "name":
                self.fail(f"unexpected {self.describe(t)}", ("a statement keyword",))
            handler = {
                "sort": self.p_sort,
                "const": self.p_const,
                "func": self.p_func,
                "pred": self.p_pred,
                "env": self.p_env,
                "policy": self.p_policy,
                "query": self.p_query,
            }.get(t.text)
            if handler is None:
                if t.text == "exists":
                    self.shape("existential quantifiers are not supported")
                self.fail(
                    f"unexpected {self.describe(t)}",
                    ("'sort'", "'const'", "'func'", "'pred'", "'env'", "'policy'", "'query'"),
                )
            self.advance()
            handler(t)
            self.expect(";")
        self.sig.freeze()
        base = PolicyBase(self.sig, tuple(self.e0), tuple(self.e1), tuple(self.policies))
        queries = [Query(base, sign, args, name) for name, sign, args in self.queries]
        return base, queries

    # -- declarations ------------------------------------------------------

    def _declared_sort(self, tok: Token) -> str:
        if tok.text not in self.sig.sorts:
            self.sort_err(f"unknown sort {tok.text!r}", tok.line, tok.col)
        return tok.text

    def _new_symbol(self, tok: Token, sym: Symbol) -> None:
        if tok.text in self.sig.symbols or tok.text in self.sig.sorts:
            self.sort_err(f"{tok.text!r} is already declared", tok.line, tok.col)
        self.sig.declare(sym)

    def p_sort(self, _kw: Token) -> None:
        while True:
            t = self.expect_name("a sort name")
            if t.text in self.sig.sorts or t.text in self.sig.symbols:
                self.sort_err(f"{t.text!r} is already declared", t.line, t.col)
            self.sig.add_sort(t.text)
            if not self.at(","):
                break
            self.advance()

    def p_const(self, _kw: Token) -> None:
        names = [self.expect_name("a constant name")]
        while self.at(","):
            self.advance()
            names.append(self.expect_name("a constant name"))
        self.expect(":")
        sort = self._declared_sort(self.expect_name("a sort name"))
        for t in names:
            self._new_symbol(t, Symbol(t.text, "constant", (), sort))

    def _sort_list(self) -> tuple[str, ...]:
        sorts: list[str] = []
        if self.at("("):
            self.advance()
            if not self.at(")"):
                sorts.append(self._declared_sort(self.expect_name("a sort name")))
                while self.at(","):
                    self.advance()
                    sorts.append(self._declared_sort(self.expect_name("a sort name")))
            self.expect(")")
        return tuple(sorts)

    def p_func(self, _kw: Token) -> None:
        name = self.expect_name("a function name")
        if not self.at("("):
            self.fail(f"unexpected {self.describe(self.tok)}", ("'('",))
        args = self._sort_list()
        self.expect(":")
        result = self._declared_sort(self.expect_name("a sort name"))
        kind = "function" if args else "constant"
        self._new_symbol(name, Symbol(name.text, kind, args, result))

    def p_pred(self, _kw: Token) -> None:
        self._one_pred()
        while self.at(","):
            self.advance()
            self._one_pred()

    def _one_pred(self) -> None:
        name = self.expect_name("a predicate name")
        args = self._sort_list()
        if name.text == PERMITTED:
            if self.permitted_used:
                self.sort_err("Permitted must be configured before its first use", name.line, name.col)
            if len(args) < 2 or args[:2] != ("Subjects", "Actions"):
                self.sort_err(
                    "Permitted must take (Subjects, Actions, ...) arguments", name.line, name.col
                )
            self.sig.set_permitted(args)
            return
        self._new_symbol(name, Symbol(name.text, "predicate", args))

    # -- formulas ----------------------------------------------------------

    def p_label(self) -> Token | None:
        """An optional ``NAME :`` prefix."""
        if self.tok.kind == "name" and self.tok.text not in KEYWORDS and self.peek().text == ":":
            t = self.advance()
            self.advance()
            return t
        return None

    def _claim_label(self, t: Token) -> str:
        if t.text in self.labels:
            self.sort_err(f"duplicate label {t.text!r}", t.line, t.col)
        self.labels.add(t.text)
        return t.text

    def p_forall(self) -> _Scope | None:
        if not self.at("forall"):
            return None
        self.advance()
        scope = _Scope()
        while True:
            t = self.expect_name("a variable name")
            if t.text in self.sig.symbols:
                self.sort_err(f"variable {t.text!r} shadows a declared symbol", t.line, t.col)
            if t.text in scope.decls:
                self.sort_err(f"variable {t.text!r} bound twice", t.line, t.col)
            sort = None
            if self.at(":"):
                self.advance()
                sort = self._declared_sort(self.expect_name("a sort name"))
            scope.decls[t.text] = VarDecl(t.text, sort, t.line, t.col)
            scope.sorts[t.text] = sort
            if not self.at(","):
                break
            self.advance()
        self.expect(".")
        return scope

    def p_term(self) -> RTerm:
        if self.at("("):
            self.shape("parenthesised formulas are not supported; antecedents are conjunctions of literals")
        t = self.expect_name("a term")
        args = None
        if self.at("("):
            self.advance()
            args = []
            if not self.at(")"):
                args.append(self.p_term())
                while self.at(","):
                    self.advance()
                    args.append(self.p_term())
            self.expect(")")
        return RTerm(t.text, args, t.line, t.col)

    def p_literal(self) -> RLit:
        start = self.tok
        if self.at("exists"):
            self.shape("existential quantifiers are not supported")
        if self.at("forall"):
            self.shape("nested quantifiers are not supported")
        positive = True
        if self.at("!"):
            self.advance()
            positive = False
            if self.at("!") or self.at("("):
                self.shape("negation applies to a single atom")
        if self.tok.kind == "name" and self.tok.text in ("permit", "deny"):
            self.shape(f"{self.tok.text}(...) may only appear as a policy conclusion")
        lhs = self.p_term()
        if self.at("=") or self.at("!="):
            op = self.advance()
            if not positive:
                self.shape("write t != u instead of negating an equation", start)
            rhs = self.p_term()
            return RLit(op.text == "=", "eq", lhs=lhs, rhs=rhs, line=start.line, col=start.col)
        return RLit(positive, "atom", atom=lhs, line=start.line, col=start.col)

    def p_conj(self) -> list[RLit]:
        if self.at("true"):
            self.advance()
            lits: list[RLit] = []
        else:
            lits = [self.p_literal()]
        while self.at("&"):
            self.advance()
            lits.append(self.p_literal())
        self._no_disjunction()
        return lits

    def _no_disjunction(self) -> None:
        if self.at("|") or (self.tok.kind == "name" and self.tok.text == "or"):
            self.shape("disjunction is not supported; split the statement")

    # -- statements --------------------------------------------------------

    def p_env(self, kw: Token) -> None:
        label_tok = self.p_label()
        if label_tok is None and self.at("fact") and (
            self.peek().kind == "name" or self.peek().text == "!"
        ):
            self.advance()
        scope = self.p_forall()
        body = self.p_conj()
        head = None
        if self.at("=>"):
            self.advance()
            head = self.p_literal()
            self._no_disjunction()
        is_rule = scope is not None or head is not None
        if not is_rule and len(body) != 1:
            self.shape("a fact is a single literal; use 'true => ...' or '&' in a rule", kw)
        scope = scope or _Scope()
        lits = body + ([head] if head else [])
        for rl in lits:
            if rl.kind == "atom" and rl.atom.name == PERMITTED:
                self.shape("the environment must not mention Permitted", _tok_at(rl))
        self._infer(scope, lits)
        built = [self._literal(scope, rl) for rl in lits]
        if not is_rule:
            if label_tok is not None:
                self.shape("labels are only allowed on rules", label_tok)
            self.e0.append(built[0])
            return
        if head is None:
            clause = Clause([built[-1]]) if len(built) == 1 else None
            if clause is None:
                self.fail(f"unexpected {self.describe(self.tok)}", ("'=>'",))
        else:
            clause = Clause([l.negate() for l in built[:-1]] + [built[-1]])
        self.rule_counter += 1
        if label_tok is not None:
            label = self._claim_label(label_tok)
        else:
            label = f"e{self.rule_counter}"
            while label in self.labels:
                label += "'"
            self.labels.add(label)
        self.e1.append(EnvRule(label, clause))

    def p_policy(self, kw: Token) -> None:
        name = self.expect_name("a policy name")
        self.expect(":")
        label = self._claim_label(name)
        scope = self.p_forall() or _Scope()
        body: list[RLit] = []
        if not (self.at("permit") or self.at("deny")):
            body = self.p_conj()
            if not self.at("=>"):
                self.fail(f"unexpected {self.describe(self.tok)}", ("'=>'", "'&'"))
            self.advance()
        if not (self.at("permit") or self.at("deny")):
            if self.tok.kind == "name" and self.tok.text == PERMITTED:
                self.shape("policy conclusions are written permit(...) or deny(...)")
            self.fail(f"unexpected {self.describe(self.tok)}", ("'permit'", "'deny'"))
        sign_tok = self.advance()
        goal = self._goal_args()
        self._no_disjunction()
        self.permitted_used = True
        concl = RLit(True, "atom", atom=RTerm(PERMITTED, goal, sign_tok.line, sign_tok.col))
        self._infer(scope, body + [concl])
        ante = tuple(self._literal(scope, rl) for rl in body)
        args = self._literal(scope, concl).args
        sign = PERMIT if sign_tok.text == "permit" else DENY
        self.policies.append(Policy(label, ante, sign, args))

    def _goal_args(self) -> list[RTerm]:
        self.expect("(")
        args = [self.p_term()]
        while self.at(","):
            self.advance()
            args.append(self.p_term())
        self.expect(")")
        return args

    def p_query(self, kw: Token) -> None:
        name = self.expect_name("a query name")
        self.expect(":")
        if name.text in self.query_names:
            self.sort_err(f"duplicate query name {name.text!r}", name.line, name.col)
        self.query_names.add(name.text)
        if self.at("forall"):
            self.shape("query goals must be closed terms")
        if not (self.at("permit") or self.at("deny")):
            self.fail(f"unexpected {self.describe(self.tok)}", ("'permit'", "'deny'"))
        sign_tok = self.advance()
        goal = self._goal_args()
        self.permitted_used = True
        scope = _Scope()
        concl = RLit(True, "atom", atom=RTerm(PERMITTED, goal, sign_tok.line, sign_tok.col))
        self._infer(scope, [concl])
        args = self._literal(scope, concl).args
        self.queries.append((name.text, PERMIT if sign_tok.text == "permit" else DENY, args))

    # -- sort inference and construction ------------------------------------

    def _symbol_for(self, rt: RTerm, want: str) -> Symbol:
        sym = self.sig.get(rt.name)
        if sym is None:
            self.sort_err(f"undeclared {want} {rt.name!r}", rt.line, rt.col)
        return sym

    def _infer(self, scope: _Scope, lits: list[RLit]) -> None:
        """Fix the sort of every bound variable from its argument positions."""

        def visit(rt: RTerm, expected: str | None) -> str | None:
            if rt.name in scope.decls:
                if rt.args is not None:
                    self.sort_err(f"variable {rt.name!r} applied to arguments", rt.line, rt.col)
                cur = scope.sorts[rt.name]
                if expected is not None:
                    if cur is None:
                        scope.sorts[rt.name] = expected
                    elif cur != expected:
                        self.sort_err(
                            f"variable {rt.name!r} used with sort {expected} but has sort {cur}",
                            rt.line,
                            rt.col,
                        )
                return scope.sorts[rt.name]
            sym = self._symbol_for(rt, "symbol")
            if sym.kind == "predicate":
                self.sort_err(f"predicate {rt.name!r} used as a term", rt.line, rt.col)
            args = rt.args or []
            if len(args) != sym.arity:
                self.sort_err(
                    f"{rt.name!r} expects {sym.arity} argument(s), got {len(args)}", rt.line, rt.col
                )
            for a, s in zip(args, sym.arg_sorts):
                visit(a, s)
            if expected is not None and sym.result_sort != expected:
                self.sort_err(
                    f"{rt.name!r} has sort {sym.result_sort}, expected {expected}", rt.line, rt.col
                )
            return sym.result_sort

        for _ in range(len(scope.decls) + 1):
            for rl in lits:
                if rl.kind == "atom":
                    at = rl.atom
                    sym = self._symbol_for(at, "predicate")
                    if sym.kind != "predicate":
                        self.sort_err(f"{at.name!r} is not a predicate", at.line, at.col)
                    args = at.args or []
                    if len(args) != sym.arity:
                        self.sort_err(
                            f"{at.name!r} expects {sym.arity} argument(s), got {len(args)}",
                            at.line,
                            at.col,
                        )
                    for a, s in zip(args, sym.arg_sorts):
                        visit(a, s)
                else:
                    ls = visit(rl.lhs, None)
                    rs = visit(rl.rhs, ls)
                    if ls is None and rs is not None:
                        visit(rl.lhs, rs)
        for name, sort in scope.sorts.items():
            if sort is None:
                d = scope.decls[name]
                self.sort_err(f"cannot infer the sort of {name!r}; annotate it", d.line, d.col)

    def _term(self, scope: _Scope, rt: RTerm):
        if rt.name in scope.decls:
            return Var(rt.name, scope.sorts[rt.name])
        sym = self.sig.get(rt.name)
        return App(rt.name, tuple(self._term(scope, a) for a in rt.args or ()), sym.result_sort)

    def _literal(self, scope: _Scope, rl: RLit) -> Literal:
        if rl.kind == "eq":
            lhs, rhs = self._term(scope, rl.lhs), self._term(scope, rl.rhs)
            if lhs.sort != rhs.sort:
                self.sort_err(f"equation between sorts {lhs.sort} and {rhs.sort}", rl.line, rl.col)
            return Literal(rl.positive, EQ, (lhs, rhs))
        at = rl.atom
        return Literal(rl.positive, at.name, tuple(self._term(scope, a) for a in at.args or ()))


def _tok_at(rl: RLit) -> Token:
    return Token("name", "", rl.line, rl.col)


def parse_base(text: str) -> tuple[PolicyBase, list[Query]]:
    """Parse a ``.lith`` document into a policy base and its named queries."""
    return _Parser(text).parse()


def parse_query(text: str, name: str | None = None) -> Query:
    """Convenience: parse a document and return one query (the first by default)."""
    _, queries = parse_base(text)
    if not queries:
        raise LithiumError("document declares no query")
    if name is None:
        return queries[0]
    for q in queries:
        if q.name == name:
            return q
    raise LithiumError(f"no query named {name!r}")


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


def _render_term(t, names: dict) -> str:
    if t.is_var:
        return names.get(t, t.name)
    if not t.args:
        return t.fn
    return f"{t.fn}({', '.join(_render_term(a, names) for a in t.args)})"


def _render_literal(l: Literal, names: dict) -> str:
    args = [_render_term(a, names) for a in l.args]
    if l.pred == EQ:
        return f"{args[0]} {'=' if l.positive else '!='} {args[1]}"
    atom = l.pred + (f"({', '.join(args)})" if args else "")
    return atom if l.positive else "!" + atom


def _var_names(vs, sig: Signature) -> dict:
    """Printable, collision-free names for a clause's variables."""
    names: dict = {}
    used: set[str] = set()
    for v in vs:
        base = v.name if _IDENT.match(v.name) and v.name not in KEYWORDS else "v"
        name = base
        i = 1
        while name in used or name in sig.symbols or name in sig.sorts or name in KEYWORDS:
            name = f"{base}_{i}"
            i += 1
        used.add(name)
        names[v] = name
    return names


def _forall(names: dict) -> str:
    if not names:
        return ""
    return "forall " + ", ".join(f"{n}: {v.sort}" for v, n in names.items()) + " . "


def render(base: PolicyBase, queries=()) -> str:
    """Write ``base`` (and optionally queries) back to ``.lith`` text."""
    sig = base.signature
    out: list[str] = []
    user_sorts = [s for s in sig.sorts if s not in ("Subjects", "Actions", "Times")]
    if user_sorts:
        out.append(f"sort {', '.join(user_sorts)};")
    for sym in sig.symbols.values():
        if sym.name == "now":
            continue
        if sym.kind == "constant":
            out.append(f"const {sym.name} : {sym.result_sort};")
        elif sym.kind == "function":
            out.append(f"func {sym.name}({', '.join(sym.arg_sorts)}) : {sym.result_sort};")
        elif sym.name == PERMITTED:
            if sym.arg_sorts != ("Subjects", "Actions"):
                out.append(f"pred {PERMITTED}({', '.join(sym.arg_sorts)});")
        else:
            args = f"({', '.join(sym.arg_sorts)})" if sym.arg_sorts else ""
            out.append(f"pred {sym.name}{args};")
    for l in base.e0:
        out.append(f"env {_render_literal(l, {})};")
    for r in base.e1:
        lits = r.clause.literals
        names = _var_names(r.clause.vars(), sig)
        if not lits:
            raise LithiumError(f"cannot render the empty clause {r.label}")
        body = " & ".join(_render_literal(l.negate(), names) for l in lits[:-1]) or "true"
        out.append(
            f"env {r.label}: {_forall(names)}{body} => {_render_literal(lits[-1], names)};"
        )
    for p in base.policies:
        vs: dict = {}
        for l in p.antecedent:
            for a in l.args:
                term_vars(a, vs)
        for a in p.args:
            term_vars(a, vs)
        names = _var_names(vs, sig)
        body = " & ".join(_render_literal(l, names) for l in p.antecedent)
        goal = ", ".join(_render_term(a, names) for a in p.args)
        arrow = f"{body} => " if body else ""
        out.append(f"policy {p.label}: {_forall(names)}{arrow}{p.sign}({goal});")
    for q in queries:
        goal = ", ".join(_render_term(a, {}) for a in q.args)
        out.append(f"query {q.name}: {q.sign}({goal});")
    return "\n".join(out) + ("\n" if out else "")


__all__ = [
    "ParseError",
    "LithSyntaxError",
    "LithSortError",
    "ShapeError",
    "parse_base",
    "parse_query",
    "render",
    "tokenize",
]
