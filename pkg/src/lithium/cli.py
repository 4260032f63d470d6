"""Command-line front end: ``lithium COMMAND FILE [options]``.

Reports go to stdout, diagnostics to stderr.  Exit codes: 0 for
Valid/Consistent/in Lithium/separable, 1 for Invalid/Inconsistent/not in
Lithium/missing resolvents, 2 for Unknown or an oracle disagreement, 3
for input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from typing import Sequence

from .core import PERMIT, LithiumError, Query, Status
from .derivation import explain, replay
from .engine import (
    answer,
    check_consistency,
    check_separation,
    fresh_goal_args,
    membership,
    unfold_definitions,
)
from .oracle import OracleRefused, finite_model_valid, ground_saturation_valid
from .parser import ParseError, parse_base, render
from .resolution import DEFAULT_FUEL

SCHEMA = "lithium/1"
FUEL_ENV = "LITHIUM_FUEL"

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_INPUT = 0, 1, 2, 3

_EXIT_BY_STATUS = {
    Status.VALID: EXIT_OK,
    Status.CONSISTENT: EXIT_OK,
    Status.INVALID: EXIT_NO,
    Status.INCONSISTENT: EXIT_NO,
    Status.NOT_IN_LITHIUM: EXIT_NO,
    Status.UNKNOWN: EXIT_UNKNOWN,
}

log = logging.getLogger("lithium")


class InputError(Exception):
    """Bad file, bad flag value or unknown query name (exit 3)."""


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000.0, 3)


def _fuel(args) -> int:
    if args.fuel is not None:
        if args.fuel < 0:
            raise InputError("--fuel must be non-negative")
        return args.fuel
    raw = os.environ.get(FUEL_ENV)
    if raw is None or raw == "":
        return DEFAULT_FUEL
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{FUEL_ENV}={raw!r} is not an integer") from None
    if value < 0:
        raise InputError(f"{FUEL_ENV} must be non-negative")
    return value


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror or e}") from None
    try:
        return parse_base(text)
    except ParseError as e:
        raise InputError(f"{path}:{e.line}:{e.col}: {e.message}") from None


def _pick(queries: list[Query], name: str | None) -> Query:
    if name is None:
        if len(queries) == 1:
            return queries[0]
        if not queries:
            raise InputError("the file declares no query")
        names = ", ".join(q.name for q in queries)
        raise InputError(f"several queries ({names}); choose one with --query or use --all-queries")
    for q in queries:
        if q.name == name:
            return q
    raise InputError(f"no query named {name!r}")


# ---------------------------------------------------------------------------
# Commands.  Each returns (exit code, JSON-able report, text lines).
# ---------------------------------------------------------------------------


def _oracle_check(q: Query, status: Status, fuel: int) -> tuple[dict, bool]:
    try:
        ov = finite_model_valid(q)
        out = {"method": "finite-model", "verdict": ov.status.value, "models": ov.models_checked}
        if ov.countermodel is not None:
            out["countermodel"] = ov.countermodel.table()
        ostatus = ov.status
    except OracleRefused as e:
        ostatus = ground_saturation_valid(q, fuel)
        out = {"method": "saturation", "verdict": ostatus.value, "note": str(e)}
    clash = {status, ostatus} == {Status.VALID, Status.INVALID}
    out["agrees"] = not clash
    return out, clash


def _check_one(q: Query, args, fuel: int) -> tuple[int, dict, list[str]]:
    t0 = time.perf_counter()
    v = answer(q, fallback=args.fallback, fuel=fuel)
    t_answer = _ms(t0)
    rep = v.to_dict()
    rep["query"] = q.name
    lines = [f"{q.name}: {v.status.value}" + (f" ({v.path})" if v.path and v.path != "none" else "")]
    if v.detail:
        lines.append(f"  {v.detail}")
    code = _EXIT_BY_STATUS[v.status]
    if v.witness is not None:
        rr = replay(v.witness, v.inputs)
        rep["replay"] = {"ok": rr.ok, "errors": rr.errors}
        if not rr.ok:
            log.error("witness for %s failed replay: %s", q.name, "; ".join(rr.errors))
            code = EXIT_UNKNOWN
        if args.explain:
            lines.extend("  " + ln for ln in explain(v.witness).splitlines())
    elif v.membership is not None and args.explain and not v.membership.in_lithium:
        lines.extend(f"  {x}" for x in v.membership.violations)
    timings = {"answer_ms": t_answer}
    if args.oracle:
        t1 = time.perf_counter()
        orep, clash = _oracle_check(q, v.status, fuel)
        timings["oracle_ms"] = _ms(t1)
        rep["oracle"] = orep
        lines.append(f"  oracle ({orep['method']}): {orep['verdict']}")
        if clash:
            log.error("oracle disagrees on %s: engine %s, oracle %s", q.name, v.status.value, orep["verdict"])
            code = EXIT_UNKNOWN
    rep["timings"] = timings
    return code, rep, lines


def cmd_check(args, fuel: int):
    base, queries = _load(args.file)
    if args.all_queries:
        if not queries:
            raise InputError("the file declares no query")
        results = [_check_one(q, args, fuel) for q in queries]
        code = max(r[0] for r in results)
        worst = max(results, key=lambda r: r[0])[1]["verdict"]
        report = {"verdict": worst, "results": [r[1] for r in results]}
        lines = [ln for r in results for ln in r[2]]
        return code, report, lines
    code, rep, lines = _check_one(_pick(queries, args.query), args, fuel)
    return code, rep, lines


def cmd_membership(args, fuel: int):
    base, queries = _load(args.file)
    if args.query is not None or len(queries) == 1:
        q = _pick(queries, args.query)
    elif queries:
        q = queries[0]
    else:
        q = Query(base, PERMIT, fresh_goal_args(base), "membership")
    m = membership(q)
    verdict = "InLithium" if m.in_lithium else Status.NOT_IN_LITHIUM.value
    lines = [f"{verdict} (suggested path: {m.suggested_path})"]
    lines.extend(f"  {x}" for x in m.violations)
    for lab, k in m.per_clause_k.items():
        lines.append(f"  {lab}: k={k}, bipolar={len(m.bipolar_literals(lab))}")
    report = {"verdict": verdict, "diagnosis": m.to_dict()}
    return (EXIT_OK if m.in_lithium else EXIT_NO), report, lines


def cmd_consistency(args, fuel: int):
    base, _ = _load(args.file)
    r = check_consistency(base, fallback=args.fallback, fuel=fuel)
    lines = [f"{r.status.value}: {r.reason}"]
    if args.explain:
        for w in r.witnesses:
            lines.extend("  " + ln for ln in explain(w).splitlines())
    return _EXIT_BY_STATUS[r.status], r.to_dict(), lines


def cmd_separate(args, fuel: int):
    base, _ = _load(args.file)
    s = check_separation(base)
    verdict = "Satisfied" if s.satisfied else "Missing"
    lines = [verdict]
    if s.impure_policies:
        lines.append("  impure permitting policies: " + ", ".join(s.impure_policies))
    for e in s.resolvents:
        by = f" by {e.by}" if e.by else ""
        lines.append(f"  {e.p_label} x {e.d_label}: {e.clause!r}  {e.status}{by}")
    report = {"verdict": verdict, "diagnosis": s.to_dict()}
    return (EXIT_OK if s.satisfied else EXIT_NO), report, lines


def cmd_unfold(args, fuel: int):
    base, queries = _load(args.file)
    preds = [p.strip() for p in args.preds.split(",") if p.strip()]
    if not preds:
        raise InputError("--preds needs at least one predicate name")
    new = unfold_definitions(base, preds, prune=args.prune)
    text = render(new, [q.with_base(new) for q in queries])
    report = {"verdict": "Unfolded", "base": text, "policies": len(new.policies)}
    return EXIT_OK, report, text.rstrip("\n").splitlines()


COMMANDS = {
    "check": cmd_check,
    "membership": cmd_membership,
    "consistency": cmd_consistency,
    "separate": cmd_separate,
    "unfold": cmd_unfold,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lithium", description="Decide permissions over .lith policy bases.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="a .lith policy base")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--fuel", type=int, default=None,
                       help=f"saturation fuel (default ${FUEL_ENV} or {DEFAULT_FUEL})")
        p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    p = sub.add_parser("check", help="verdict for a named query")
    common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--query", help="query name")
    g.add_argument("--all-queries", action="store_true", help="check every query in document order")
    p.add_argument("--fallback", action="store_true", help="saturate when outside Lithium")
    p.add_argument("--oracle", action="store_true", help="cross-check with a brute-force oracle")
    p.add_argument("--explain", action="store_true", help="print the derivation")

    p = sub.add_parser("membership", help="is the base in the Lithium fragment?")
    common(p)
    p.add_argument("--query", help="query name")

    p = sub.add_parser("consistency", help="is the base satisfiable?")
    common(p)
    p.add_argument("--fallback", action="store_true")
    p.add_argument("--explain", action="store_true")

    p = sub.add_parser("separate", help="can denying policies be ignored for permissions?")
    common(p)

    p = sub.add_parser("unfold", help="replace defined predicates in policy antecedents")
    common(p)
    p.add_argument("--preds", required=True, help="comma-separated predicate names")
    p.add_argument("--prune", action="store_true", help="drop definitions that can never apply")
    return ap


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code not in (0, None) else EXIT_OK
    handler = logging.StreamHandler(stderr)
    handler.setFormatter(logging.Formatter("lithium: %(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.DEBUG if args.verbose else logging.WARNING)
    t0 = time.perf_counter()
    try:
        fuel = _fuel(args)
        code, report, lines = COMMANDS[args.command](args, fuel)
    except InputError as e:
        print(f"lithium: {e}", file=stderr)
        return EXIT_INPUT
    except LithiumError as e:
        print(f"lithium: {args.file}: {e}", file=stderr)
        return EXIT_INPUT
    total = _ms(t0)
    if args.format == "json":
        out = {"schema": SCHEMA, "command": args.command}
        out.update(report)
        timings = dict(out.get("timings", {}))
        timings["total_ms"] = total
        out["timings"] = timings
        print(json.dumps(out, indent=2), file=stdout)
    else:
        for ln in lines:
            print(ln, file=stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
