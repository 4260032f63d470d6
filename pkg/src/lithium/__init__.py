"""Lithium: deciding permissions over first-order policy bases.

A policy base is a ground environment ``E0``, universal environment
rules ``E1`` and permitting or denying policies.  The engine answers
whether the base entails ``Permitted(t, t')`` (or its negation), checks
consistency, tests whether denying policies can be separated from
permitting ones, and unfolds environment definitions.

Typical use::

    from lithium import parse_base, answer
    base, queries = parse_base(open("library.lith").read())
    verdict = answer(queries[0])
    print(verdict.status, verdict.witness)
"""

from .core import (
    DENY,
    PERMIT,
    Clause,
    Literal,
    LithiumError,
    Policy,
    PolicyBase,
    Query,
    Signature,
    Status,
)
from .derivation import Derivation, explain, replay
from .engine import (
    ConsistencyResult,
    MembershipReport,
    NotADefinition,
    SeparationReport,
    Verdict,
    answer,
    check_consistency,
    check_separation,
    membership,
    unfold_definitions,
)
from .equality import equality_safe, to_equation_free
from .oracle import finite_model_valid, ground_saturation_valid
from .parser import ParseError, parse_base, parse_query, render

__version__ = "0.1.0"

__all__ = [
    "DENY",
    "PERMIT",
    "Clause",
    "ConsistencyResult",
    "Derivation",
    "Literal",
    "LithiumError",
    "MembershipReport",
    "NotADefinition",
    "ParseError",
    "Policy",
    "PolicyBase",
    "Query",
    "SeparationReport",
    "Signature",
    "Status",
    "Verdict",
    "answer",
    "check_consistency",
    "check_separation",
    "equality_safe",
    "explain",
    "finite_model_valid",
    "ground_saturation_valid",
    "membership",
    "parse_base",
    "parse_query",
    "render",
    "replay",
    "to_equation_free",
    "unfold_definitions",
]
