"""Constraint Handling Rules with justifications and logical retraction."""

from .engine import DEFAULT_STEP_LIMIT, StepLimitExceeded, Trace, TraceEvent, check_guard, match_head, run, step
from .parser import ParseError, parse_constraint, parse_program, parse_query, parse_store
from .printer import format_program, format_rule, format_store
from .retraction import kill, killc, settle
from .terms import (
    Atom,
    Compound,
    Constraint,
    Int,
    JustifiedConstraint,
    Program,
    RemEntry,
    Rule,
    Store,
    Var,
    fresh_justification,
    union_just,
)
from .transform import JProgram, JRule, annotate_query, translate_program, translate_rule

__version__ = "0.1.0"
