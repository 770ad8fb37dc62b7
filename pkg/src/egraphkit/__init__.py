"""Term rewriting and equality saturation over dynamically shaped terms."""

from .egraph import CapacityExceeded, EGraph, InvalidId, InvariantViolation
from .ematch import compile_ematcher, ematch_all
from .evaluate import EvalError
from .extract import COST_FUNCTIONS, NoFiniteTerm, astsize, extract
from .matcher import (
    Chain,
    Fixpoint,
    FixpointDiverged,
    NotCallable,
    Postwalk,
    Prewalk,
    apply_rule,
    compile_pattern,
    instantiate,
)
from .pattern import (
    GuardConflict,
    Rule,
    RuleKind,
    Theory,
    UnboundVariable,
    UserPredicate,
    make_rule,
    parse_pattern,
    parse_rule,
    parse_theory,
    pattern_vars,
)
from .saturation import Report, SaturationParams, StopReason, prove_equal, saturate
from .simplify import simplify
from .term import (
    Call,
    Expr,
    Kind,
    Literal,
    ParseError,
    Symbol,
    make_term,
    parse_sexpr,
    print_sexpr,
)
from .theories import load_theory

__version__ = "0.1.0"
