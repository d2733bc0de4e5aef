"""Real-slice analyzer for complex transcendental functions.

Computes the locus {z = x + iy : Im f(z) = 0} of a real-coefficient
expression f, emits the 3D curves (x, y, Re f), and solves f(z) = w on
that locus, exposing the non-real roots classical graphs hide.
"""

from .catalog import BranchSpec, branch_value, enumerate_branches
from .expr import (
    EvalDomainError,
    EvalOverflowError,
    Expr,
    ParseError,
    differentiate,
    evaluate,
    parse,
    to_text,
)
from .export import read_document, write_csv, write_document, write_polylines
from .roots import Root, newton_verify, solve_level
from .slicer import (
    Branch,
    GridSpec,
    RefineResult,
    SliceSet,
    Window,
    extract_slice,
    refine_point,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "BranchSpec",
    "EvalDomainError",
    "EvalOverflowError",
    "Expr",
    "GridSpec",
    "ParseError",
    "RefineResult",
    "Root",
    "SliceSet",
    "Window",
    "branch_value",
    "differentiate",
    "enumerate_branches",
    "evaluate",
    "extract_slice",
    "newton_verify",
    "parse",
    "read_document",
    "refine_point",
    "solve_level",
    "to_text",
    "write_csv",
    "write_document",
    "write_polylines",
]
