"""Exact symbolic engine for the position / inverse-radius / momentum algebra."""

from .coeff import Gaussian, ScalarCoeff
from .expr import (
    OpMonomial,
    OperatorExpr,
    adjoint,
    commutator,
    is_zero,
    linear_combine,
    mul,
    reduce_commutative,
    relabel_axes,
    to_text,
)
from .parser import DSLError, DSLSyntaxError, UnknownIdentifierError, parse_expr

HBAR = OperatorExpr.constant(ScalarCoeff(1, (1, 0, 0)))
MU = OperatorExpr.constant(ScalarCoeff(1, (0, 1, 0)))
KAPPA = OperatorExpr.constant(ScalarCoeff(1, (0, 0, 1)))
I = OperatorExpr.constant(Gaussian(0, 1))

X = tuple(OperatorExpr.atom(f"X{k}") for k in (1, 2, 3))
P = tuple(OperatorExpr.atom(f"P{k}") for k in (1, 2, 3))
S = OperatorExpr.atom("S")

__all__ = [
    "Gaussian", "ScalarCoeff", "OpMonomial", "OperatorExpr",
    "adjoint", "commutator", "is_zero", "linear_combine", "mul",
    "reduce_commutative", "relabel_axes", "to_text",
    "parse_expr", "DSLError", "DSLSyntaxError", "UnknownIdentifierError",
    "HBAR", "MU", "KAPPA", "I", "X", "P", "S",
]
