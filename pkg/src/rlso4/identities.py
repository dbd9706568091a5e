"""Hydrogen operators (H0, L, M, T) and the exact identity suite.

All checks are exact: an identity passes iff its left-minus-right residual
is the canonical zero expression.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .symcore import (
    HBAR, KAPPA, I, P, S, X,
    Gaussian, OperatorExpr, ScalarCoeff, adjoint, commutator, mul,
)

__all__ = [
    "NamedOperator", "IdentityReport", "IdentityBudgetExceeded",
    "OPERATOR_NAMES", "IDENTITY_IDS",
    "build_operator", "operator_table", "verify_identity", "verify_suite",
    "solve_T_ansatz", "bb_residual", "format_reports", "reports_to_json",
]

# epsilon_{kij}: for each k the (i, j) pairs with sign +1
_EPS_POS = {0: (1, 2), 1: (2, 0), 2: (0, 1)}

INV_MU = ScalarCoeff(1, (0, -1, 0))
I_HBAR = ScalarCoeff(Gaussian(0, 1), (1, 0, 0))
INV_I_HBAR = I_HBAR.inverse()          # 1/(i hbar) = -i/hbar

OPERATOR_NAMES = (
    ("H0",)
    + tuple(f"L{k}" for k in (1, 2, 3))
    + tuple(f"M{k}" for k in (1, 2, 3))
    + tuple(f"T{k}" for k in (1, 2, 3))
    + tuple(f"PL{k}" for k in (1, 2, 3))
    + tuple(f"MPL{k}" for k in (1, 2, 3))
)


def _cross(a, b, k: int) -> OperatorExpr:
    """k-th component of ``a ^ b`` with factor order kept (a left of b)."""
    i, j = _EPS_POS[k]
    return mul(a[i], b[j]) - mul(a[j], b[i])


def _dot(a, b) -> OperatorExpr:
    return mul(a[0], b[0]) + mul(a[1], b[1]) + mul(a[2], b[2])


def _build(name: str, ops: Mapping[str, OperatorExpr]) -> OperatorExpr:
    if name == "H0":
        return _dot(P, P).scale(ScalarCoeff(Fraction(1, 2), (0, -1, 0))) - mul(KAPPA, S)
    kind, idx = name[:-1], name[-1:]
    if idx not in ("1", "2", "3"):
        raise KeyError(name)
    k = int(idx) - 1
    L = [ops[f"L{j}"] for j in (1, 2, 3)] if kind != "L" else None
    if kind == "L":
        return _cross(X, P, k)
    if kind == "PL":
        return _cross(P, L, k)
    if kind == "M":
        sym = _cross(P, L, k) - _cross(L, P, k)
        return sym.scale(ScalarCoeff(Fraction(1, 2), (0, -1, 0))) - mul(KAPPA, mul(X[k], S))
    if kind == "MPL":
        # non-hermitian variant with P^L alone
        return ops[f"PL{idx}"].scale(INV_MU) - mul(KAPPA, mul(X[k], S))
    if kind == "T":
        xp = _dot(X, P)
        xx = _dot(X, X)
        return (mul(X[k], xp).scale(Fraction(1, 2)) - mul(xx, P[k])
                + mul(I, mul(HBAR, X[k])))
    raise KeyError(name)


@dataclass(frozen=True)
class NamedOperator:
    name: str
    expr: OperatorExpr


def _table(overrides: tuple) -> dict:
    ops: dict = dict(overrides)
    for name in OPERATOR_NAMES:
        if name not in ops:
            ops[name] = _build(name, ops)
    return ops


@lru_cache(maxsize=1)
def _default_table() -> dict:
    return _table(())


def operator_table(overrides: Mapping[str, OperatorExpr] | None = None) -> dict:
    """Map of all named operators.

    ``overrides`` replaces individual definitions (used for negative
    controls); operators built from an overridden one, e.g. ``M_k`` from
    ``L``, are rebuilt from the override.
    """
    if not overrides:
        return dict(_default_table())
    unknown = set(overrides) - set(OPERATOR_NAMES)
    if unknown:
        raise KeyError(f"unknown operator(s): {sorted(unknown)}")
    return _table(tuple(sorted(overrides.items())))


def build_operator(name: str) -> NamedOperator:
    if name not in OPERATOR_NAMES:
        raise KeyError(f"unknown operator {name!r}")
    return NamedOperator(name, _default_table()[name])


# --- identity suite --------------------------------------------------------

@dataclass
class IdentityReport:
    id: str
    components: dict[str, OperatorExpr]
    elapsed: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = all(r.is_zero() for r in self.components.values())

    @property
    def residual(self) -> OperatorExpr:
        """First nonzero component residual, or zero."""
        for r in self.components.values():
            if not r.is_zero():
                return r
        return OperatorExpr.zero()

    @property
    def n_residual_terms(self) -> int:
        return sum(len(r) for r in self.components.values())

    def line(self) -> str:
        return (f"{self.id} {'PASS' if self.passed else 'FAIL'} "
                f"{self.n_residual_terms} {round(self.elapsed * 1000)}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "passed": self.passed,
            "n_residual_terms": self.n_residual_terms,
            "millis": round(self.elapsed * 1000),
            "residuals": {k: str(v) for k, v in self.components.items() if not v.is_zero()},
        }


def _pairs():
    return [(0, 1), (0, 2), (1, 2)]


def _eps_third(i: int, j: int) -> tuple[int, int]:
    """(k, sign) with eps_{ijk} = sign."""
    k = 3 - i - j
    return k, (1 if (i, j) == _EPS_POS[k] else -1)


def _check_conserve(ops, name):
    H0 = ops["H0"]
    return {f"[H0,{name}{k}]": commutator(H0, ops[f"{name}{k}"]) for k in (1, 2, 3)}


def _check_herm(ops, name):
    return {f"{name}{k}^+ - {name}{k}": adjoint(ops[f"{name}{k}"]) - ops[f"{name}{k}"]
            for k in (1, 2, 3)}


def _check_half_comm(ops):
    out = {}
    for k in range(3):
        Lv = [ops[f"L{j}"] for j in (1, 2, 3)]
        half = (_cross(P, Lv, k) - _cross(Lv, P, k)).scale(Fraction(1, 2))
        rhs = ops[f"PL{k + 1}"] - mul(I, mul(HBAR, P[k]))
        out[f"half(PxL-LxP)_{k + 1}"] = half - rhs
    return out


def _check_alg(ops, a, b, target_fn):
    out = {}
    for i, j in _pairs():
        k, sign = _eps_third(i, j)
        lhs = commutator(ops[f"{a}{i + 1}"], ops[f"{b}{j + 1}"])
        rhs = target_fn(k).scale(ScalarCoeff(Gaussian(0, sign), (1, 0, 0)))
        out[f"[{a}{i + 1},{b}{j + 1}]"] = lhs - rhs
    return out


def _check_alg_mm(ops):
    H0 = ops["H0"]
    coef = ScalarCoeff(-2, (0, -1, 0))
    return _check_alg(ops, "M", "M", lambda k: mul(H0, ops[f"L{k + 1}"]).scale(coef))


def _check_constraint_lm(ops):
    Lv = [ops[f"L{j}"] for j in (1, 2, 3)]
    Mv = [ops[f"M{j}"] for j in (1, 2, 3)]
    return {"L.M": _dot(Lv, Mv), "M.L": _dot(Mv, Lv)}


def _check_constraint_m2(ops):
    Lv = [ops[f"L{j}"] for j in (1, 2, 3)]
    Mv = [ops[f"M{j}"] for j in (1, 2, 3)]
    l2 = _dot(Lv, Lv) + HBAR * HBAR
    rhs = mul(ops["H0"], l2).scale(ScalarCoeff(2, (0, -1, 0))) + KAPPA * KAPPA
    return {"M^2": _dot(Mv, Mv) - rhs}


def bb_residual(k: int, T: OperatorExpr, ops: Mapping[str, OperatorExpr] | None = None
                ) -> OperatorExpr:
    """``2 H0 X_k - (3/2) M_k - (1/i hbar) [H0, T]`` for axis ``k`` (0-based)."""
    ops = ops or _default_table()
    H0 = ops["H0"]
    return (mul(H0, X[k]).scale(2) - ops[f"M{k + 1}"].scale(Fraction(3, 2))
            - commutator(H0, T).scale(INV_I_HBAR))


def _check_pauli_bb(ops):
    return {f"BB_{k + 1}": bb_residual(k, ops[f"T{k + 1}"], ops) for k in range(3)}


_CHECKS = {
    "CONSERVE_L": lambda ops: _check_conserve(ops, "L"),
    "CONSERVE_M": lambda ops: _check_conserve(ops, "M"),
    "HERM_L": lambda ops: _check_herm(ops, "L"),
    "HERM_M": lambda ops: _check_herm(ops, "M"),
    "HALF_COMM": _check_half_comm,
    "ALG_LL": lambda ops: _check_alg(ops, "L", "L", lambda k: ops[f"L{k + 1}"]),
    "ALG_LM": lambda ops: _check_alg(ops, "L", "M", lambda k: ops[f"M{k + 1}"]),
    "ALG_MM": _check_alg_mm,
    "CONSTRAINT_LM": _check_constraint_lm,
    "CONSTRAINT_M2": _check_constraint_m2,
    "PAULI_BB": _check_pauli_bb,
}

# conservation first: ALG_MM and CONSTRAINT_M2 place H0 left of L
IDENTITY_IDS = tuple(_CHECKS)


class IdentityBudgetExceeded(RuntimeError):
    def __init__(self, budget: float, done: list):
        self.reports = done
        names = ", ".join(r.id for r in done) or "none"
        super().__init__(f"identity suite exceeded its {budget:g} s budget "
                         f"(completed: {names})")


def verify_identity(id: str, ops: Mapping[str, OperatorExpr] | None = None) -> IdentityReport:
    try:
        check = _CHECKS[id]
    except KeyError:
        raise KeyError(f"unknown identity {id!r}") from None
    table = operator_table(ops) if ops else _default_table()
    t0 = time.perf_counter()
    comps = check(table)
    return IdentityReport(id, comps, time.perf_counter() - t0)


def verify_suite(ids=None, ops: Mapping[str, OperatorExpr] | None = None,
                 budget: float = 120.0) -> list[IdentityReport]:
    """Run identities in dependency order; abort once ``budget`` seconds elapse."""
    ids = list(IDENTITY_IDS if ids is None else ids)
    for i in ids:
        if i not in _CHECKS:
            raise KeyError(f"unknown identity {i!r}")
    ids.sort(key=IDENTITY_IDS.index)
    table = operator_table(ops)
    start = time.perf_counter()
    reports = []
    for i in ids:
        t0 = time.perf_counter()
        reports.append(IdentityReport(i, _CHECKS[i](table), time.perf_counter() - t0))
        if time.perf_counter() - start > budget:
            raise IdentityBudgetExceeded(budget, reports)
    return reports


def format_reports(reports) -> str:
    return "\n".join(r.line() for r in reports)


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)


# --- T ansatz ------------------------------------------------------------

def _rational_solve(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Exact least-rank solve of ``rows @ v = rhs``; returns (solution, consistent, rank)."""
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(m)) if m[k][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for k in range(len(m)):
            if k != r and m[k][c] != 0:
                f = m[k][c]
                m[k] = [a - f * b for a, b in zip(m[k], m[r])]
        pivots.append(c)
        r += 1
    consistent = all(row[-1] == 0 for row in m[r:])
    sol = [Fraction(0)] * ncols
    for row_idx, c in enumerate(pivots):
        sol[c] = m[row_idx][-1]
    return sol, consistent, len(pivots)


def _ansatz_parts(k: int, ops):
    H0 = ops["H0"]
    xp = _dot(X, P)
    xx = _dot(X, X)
    basis = [mul(X[k], xp), mul(xx, P[k]), mul(I, mul(HBAR, X[k]))]
    r0 = bb_residual(k, OperatorExpr.zero(), ops)
    # residual is affine: r0 - sum_j coef_j * (1/i hbar)[H0, basis_j]
    cols = [commutator(H0, b).scale(INV_I_HBAR).scale(-1) for b in basis]
    return r0, cols


def t_ansatz_residual(a, b, c, k: int = 2, ops=None) -> OperatorExpr:
    """Residual of the Becker-Bleuler identity for ``T = a X(X.P) + b X^2 P + i hbar c X``."""
    ops = ops or _default_table()
    T = (mul(X[k], _dot(X, P)).scale(Fraction(a)) + mul(_dot(X, X), P[k]).scale(Fraction(b))
         + mul(I, mul(HBAR, X[k])).scale(Fraction(c)))
    return bb_residual(k, T, ops)


def solve_T_ansatz(ops=None) -> tuple[Fraction, Fraction, Fraction]:
    """Solve the overdetermined linear system for (a, b, c), all three axes at once."""
    ops = ops or _default_table()
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for k in range(3):
        r0, cols = _ansatz_parts(k, ops)
        keys = set(r0._terms)
        for col in cols:
            keys |= set(col._terms)
        for key in sorted(keys):
            g0 = r0._terms.get(key, Gaussian(0))
            gs = [col._terms.get(key, Gaussian(0)) for col in cols]
            rows.append([g.re for g in gs])
            rhs.append(-g0.re)
            rows.append([g.im for g in gs])
            rhs.append(-g0.im)
    sol, consistent, rank = _rational_solve(rows, rhs)
    if not consistent:
        raise ArithmeticError("T ansatz system is inconsistent")
    if rank < 3:
        raise ArithmeticError(f"T ansatz system is underdetermined (rank {rank})")
    return tuple(sol)
