"""Normal-ordered noncommutative polynomials in X1..X3, S = 1/R and P1..P3.

Every monomial is stored as ``X1^a1 X2^a2 X3^a3 S^b P1^c1 P2^c2 P3^c3``
(positions, then inverse radius, then momenta). Products are brought back
to this order with

    P_i f(X) = f(X) P_i - i hbar d_i f(X),    d_i S = -X_i S^3,

and the commuting X/S block is reduced modulo ``(X1^2+X2^2+X3^2) S^2 = 1``
using the single rewrite ``X3^2 S^2 -> 1 - X1^2 S^2 - X2^2 S^2``.
Monomials never contain both ``X3^2`` and ``S^2`` after reduction.

Internally a term key is ``(mono, exps)`` where ``mono`` is the 7-tuple of
operator exponents and ``exps`` the (hbar, mu, kappa) exponents; the value
is a nonzero :class:`Gaussian`.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Iterator, NamedTuple

from .coeff import Gaussian, ScalarCoeff, format_coeff

__all__ = [
    "OpMonomial",
    "OperatorExpr",
    "mul",
    "commutator",
    "adjoint",
    "linear_combine",
    "is_zero",
    "reduce_commutative",
    "relabel_axes",
]


class OpMonomial(NamedTuple):
    x1: int = 0
    x2: int = 0
    x3: int = 0
    s: int = 0
    p1: int = 0
    p2: int = 0
    p3: int = 0

    def is_reduced(self) -> bool:
        return not (self.x3 >= 2 and self.s >= 2)

    def __str__(self):
        parts = []
        for name, e in zip(("X1", "X2", "X3", "S", "P1", "P2", "P3"), self):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"


ONE = (0, 0, 0, 0, 0, 0, 0)
NOSYM = (0, 0, 0)


# --- commuting X/S block -------------------------------------------------

@lru_cache(maxsize=None)
def _reduce_xs(x: tuple, b: int) -> tuple:
    """Reduce ``X^x S^b`` to normal form; returns ((x, b), int coeff) pairs."""
    if x[2] < 2 or b < 2:
        return (((x, b), 1),)
    x1, x2, x3 = x
    acc: dict = defaultdict(int)
    # X^x S^b = X^(x-2e3) S^(b-2) * (X3^2 S^2)
    for (xx, bb), c in _reduce_xs((x1, x2, x3 - 2), b - 2):
        acc[(xx, bb)] += c
    for (xx, bb), c in _reduce_xs((x1 + 2, x2, x3 - 2), b):
        acc[(xx, bb)] -= c
    for (xx, bb), c in _reduce_xs((x1, x2 + 2, x3 - 2), b):
        acc[(xx, bb)] -= c
    return tuple((k, c) for k, c in acc.items() if c)


def reduce_commutative(poly: dict, order: Iterable | None = None) -> dict:
    """Reduce a commuting polynomial ``{(x, b): coeff}`` modulo the radius relation.

    ``order`` optionally fixes the sequence in which monomials are rewritten;
    the result does not depend on it.
    """
    keys = list(poly) if order is None else list(order)
    out: dict = defaultdict(int)
    for key in keys:
        c = poly[key]
        x, b = key
        for k, r in _reduce_xs(tuple(x), b):
            out[k] += c * r
    return {k: c for k, c in out.items() if c}


@lru_cache(maxsize=None)
def _d(x: tuple, b: int, i: int) -> tuple:
    """Partial derivative d/dX_i of ``X^x S^b`` (unreduced)."""
    out = []
    if x[i]:
        xx = list(x)
        xx[i] -= 1
        out.append(((tuple(xx), b), x[i]))
    if b:
        xx = list(x)
        xx[i] += 1
        out.append(((tuple(xx), b + 2), -b))
    return tuple(out)


@lru_cache(maxsize=None)
def _deriv(x: tuple, b: int, k: tuple) -> tuple:
    """Mixed derivative d1^k1 d2^k2 d3^k3 of ``X^x S^b``."""
    if k == (0, 0, 0):
        return (((x, b), 1),)
    i = next(j for j in range(3) if k[j])
    kk = list(k)
    kk[i] -= 1
    acc: dict = defaultdict(int)
    for (x1, b1), c1 in _deriv(x, b, tuple(kk)):
        for key, c2 in _d(x1, b1, i):
            acc[key] += c1 * c2
    return tuple((key, c) for key, c in acc.items() if c)


@lru_cache(maxsize=None)
def _mul_mono(m1: tuple, m2: tuple) -> tuple:
    """Normal-ordered product of two monomials.

    Returns ``(mono, nk, c)`` triples meaning ``c * (-i hbar)^nk * mono``.
    Uses the Leibniz rule ``P^c f = sum_k C(c,k) (-i hbar d)^k f P^(c-k)``.
    """
    xa, sb, pc = m1[:3], m1[3], m1[4:]
    xb, sb2, pc2 = m2[:3], m2[3], m2[4:]
    acc: dict = defaultdict(int)
    for k1 in range(pc[0] + 1):
        for k2 in range(pc[1] + 1):
            for k3 in range(pc[2] + 1):
                binom = comb(pc[0], k1) * comb(pc[1], k2) * comb(pc[2], k3)
                rest = (pc[0] - k1 + pc2[0], pc[1] - k2 + pc2[1], pc[2] - k3 + pc2[2])
                nk = k1 + k2 + k3
                for (x, b), c in _deriv(xb, sb2, (k1, k2, k3)):
                    xs = (xa[0] + x[0], xa[1] + x[1], xa[2] + x[2])
                    for (xr, br), cr in _reduce_xs(xs, sb + b):
                        acc[(xr + (br,) + rest, nk)] += binom * c * cr
    return tuple((m, nk, c) for (m, nk), c in acc.items() if c)


# --- expressions ---------------------------------------------------------

class OperatorExpr:
    """Canonical element of the operator algebra. Immutable."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: dict | None = None, *, _canonical: bool = False):
        if terms is None:
            terms = {}
        elif not _canonical:
            terms = _canonicalize(terms)
        self._terms = terms
        self._hash = None

    # constructors
    @classmethod
    def zero(cls) -> "OperatorExpr":
        return cls({}, _canonical=True)

    @classmethod
    def constant(cls, c=1) -> "OperatorExpr":
        c = ScalarCoeff.coerce(c)
        if c.is_zero():
            return cls.zero()
        return cls({(ONE, c.exponents): c.gaussian}, _canonical=True)

    @classmethod
    def monomial(cls, mono, coeff=1) -> "OperatorExpr":
        c = ScalarCoeff.coerce(coeff)
        return cls({(tuple(mono), c.exponents): c.gaussian})

    @classmethod
    def atom(cls, name: str) -> "OperatorExpr":
        idx = _ATOMS.get(name)
        if idx is None:
            raise KeyError(f"unknown atom {name!r}")
        mono = [0] * 7
        mono[idx] = 1
        return cls({(tuple(mono), NOSYM): Gaussian(1)}, _canonical=True)

    # views
    @property
    def terms(self) -> dict:
        """Read-only view ``{(OpMonomial, (e_hbar, e_mu, e_kappa)): Gaussian}``."""
        return {(OpMonomial(*m), e): g for (m, e), g in self._terms.items()}

    def iter_terms(self) -> Iterator[tuple[OpMonomial, ScalarCoeff]]:
        for (m, e), g in sorted(self._terms.items(), key=lambda kv: kv[0]):
            yield OpMonomial(*m), ScalarCoeff(g, e)

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_scalar(self) -> bool:
        return len(self._terms) == 1 and next(iter(self._terms))[0] == ONE

    def as_scalar(self) -> ScalarCoeff:
        if self.is_zero():
            return ScalarCoeff(0)
        if not self.is_scalar():
            raise ValueError("expression is not a single scalar term")
        (m, e), g = next(iter(self._terms.items()))
        return ScalarCoeff(g, e)

    # equality
    def __eq__(self, other):
        if isinstance(other, OperatorExpr):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction, Gaussian, ScalarCoeff)):
            return self._terms == OperatorExpr.constant(other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # arithmetic
    def __neg__(self):
        return OperatorExpr({k: -g for k, g in self._terms.items()}, _canonical=True)

    def __add__(self, other):
        other = _as_expr(other)
        if other is NotImplemented:
            return other
        return _add(self._terms, other._terms, 1)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_expr(other)
        if other is NotImplemented:
            return other
        return _add(self._terms, other._terms, -1)

    def __rsub__(self, other):
        other = _as_expr(other)
        if other is NotImplemented:
            return other
        return _add(other._terms, self._terms, -1)

    def scale(self, c) -> "OperatorExpr":
        c = ScalarCoeff.coerce(c)
        if c.is_zero():
            return OperatorExpr.zero()
        ce, cg = c.exponents, c.gaussian
        return OperatorExpr(
            {(m, (e[0] + ce[0], e[1] + ce[1], e[2] + ce[2])): g * cg
             for (m, e), g in self._terms.items()},
            _canonical=True)

    def __mul__(self, other):
        if isinstance(other, OperatorExpr):
            return mul(self, other)
        if isinstance(other, (int, Fraction, Gaussian, ScalarCoeff)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Gaussian, ScalarCoeff)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers of operators are not in the algebra")
        out = OperatorExpr.constant(1)
        for _ in range(k):
            out = mul(out, self)
        return out

    def adjoint(self) -> "OperatorExpr":
        return adjoint(self)

    # serialization
    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"OperatorExpr({to_text(self)!r})"

    def evaluate_commutative(self, point: dict) -> Gaussian:
        """Evaluate with all symbols replaced by exact commuting numbers.

        ``point`` maps X1..X3, S, P1..P3, hbar, mu, kappa to rationals. With
        ``hbar = 0`` this is the classical limit.
        """
        total = Gaussian(0)
        names = ("X1", "X2", "X3", "S", "P1", "P2", "P3")
        for (m, e), g in self._terms.items():
            v = Fraction(1)
            for name, p in zip(names, m):
                if p:
                    v *= Fraction(point[name]) ** p
            for name, p in zip(("hbar", "mu", "kappa"), e):
                if p:
                    base = Fraction(point[name])
                    if base == 0 and p > 0:
                        v = Fraction(0)
                        break
                    v *= base ** p
            total = total + g * v
        return total


_ATOMS = {"X1": 0, "X2": 1, "X3": 2, "S": 3, "P1": 4, "P2": 5, "P3": 6}


def _as_expr(x):
    if isinstance(x, OperatorExpr):
        return x
    if isinstance(x, (int, Fraction, Gaussian, ScalarCoeff)):
        return OperatorExpr.constant(x)
    return NotImplemented


def _add(a: dict, b: dict, sign: int) -> OperatorExpr:
    out = dict(a)
    for k, g in b.items():
        if sign < 0:
            g = -g
        if k in out:
            s = out[k] + g
            if s:
                out[k] = s
            else:
                del out[k]
        else:
            out[k] = g
    return OperatorExpr(out, _canonical=True)


def _canonicalize(terms: dict) -> dict:
    """Reduce arbitrary ``{(mono, exps): coeff}`` input to canonical form."""
    acc: dict = defaultdict(lambda: Gaussian(0))
    for (m, e), g in terms.items():
        g = Gaussian.coerce(g)
        if not g:
            continue
        m = tuple(int(v) for v in m)
        if len(m) != 7 or min(m) < 0:
            raise ValueError(f"invalid monomial exponents {m}")
        e = tuple(int(v) for v in e)
        for (xr, br), c in _reduce_xs(m[:3], m[3]):
            key = (xr + (br,) + m[4:], e)
            acc[key] = acc[key] + g * c
    return {k: g for k, g in acc.items() if g}


def mul(lhs: OperatorExpr, rhs: OperatorExpr) -> OperatorExpr:
    """Canonical product ``lhs * rhs``."""
    acc: dict = {}
    for (m1, e1), g1 in lhs._terms.items():
        for (m2, e2), g2 in rhs._terms.items():
            g12 = g1 * g2
            for m, nk, c in _mul_mono(m1, m2):
                # (-i hbar)^nk
                g = (g12 * c).times_i_power(3 * nk)
                key = (m, (e1[0] + e2[0] + nk, e1[1] + e2[1], e1[2] + e2[2]))
                if key in acc:
                    acc[key] = acc[key] + g
                else:
                    acc[key] = g
    return OperatorExpr({k: g for k, g in acc.items() if g}, _canonical=True)


def commutator(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    return mul(a, b) - mul(b, a)


def adjoint(a: OperatorExpr) -> OperatorExpr:
    """Hermitian adjoint: reverse factor order and conjugate coefficients."""
    acc: dict = {}
    for (m, e), g in a._terms.items():
        p_block = (0, 0, 0, 0) + m[4:]
        xs_block = m[:4] + (0, 0, 0)
        gc = g.conjugate()
        for mm, nk, c in _mul_mono(p_block, xs_block):
            gg = (gc * c).times_i_power(3 * nk)
            key = (mm, (e[0] + nk, e[1], e[2]))
            acc[key] = acc[key] + gg if key in acc else gg
    return OperatorExpr({k: g for k, g in acc.items() if g}, _canonical=True)


def linear_combine(pairs: Iterable[tuple]) -> OperatorExpr:
    """Canonical sum of ``coeff * expr`` over ``pairs``."""
    acc: dict = {}
    for c, expr in pairs:
        for k, g in expr.scale(c)._terms.items():
            acc[k] = acc[k] + g if k in acc else g
    return OperatorExpr({k: g for k, g in acc.items() if g}, _canonical=True)


def is_zero(a: OperatorExpr) -> bool:
    return a.is_zero()


def relabel_axes(a: OperatorExpr, perm: tuple[int, int, int]) -> OperatorExpr:
    """Send axis ``j`` to axis ``perm[j]`` (0-based) for both X and P."""
    terms = {}
    for (m, e), g in a._terms.items():
        x = [0, 0, 0]
        p = [0, 0, 0]
        for j in range(3):
            x[perm[j]] = m[j]
            p[perm[j]] = m[4 + j]
        terms[(tuple(x) + (m[3],) + tuple(p), e)] = g
    return OperatorExpr(terms)


def to_text(a: OperatorExpr) -> str:
    """Canonical text: terms sorted by exponent tuple, joined by `` + ``."""
    if a.is_zero():
        return "0"
    parts = []
    for (m, e), g in sorted(a._terms.items(), key=lambda kv: kv[0]):
        parts.append(f"{format_coeff(g, e)} * {OpMonomial(*m)}")
    return " + ".join(parts)
