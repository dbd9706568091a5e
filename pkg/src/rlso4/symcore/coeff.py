"""Exact scalar coefficients: Gaussian rationals times Laurent monomials in hbar, mu, kappa."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["Gaussian", "ScalarCoeff", "SYMBOLS"]

SYMBOLS = ("hbar", "mu", "kappa")


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


class Gaussian:
    """Exact complex number ``re + im*i`` with rational parts.

    Fractions are always stored reduced with positive denominators
    (``fractions.Fraction`` guarantees this), so equality is structural.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def coerce(cls, x) -> "Gaussian":
        if isinstance(x, Gaussian):
            return x
        if isinstance(x, complex):
            raise TypeError("floating point complex values are not exact")
        return cls(x, 0)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, Gaussian):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"Gaussian({self.re}, {self.im})"

    def __str__(self):
        return f"({self.re} + {self.im} i)"

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __add__(self, other):
        other = Gaussian.coerce(other)
        return Gaussian(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = Gaussian.coerce(other)
        return Gaussian(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return Gaussian.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return Gaussian(self.re * other, self.im * other)
        other = Gaussian.coerce(other)
        return Gaussian(self.re * other.re - self.im * other.im,
                        self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def conjugate(self) -> "Gaussian":
        return Gaussian(self.re, -self.im)

    def inverse(self) -> "Gaussian":
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return Gaussian(self.re / d, -self.im / d)

    def __truediv__(self, other):
        return self * Gaussian.coerce(other).inverse()

    def times_i_power(self, k: int) -> "Gaussian":
        """Multiply by ``i**k``."""
        k %= 4
        if k == 0:
            return self
        if k == 1:
            return Gaussian(-self.im, self.re)
        if k == 2:
            return Gaussian(-self.re, -self.im)
        return Gaussian(self.im, -self.re)

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))


class ScalarCoeff:
    """A single scalar term ``g * hbar^eh * mu^emu * kappa^ek``.

    Exponents may be negative. The zero coefficient always carries zero
    exponents so that it has exactly one representation.
    """

    __slots__ = ("gaussian", "exponents")

    def __init__(self, gaussian=1, exponents=(0, 0, 0)):
        g = Gaussian.coerce(gaussian)
        exps = tuple(int(e) for e in exponents)
        if len(exps) != 3:
            raise ValueError("exponents must be a triple (hbar, mu, kappa)")
        self.gaussian = g
        self.exponents = exps if g else (0, 0, 0)

    @classmethod
    def coerce(cls, x) -> "ScalarCoeff":
        if isinstance(x, ScalarCoeff):
            return x
        return cls(x)

    def is_zero(self) -> bool:
        return not self.gaussian

    def __eq__(self, other):
        if not isinstance(other, ScalarCoeff):
            try:
                other = ScalarCoeff.coerce(other)
            except TypeError:
                return NotImplemented
        return self.gaussian == other.gaussian and self.exponents == other.exponents

    def __hash__(self):
        return hash((self.gaussian, self.exponents))

    def __mul__(self, other):
        other = ScalarCoeff.coerce(other)
        return ScalarCoeff(self.gaussian * other.gaussian,
                           tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarCoeff(-self.gaussian, self.exponents)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ScalarCoeff(1)
        for _ in range(k):
            out = out * self
        return out

    def inverse(self) -> "ScalarCoeff":
        return ScalarCoeff(self.gaussian.inverse(), tuple(-e for e in self.exponents))

    def conjugate(self) -> "ScalarCoeff":
        # hbar, mu, kappa are real
        return ScalarCoeff(self.gaussian.conjugate(), self.exponents)

    def __repr__(self):
        return f"ScalarCoeff({self.gaussian!r}, {self.exponents})"

    def __str__(self):
        eh, em, ek = self.exponents
        return f"{self.gaussian} hbar^{eh} mu^{em} kappa^{ek}"


def format_coeff(g: Gaussian, exps) -> str:
    eh, em, ek = exps
    return f"{g} hbar^{eh} mu^{em} kappa^{ek}"
