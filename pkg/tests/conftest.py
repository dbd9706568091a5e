from fractions import Fraction
import random

import pytest
from hypothesis import strategies as st

from rlso4.symcore import Gaussian, OperatorExpr, ScalarCoeff


@st.composite
def monomials(draw, max_degree=4):
    exps = [0] * 7
    for _ in range(draw(st.integers(0, max_degree))):
        exps[draw(st.integers(0, 6))] += 1
    return tuple(exps)


@st.composite
def coeffs(draw):
    g = Gaussian(draw(st.integers(-3, 3)), draw(st.integers(-3, 3)))
    if not g:
        g = Gaussian(1)
    exps = (draw(st.integers(0, 2)), draw(st.integers(-1, 1)), draw(st.integers(0, 1)))
    return ScalarCoeff(g, exps)


@st.composite
def exprs(draw, max_terms=6, max_degree=4):
    n = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n):
        m = draw(monomials(max_degree))
        c = draw(coeffs())
        terms[(m, c.exponents)] = c.gaussian
    return OperatorExpr(terms)


def pythagorean_point(rng: random.Random):
    """Rational (x1, x2, x3) with rational radius, plus random rational momenta."""
    while True:
        m, n, p, q = (rng.randint(-5, 5) for _ in range(4))
        r = m * m + n * n + p * p + q * q
        if r:
            break
    x = (m * m + n * n - p * p - q * q, 2 * (m * q + n * p), 2 * (n * q - m * p))
    pt = {f"X{k + 1}": Fraction(x[k], 1) for k in range(3)}
    pt["S"] = Fraction(1, r)
    for k in range(3):
        pt[f"P{k + 1}"] = Fraction(rng.randint(-7, 7), rng.randint(1, 5))
    pt["mu"] = Fraction(rng.randint(1, 9), rng.randint(1, 4))
    pt["kappa"] = Fraction(rng.randint(1, 9), rng.randint(1, 4))
    pt["hbar"] = Fraction(0)
    return pt


@pytest.fixture
def rng():
    return random.Random(20260)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
