"""Matrix realization of so(4) = so(3)_I + so(3)_K on one hydrogen shell.

Basis of the n^2-dimensional shell: index = row(m_i) * n + row(m_k), where
``row`` is the row of the spin-(n-1)/2 matrices (m descending from +j to
-j). Row indices increase with the index, m_i is the slow index.
Matrices are in units where hbar multiplies every generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "SpinMatrices", "So4Rep", "HermitianEig", "RepCheck",
    "spin_matrices", "build_so4", "eig_hermitian", "check_rep",
    "energy_level", "casimir_energy", "check_rotation_identity",
    "rotation_conjugate", "dump_matrix", "NotHermitianError",
]

# eps_{abc} index triples with sign +1
_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpinMatrices:
    j: Fraction
    Jz: np.ndarray
    Jplus: np.ndarray
    Jminus: np.ndarray
    Jx: np.ndarray
    Jy: np.ndarray

    @property
    def J(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.Jx, self.Jy, self.Jz)


def spin_matrices(j, hbar: float = 1.0) -> SpinMatrices:
    """Spin-j matrices with rows ordered m = j, j-1, ..., -j."""
    j2 = Fraction(j) * 2
    if j2.denominator != 1 or j2 < 0:
        raise ValueError(f"j must be a nonnegative half-integer, got {j!r}")
    j = j2 / 2
    dim = int(j2) + 1
    m = np.array([float(j) - r for r in range(dim)])
    jz = np.diag(m) * hbar
    jp = np.zeros((dim, dim))
    # <m+1|J+|m> sits at (row of m+1, row of m) = (r-1, r)
    for r in range(1, dim):
        mm = m[r]
        jp[r - 1, r] = hbar * np.sqrt((float(j) - mm) * (float(j) + mm + 1))
    jm = jp.T.copy()
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return SpinMatrices(j, *(_frozen(a) for a in (jz, jp, jm, jx, jy)))


@dataclass(frozen=True)
class So4Rep:
    n: int
    I: tuple[np.ndarray, np.ndarray, np.ndarray]
    K: tuple[np.ndarray, np.ndarray, np.ndarray]
    hbar: float = 1.0

    @property
    def i(self) -> Fraction:
        return Fraction(self.n - 1, 2)

    @property
    def L(self):
        return tuple(_frozen(a + b) for a, b in zip(self.I, self.K))

    @property
    def Mp(self):
        """The rescaled Runge-Lenz generators M' = I - K."""
        return tuple(_frozen(a - b) for a, b in zip(self.I, self.K))

    @property
    def dim(self) -> int:
        return self.n * self.n

    def generator(self, name: str) -> np.ndarray:
        """Look up ``I1..I3``, ``K1..K3``, ``L1..L3`` or ``Mp1..Mp3``."""
        table = {"I": self.I, "K": self.K, "L": self.L, "Mp": self.Mp}
        kind, idx = name[:-1], name[-1]
        if kind not in table or idx not in "123":
            raise KeyError(f"unknown generator {name!r}")
        return table[kind][int(idx) - 1]

    def replace(self, name: str, matrix) -> "So4Rep":
        """Copy with one I or K generator replaced (for negative controls)."""
        kind, idx = name[0], int(name[1]) - 1
        if kind not in "IK":
            raise KeyError("only I and K generators can be replaced")
        I, K = list(self.I), list(self.K)
        (I if kind == "I" else K)[idx] = _frozen(np.asarray(matrix))
        return So4Rep(self.n, tuple(I), tuple(K), self.hbar)


def build_so4(n: int, hbar: float = 1.0) -> So4Rep:
    if n < 1:
        raise ValueError("principal quantum number must be >= 1")
    sm = spin_matrices(Fraction(n - 1, 2), hbar)
    one = np.eye(n)
    I = tuple(_frozen(np.kron(J, one)) for J in sm.J)
    K = tuple(_frozen(np.kron(one, J)) for J in sm.J)
    return So4Rep(n, I, K, hbar)


def dump_matrix(a: np.ndarray, n: int, name: str) -> str:
    """Text dump: header ``n=<n> op=<name>`` then rows of ``re,im`` pairs."""
    lines = [f"n={n} op={name}"]
    for row in np.asarray(a):
        lines.append(" ".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row))
    return "\n".join(lines) + "\n"


# --- eigensolver -----------------------------------------------------------

class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float


def eig_hermitian(a, tol: float = 1e-12) -> HermitianEig:
    """Eigen-decomposition of a hermitian matrix, ascending, residual-checked."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(np.abs(a).max(initial=0.0), 1.0)
    if np.abs(a - a.conj().T).max(initial=0.0) > tol * scale:
        raise NotHermitianError("matrix is not hermitian to tolerance")
    try:
        w, v = np.linalg.eigh((a + a.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigensolver did not converge: {exc}") from exc
    resid = np.abs(a @ v - v * w).max(initial=0.0)
    ortho = np.abs(v.conj().T @ v - np.eye(len(w))).max(initial=0.0)
    bound = tol * scale * max(len(w), 1)
    if resid > bound or ortho > bound:
        raise ArithmeticError(f"eigen-decomposition residual {resid:.3e} exceeds {bound:.3e}")
    return HermitianEig(w, v, float(resid))


# --- representation checks ----------------------------------------------

@dataclass
class RepCheck:
    n: int
    tol: float
    residuals: dict[str, float]

    @property
    def bound(self) -> float:
        return self.tol * max(self.n, 1)

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.residuals.items() if v > self.bound]

    @property
    def passed(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        return [f"{k} {'PASS' if v <= self.bound else 'FAIL'} {v:.3e}"
                for k, v in self.residuals.items()]


def _comm(a, b):
    return a @ b - b @ a


def check_rep(n: int, tol: float = 1e-12, rep: So4Rep | None = None) -> RepCheck:
    """Verify the so(4) relations on the shell; residuals are max-norm / hbar^2."""
    rep = rep or build_so4(n)
    h = rep.hbar
    L, Mp, I, K = rep.L, rep.Mp, rep.I, rep.K
    res: dict[str, float] = {}

    def rec(key, m):
        res[key] = float(np.abs(m).max(initial=0.0)) / (h * h)

    names = "123"
    for a, b, c in _CYCLIC:
        ab = f"{names[a]}{names[b]}"
        rec(f"[L{ab[0]},L{ab[1]}]", _comm(L[a], L[b]) - 1j * h * L[c])
        rec(f"[L{ab[0]},M'{ab[1]}]", _comm(L[a], Mp[b]) - 1j * h * Mp[c])
        rec(f"[M'{ab[0]},M'{ab[1]}]", _comm(Mp[a], Mp[b]) - 1j * h * L[c])
    for a in range(3):
        for b in range(3):
            rec(f"[I{a + 1},K{b + 1}]", _comm(I[a], K[b]))
    rec("L.M'", sum(L[a] @ Mp[a] for a in range(3)))
    I2 = sum(m @ m for m in I)
    K2 = sum(m @ m for m in K)
    rec("I^2-K^2", I2 - K2)
    ii = (n - 1) / 2
    rec("I^2-i(i+1)", I2 - ii * (ii + 1) * h * h * np.eye(rep.dim))
    return RepCheck(n, tol, res)


# --- energies -----------------------------------------------------------

def energy_level(n: int, mu=1, kappa=1, hbar=1):
    """Unperturbed energy -mu kappa^2 / (2 hbar^2 n^2); exact for rational inputs."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if all(isinstance(v, (int, Fraction)) for v in (mu, kappa, hbar)):
        return -Fraction(mu) * Fraction(kappa) ** 2 / (2 * Fraction(hbar) ** 2 * n * n)
    return -mu * kappa ** 2 / (2 * hbar ** 2 * n * n)


def casimir_energy(n: int, mu=1, kappa=1, hbar=1):
    """Energy from the Casimir route: -mu kappa^2 / 2 / (4 i(i+1) hbar^2 + hbar^2)."""
    i = Fraction(n - 1, 2)
    if all(isinstance(v, (int, Fraction)) for v in (mu, kappa, hbar)):
        h2 = Fraction(hbar) ** 2
        return -Fraction(mu) * Fraction(kappa) ** 2 / 2 / (4 * i * (i + 1) * h2 + h2)
    i = float(i)
    return -0.5 * mu * kappa ** 2 / (4 * i * (i + 1) * hbar ** 2 + hbar ** 2)


def casimir_energy_numeric(rep: So4Rep, mu: float = 1.0, kappa: float = 1.0) -> np.ndarray:
    """Per-state energies from the matrix Casimir 2(I^2 + K^2) + hbar^2."""
    h = rep.hbar
    C = 2 * sum(m @ m for m in rep.I + rep.K) + h * h * np.eye(rep.dim)
    w = eig_hermitian(C).eigenvalues
    return -0.5 * mu * kappa ** 2 / w


# --- rotation identity --------------------------------------------------

def _unit(nu) -> np.ndarray:
    nu = np.asarray(nu, dtype=float)
    norm = np.linalg.norm(nu)
    if not np.isclose(norm, 1.0, rtol=0, atol=1e-12):
        raise ValueError("nu must be a unit vector")
    return nu


def _dotgen(nu, gens):
    return nu[0] * gens[0] + nu[1] * gens[1] + nu[2] * gens[2]


def check_rotation_identity(n: int, nu: Sequence[float], tol: float = 1e-11,
                            rep: So4Rep | None = None) -> bool:
    """Compare sorted eigenvalues of nu.I with I3 and nu.K with K3."""
    nu = _unit(nu)
    rep = rep or build_so4(n)
    ok = True
    for gens in (rep.I, rep.K):
        a = eig_hermitian(_dotgen(nu, gens)).eigenvalues
        b = np.sort(np.real(np.diag(gens[2])))
        ok &= bool(np.abs(a - b).max(initial=0.0) <= tol * max(1.0, rep.hbar * n))
    return ok


def rotation_conjugate(gens, nu, hbar: float = 1.0) -> np.ndarray:
    """Return exp(i th mu.J/hbar) Jz exp(-i th mu.J/hbar) for the axis taking nu to z."""
    nu = _unit(nu)
    theta = np.arccos(np.clip(nu[2], -1.0, 1.0))
    phi = np.arctan2(nu[1], nu[0])
    axis = np.array([np.sin(phi), -np.cos(phi), 0.0])
    gen = _dotgen(axis, gens)
    eig = eig_hermitian(gen)
    u = (eig.eigenvectors * np.exp(1j * theta * eig.eigenvalues / hbar)) @ eig.eigenvectors.conj().T
    return u @ gens[2] @ u.conj().T
