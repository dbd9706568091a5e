"""Bound Kepler orbits, time averages and the classical Pauli relation.

Orbits lie in the z = 0 plane with the perihelion on +x at t = 0:
r0 / r = 1 + e cos(phi), r0 = lambda^2 / (mu kappa).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "OrbitParams", "PhaseState", "KeplerConvergenceError", "CheckReport",
    "orbit_from", "kepler_solve", "state_at", "states_at_phi", "time_average",
    "classical_rl_vector", "rl_vector_at", "tau_vector", "tau_dot",
    "verify_classical_pauli", "verify_total_derivative", "solve_tau_ansatz",
    "trajectory_csv",
]


@dataclass(frozen=True)
class OrbitParams:
    mu: float
    kappa: float
    lam: float
    e: float

    @property
    def r0(self) -> float:
        return self.lam ** 2 / (self.mu * self.kappa)

    @property
    def energy(self) -> float:
        return -self.mu * self.kappa ** 2 * (1 - self.e ** 2) / (2 * self.lam ** 2)

    @property
    def period(self) -> float:
        return 2 * math.pi * self.mu * self.r0 ** 2 / (self.lam * (1 - self.e ** 2) ** 1.5)

    @property
    def a(self) -> float:
        """Semi-major axis."""
        return self.r0 / (1 - self.e ** 2)

    def eccentricity_from_energy(self) -> float:
        return math.sqrt(max(0.0, 1 + 2 * self.energy * self.lam ** 2 / (self.mu * self.kappa ** 2)))


def orbit_from(mu: float, kappa: float, lam: float, e: float) -> OrbitParams:
    if not (mu > 0 and kappa > 0 and lam > 0):
        raise ValueError("mu, kappa and lambda must be positive")
    if not 0 <= e < 1:
        raise ValueError("eccentricity must lie in [0, 1)")
    return OrbitParams(float(mu), float(kappa), float(lam), float(e))


class KeplerConvergenceError(ArithmeticError):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"Kepler solver did not converge after {iterations} "
                         f"iterations (residual {residual:.3e})")


def kepler_solve(mean_anomaly: float, e: float, tol: float = 1e-13, maxiter: int = 100) -> float:
    """Solve E - e sin E = M by Newton's method kept inside a bisection bracket."""
    if not 0 <= e < 1:
        raise ValueError("eccentricity must lie in [0, 1)")
    # reduce to [-pi, pi] and add the winding back at the end
    two_pi = 2 * math.pi
    wind = math.floor((mean_anomaly + math.pi) / two_pi)
    M = mean_anomaly - wind * two_pi
    lo, hi = -math.pi, math.pi
    E = M + e * math.sin(M)
    f = E - e * math.sin(E) - M
    for it in range(1, maxiter + 1):
        if abs(f) <= tol:
            return E + wind * two_pi
        if f > 0:
            hi = min(hi, E)
        else:
            lo = max(lo, E)
        step = f / (1 - e * math.cos(E))
        E_new = E - step
        if not lo < E_new < hi:
            E_new = 0.5 * (lo + hi)
        E = E_new
        f = E - e * math.sin(E) - M
    if abs(f) <= tol:
        return E + wind * two_pi
    raise KeplerConvergenceError(maxiter, abs(f))


@dataclass(frozen=True)
class PhaseState:
    t: float
    position: np.ndarray
    momentum: np.ndarray
    phi: float


def states_at_phi(orbit: OrbitParams, phi) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum arrays (shape (..., 3)) at true anomaly ``phi``."""
    phi = np.asarray(phi, dtype=float)
    e, lam, r0 = orbit.e, orbit.lam, orbit.r0
    c, s = np.cos(phi), np.sin(phi)
    r = r0 / (1 + e * c)
    pr = e * lam * s / r0
    pt = lam / r
    zero = np.zeros_like(phi)
    pos = np.stack([r * c, r * s, zero], axis=-1)
    mom = np.stack([pr * c - pt * s, pr * s + pt * c, zero], axis=-1)
    return pos, mom


def state_at(orbit: OrbitParams, t: float) -> PhaseState:
    M = 2 * math.pi * t / orbit.period
    E = kepler_solve(M, orbit.e)
    e = orbit.e
    # true anomaly on the same branch as E
    phi = 2 * math.atan2(math.sqrt(1 + e) * math.sin(E / 2), math.sqrt(1 - e) * math.cos(E / 2))
    pos, mom = states_at_phi(orbit, phi)
    return PhaseState(float(t), pos, mom, float(phi))


# --- quadrature --------------------------------------------------------------

_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


def _composite_gl(func, a: float, b: float, panels: int):
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    fx = func(x)
    return np.tensordot(w, fx, axes=(0, 0)), np.tensordot(w, np.abs(fx), axes=(0, 0))


def time_average(orbit: OrbitParams, f: Callable, rtol: float = 1e-11,
                 shift: float = 0.0, max_panels: int = 4096):
    """Time average of ``f(position, momentum)`` over one period.

    Uses (mu / (lambda T)) * integral of f r^2 over phi in [shift-pi, shift+pi]
    with composite Gauss-Legendre, doubling the panel count until the change
    falls below ``rtol`` relative to the average of |f|.
    ``f`` receives arrays of shape (N, 3) and returns shape (N,) or (N, k).
    """
    pref = orbit.mu / (orbit.lam * orbit.period)

    def integrand(phi):
        pos, mom = states_at_phi(orbit, phi)
        r2 = np.einsum("...i,...i->...", pos, pos)
        val = np.asarray(f(pos, mom), dtype=float)
        return val * (r2 if val.ndim == 1 else r2[:, None])

    a, b = shift - math.pi, shift + math.pi
    panels = 4
    prev, _ = _composite_gl(integrand, a, b, panels)
    while panels < max_panels:
        panels *= 2
        cur, absint = _composite_gl(integrand, a, b, panels)
        scale = np.max(np.abs(absint)) if np.ndim(absint) else abs(absint)
        if np.max(np.abs(cur - prev)) <= rtol * max(scale, np.finfo(float).tiny):
            return pref * cur
        prev = cur
    raise ArithmeticError("time average did not converge")


# --- Runge-Lenz and tau ------------------------------------------------------

def classical_rl_vector(orbit: OrbitParams) -> np.ndarray:
    return np.array([orbit.kappa * orbit.e, 0.0, 0.0])


def rl_vector_at(orbit: OrbitParams, position, momentum) -> np.ndarray:
    """m = p ^ l / mu - kappa r / |r| evaluated at a phase point."""
    r = np.asarray(position, dtype=float)
    p = np.asarray(momentum, dtype=float)
    l = np.cross(r, p)
    return np.cross(p, l) / orbit.mu - orbit.kappa * r / np.linalg.norm(r, axis=-1, keepdims=True)


def tau_vector(position, momentum, a: float = 0.5, b: float = -1.0) -> np.ndarray:
    """tau = a (r.p) r + b r^2 p."""
    r = np.asarray(position, dtype=float)
    p = np.asarray(momentum, dtype=float)
    rp = np.sum(r * p, axis=-1, keepdims=True)
    rr = np.sum(r * r, axis=-1, keepdims=True)
    return a * rp * r + b * rr * p


def _basis_dot(orbit: OrbitParams, r, p):
    """Time derivatives of (r.p) r and r^2 p along the Coulomb flow."""
    r = np.asarray(r, dtype=float)
    p = np.asarray(p, dtype=float)
    rdot = p / orbit.mu
    rn = np.linalg.norm(r, axis=-1, keepdims=True)
    pdot = -orbit.kappa * r / rn ** 3
    rp = np.sum(r * p, axis=-1, keepdims=True)
    rr = rn ** 2
    d_rp = np.sum(rdot * p + r * pdot, axis=-1, keepdims=True)
    d_rr = 2 * np.sum(r * rdot, axis=-1, keepdims=True)
    dA = d_rp * r + rp * rdot
    dB = d_rr * p + rr * pdot
    return dA, dB


def tau_dot(orbit: OrbitParams, position, momentum, a: float = 0.5, b: float = -1.0):
    """Exact d(tau)/dt from Hamilton's equations."""
    dA, dB = _basis_dot(orbit, position, momentum)
    return a * dA + b * dB


def _pauli_rhs(orbit: OrbitParams, position, momentum):
    """(3/2) m - 2 h0 r, which should equal d(tau)/dt."""
    r = np.asarray(position, dtype=float)
    p = np.asarray(momentum, dtype=float)
    h0 = (np.sum(p * p, axis=-1, keepdims=True) / (2 * orbit.mu)
          - orbit.kappa / np.linalg.norm(r, axis=-1, keepdims=True))
    return 1.5 * rl_vector_at(orbit, r, p) - 2 * h0 * r


@dataclass
class CheckReport:
    id: str
    passed: bool
    residual: float
    details: dict
    elapsed: float = 0.0

    def line(self) -> str:
        return (f"{self.id} {'PASS' if self.passed else 'FAIL'} "
                f"{self.residual:.3e} {round(self.elapsed * 1000)}")

    def to_dict(self) -> dict:
        return {"id": self.id, "passed": self.passed, "residual": self.residual,
                "millis": round(self.elapsed * 1000), "details": self.details}


def verify_classical_pauli(orbit: OrbitParams, tol: float = 1e-10) -> CheckReport:
    """Check 2 E <r> = (3/2) m with <r> from quadrature."""
    mean_r = time_average(orbit, lambda r, p: r)
    lhs = 2 * orbit.energy * mean_r
    rhs = 1.5 * classical_rl_vector(orbit)
    resid = float(np.max(np.abs(lhs - rhs)))
    return CheckReport("classical_pauli", resid <= tol, resid,
                       {"mean_position": mean_r.tolist(), "lhs": lhs.tolist(),
                        "rhs": rhs.tolist()})


def _fd_error(orbit: OrbitParams, times, dt: float) -> float:
    errs = []
    for t in times:
        s0 = state_at(orbit, t)
        sp = state_at(orbit, t + dt)
        sm = state_at(orbit, t - dt)
        fd = (tau_vector(sp.position, sp.momentum) - tau_vector(sm.position, sm.momentum)) / (2 * dt)
        errs.append(np.max(np.abs(fd - _pauli_rhs(orbit, s0.position, s0.momentum))))
    return float(max(errs))


def verify_total_derivative(orbit: OrbitParams, n_samples: int = 64, dt: float | None = None,
                            tol: float = 1e-8) -> CheckReport:
    """Compare a central difference of tau(t) with (3/2) m - 2 h0 r.

    Also reports the error at dt/2 (the ratio is ~4 for a second-order
    difference) and the quadrature time average of d(tau)/dt.
    """
    T = orbit.period
    dt = T * 1e-5 if dt is None else dt
    times = np.linspace(0.0, T, n_samples, endpoint=False) + 0.0137 * T
    err = _fd_error(orbit, times, dt)
    err_half = _fd_error(orbit, times, dt / 2)
    mean_dot = time_average(orbit, lambda r, p: tau_dot(orbit, r, p))
    mean_resid = float(np.max(np.abs(mean_dot)))
    passed = err <= tol and mean_resid <= tol
    return CheckReport("total_derivative", passed, err,
                       {"dt": dt, "max_error": err, "max_error_half_dt": err_half,
                        "ratio": err / err_half if err_half > 0 else float("inf"),
                        "mean_tau_dot": mean_dot.tolist()})


def solve_tau_ansatz(orbit: OrbitParams, n_samples: int = 64) -> tuple[float, float, float]:
    """Least-squares (a, b) with d/dt[a (r.p) r + b r^2 p] = (3/2) m - 2 h0 r.

    Returns ``(a, b, residual)`` where the residual is the max-norm misfit.
    """
    phi = np.linspace(-math.pi, math.pi, n_samples, endpoint=False) + 0.1
    pos, mom = states_at_phi(orbit, phi)
    dA, dB = _basis_dot(orbit, pos, mom)
    rhs = _pauli_rhs(orbit, pos, mom)
    A = np.stack([dA[:, :2].ravel(), dB[:, :2].ravel()], axis=1)
    y = rhs[:, :2].ravel()
    scale = np.abs(A).max()
    if scale == 0 or np.linalg.matrix_rank(A, tol=1e-10 * scale) < 2:
        raise ValueError("degenerate sample set: the tau ansatz is not determined "
                         "(circular orbit?)")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(np.abs(A @ coef - y)))
    return float(coef[0]), float(coef[1]), resid


def trajectory_csv(orbit: OrbitParams, n_points: int) -> str:
    """``t,x,y,px,py,phi`` rows over one period."""
    lines = ["t,x,y,px,py,phi"]
    for t in np.linspace(0.0, orbit.period, n_points, endpoint=False):
        s = state_at(orbit, float(t))
        vals = (s.t, s.position[0], s.position[1], s.momentum[0], s.momentum[1], s.phi)
        lines.append(",".join(format(float(v), ".17g") for v in vals))
    return "\n".join(lines) + "\n"
