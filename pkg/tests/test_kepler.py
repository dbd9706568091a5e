import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlso4.kepler import (
    KeplerConvergenceError, classical_rl_vector, kepler_solve, orbit_from, rl_vector_at,
    solve_tau_ansatz, state_at, states_at_phi, tau_dot, tau_vector, time_average,
    trajectory_csv, verify_classical_pauli, verify_total_derivative,
)

UNIT = dict(mu=1.0, kappa=1.0, lam=1.0)


def bisect_kepler(M, e, iters=200):
    lo, hi = M - 1.0, M + 1.0   # |E - M| <= e < 1
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid - e * math.sin(mid) - M > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def random_orbit(rng, emax=0.9):
    return orbit_from(rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 2),
                      rng.uniform(0, emax))


def energy(orbit, pos, mom):
    return np.sum(mom * mom, axis=-1) / (2 * orbit.mu) - orbit.kappa / np.linalg.norm(pos, axis=-1)


# --- orbit parameters ----------------------------------------------------------

def test_unit_orbit_parameters():
    o = orbit_from(e=0.5, **UNIT)
    assert o.r0 == 1.0
    assert o.energy == pytest.approx(-0.375)
    assert o.period == pytest.approx(9.67359, rel=1e-6)
    # Kepler's third law: T = 2 pi sqrt(mu a^3 / kappa)
    assert o.period == pytest.approx(2 * math.pi * math.sqrt(o.a ** 3), rel=1e-14)
    assert o.eccentricity_from_energy() == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("kw", [dict(mu=0, kappa=1, lam=1, e=0), dict(mu=1, kappa=1, lam=1, e=1),
                                dict(mu=1, kappa=-1, lam=1, e=0.2), dict(mu=1, kappa=1, lam=1, e=-0.1)])
def test_orbit_validation(kw):
    with pytest.raises(ValueError):
        orbit_from(**kw)


# --- Kepler equation -----------------------------------------------------------

def test_kepler_solve_example():
    E = kepler_solve(1.0, 0.5)
    assert E == pytest.approx(1.49870113, abs=1e-8)
    assert E == pytest.approx(bisect_kepler(1.0, 0.5), abs=1e-13)


def test_kepler_solve_circular_and_winding():
    assert kepler_solve(2.5, 0.0) == pytest.approx(2.5, abs=1e-15)
    E = kepler_solve(1.0 + 4 * math.pi, 0.5)
    assert E == pytest.approx(kepler_solve(1.0, 0.5) + 4 * math.pi, abs=1e-12)


def test_kepler_solve_rejects_bad_e():
    with pytest.raises(ValueError):
        kepler_solve(1.0, 1.0)


def test_kepler_convergence_error():
    with pytest.raises(KeplerConvergenceError) as info:
        kepler_solve(1.0, 0.9, tol=0.0, maxiter=2)
    assert info.value.iterations == 2


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(0, 0.999))
def test_kepler_solve_matches_bisection(M, e):
    E = kepler_solve(M, e)
    assert abs(E - e * math.sin(E) - M) <= 1e-12
    assert E == pytest.approx(bisect_kepler(M, e), abs=1e-9)


# --- trajectories --------------------------------------------------------------

def test_perihelion_and_aphelion():
    o = orbit_from(e=0.5, **UNIT)
    s = state_at(o, 0.0)
    assert np.allclose(s.position, [o.r0 / 1.5, 0, 0], atol=1e-15)
    assert s.momentum[1] == pytest.approx(o.lam / (o.r0 / 1.5))
    s = state_at(o, o.period / 2)
    assert np.allclose(s.position, [-o.r0 / 0.5, 0, 0], atol=1e-12)
    assert abs(s.phi) == pytest.approx(math.pi)


@pytest.mark.parametrize("seed", range(20))
def test_conservation_along_orbit(seed):
    rng = np.random.default_rng(seed)
    o = random_orbit(rng)
    ts = np.linspace(0, o.period, 50) + rng.uniform(-10, 10) * o.period
    for t in ts:
        s = state_at(o, float(t))
        assert energy(o, s.position, s.momentum) == pytest.approx(o.energy, rel=1e-12)
        assert np.cross(s.position, s.momentum)[2] == pytest.approx(o.lam, rel=1e-12)
        assert np.allclose(rl_vector_at(o, s.position, s.momentum), classical_rl_vector(o),
                           rtol=0, atol=1e-12 * o.kappa)


def test_conservation_1000_samples():
    o = orbit_from(e=0.5, **UNIT)
    phi = np.linspace(-math.pi, math.pi, 1000)
    pos, mom = states_at_phi(o, phi)
    assert np.abs(energy(o, pos, mom) - o.energy).max() <= 1e-12
    assert np.abs(np.cross(pos, mom)[:, 2] - o.lam).max() <= 1e-12
    assert np.abs(rl_vector_at(o, pos, mom) - classical_rl_vector(o)).max() <= 1e-12


def test_state_matches_hamilton_flow():
    # central difference of position over time equals p / mu
    o = orbit_from(mu=1.3, kappa=0.7, lam=1.1, e=0.4)
    dt = o.period * 1e-6
    for t in (0.1, 1.7, 4.2):
        a, b, c = state_at(o, t - dt), state_at(o, t), state_at(o, t + dt)
        assert np.allclose((c.position - a.position) / (2 * dt), b.momentum / o.mu, atol=1e-7)
        assert np.allclose((c.momentum - a.momentum) / (2 * dt),
                           -o.kappa * b.position / np.linalg.norm(b.position) ** 3, atol=1e-7)


# --- time averages -------------------------------------------------------------

@pytest.mark.parametrize("e", [0.0, 0.3, 0.9])
def test_average_of_one(e):
    o = orbit_from(e=e, **UNIT)
    assert time_average(o, lambda r, p: np.ones(len(r))) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("e", [0.1, 0.5, 0.9])
def test_average_y_vanishes_and_shift_invariance(e):
    o = orbit_from(e=e, **UNIT)
    m = time_average(o, lambda r, p: r)
    assert abs(m[1]) <= 1e-12 and m[2] == 0
    assert np.allclose(time_average(o, lambda r, p: r, shift=1.234), m, atol=1e-11)


@pytest.mark.parametrize("e", [0.1, 0.5, 0.9])
def test_odd_phi_integral_vanishes(e):
    # integral of sin(phi) / (1 + e cos(phi))^3 over a period
    o = orbit_from(e=e, **UNIT)
    val = time_average(o, lambda r, p: r[:, 1] / np.linalg.norm(r, axis=1))
    assert abs(val) <= 1e-12


@pytest.mark.parametrize("e", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_mean_position(e):
    o = orbit_from(e=e, **UNIT)
    assert time_average(o, lambda r, p: r[:, 0]) == pytest.approx(-1.5 * e * o.a, rel=1e-12)


@pytest.mark.parametrize("e", [0.0, 0.4, 0.8])
def test_mean_inverse_radius(e):
    # virial: <1/r> = 1/a
    o = orbit_from(e=e, **UNIT)
    assert time_average(o, lambda r, p: 1 / np.linalg.norm(r, axis=1)) == pytest.approx(1 / o.a, rel=1e-12)


def test_time_average_against_time_sampling():
    # naive uniform-in-time sampling is spectrally accurate for periodic integrands
    o = orbit_from(e=0.3, **UNIT)
    ts = np.linspace(0, o.period, 400, endpoint=False)
    xs = np.array([state_at(o, float(t)).position[0] for t in ts])
    assert xs.mean() == pytest.approx(time_average(o, lambda r, p: r[:, 0]), abs=1e-12)


# --- Runge-Lenz and Pauli relation -------------------------------------------

def test_rl_vector_at_sample_time():
    o = orbit_from(e=0.5, **UNIT)
    s = state_at(o, 0.37 * o.period)
    assert np.allclose(rl_vector_at(o, s.position, s.momentum), [0.5, 0, 0], atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_classical_pauli_random_orbits(seed):
    o = random_orbit(np.random.default_rng(seed))
    report = verify_classical_pauli(o)
    assert report.passed, report.line()


def test_classical_pauli_circular():
    report = verify_classical_pauli(orbit_from(e=0.0, **UNIT))
    assert report.passed and report.residual <= 1e-12


def test_tau_dot_matches_pauli_rhs():
    o = orbit_from(mu=0.8, kappa=1.7, lam=1.2, e=0.6)
    pos, mom = states_at_phi(o, np.linspace(-3, 3, 40))
    h0 = energy(o, pos, mom)[:, None]
    m = rl_vector_at(o, pos, mom)
    assert np.allclose(tau_dot(o, pos, mom), 1.5 * m - 2 * h0 * pos, atol=1e-12)


@pytest.mark.parametrize("e", [0.0, 0.5])
def test_total_derivative(e):
    report = verify_total_derivative(orbit_from(e=e, **UNIT))
    assert report.passed, report.details
    assert report.details["max_error"] <= 1e-8
    assert np.abs(report.details["mean_tau_dot"]).max() <= 1e-12


def test_total_derivative_second_order():
    report = verify_total_derivative(orbit_from(e=0.5, **UNIT), dt=9.67e-3)
    assert 3.5 <= report.details["ratio"] <= 4.5


def test_total_derivative_wrong_tau_fails():
    # the difference quotient of the wrong tau does not match
    o = orbit_from(e=0.5, **UNIT)
    dt = o.period * 1e-5
    s = [state_at(o, 1.0 + k * dt) for k in (-1, 0, 1)]
    fd = (tau_vector(s[2].position, s[2].momentum, 1.0, -1.0)
          - tau_vector(s[0].position, s[0].momentum, 1.0, -1.0)) / (2 * dt)
    h0 = energy(o, s[1].position, s[1].momentum)
    rhs = 1.5 * rl_vector_at(o, s[1].position, s[1].momentum) - 2 * h0 * s[1].position
    assert np.abs(fd - rhs).max() > 1e-3


@pytest.mark.parametrize("e", [0.3, 0.5, 0.8])
def test_solve_tau_ansatz(e):
    a, b, resid = solve_tau_ansatz(orbit_from(e=e, **UNIT))
    assert a == pytest.approx(0.5, abs=1e-6) and b == pytest.approx(-1.0, abs=1e-6)
    assert resid <= 1e-10


def test_solve_tau_ansatz_circular_degenerate():
    with pytest.raises(ValueError):
        solve_tau_ansatz(orbit_from(e=0.0, **UNIT))


def test_trajectory_csv():
    o = orbit_from(e=0.5, **UNIT)
    text = trajectory_csv(o, 8)
    lines = text.splitlines()
    assert lines[0] == "t,x,y,px,py,phi" and len(lines) == 9
    first = [float(v) for v in lines[1].split(",")]
    assert first[:3] == [0.0, pytest.approx(2 / 3), 0.0]
    assert trajectory_csv(o, 8) == text
