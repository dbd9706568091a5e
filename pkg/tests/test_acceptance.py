"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import contextlib
import io
import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from rlso4.cli import run
from rlso4.identities import IDENTITY_IDS, solve_T_ansatz
from rlso4.kepler import (
    orbit_from, solve_tau_ansatz, time_average, verify_classical_pauli, verify_total_derivative,
)
from rlso4.so4rep import (
    build_so4, casimir_energy, casimir_energy_numeric, check_rep, check_rotation_identity,
    eig_hermitian, energy_level,
)
from rlso4.spectra import (
    FieldConfig, brute_force_spectrum, crossed_field_levels, effective_fields,
    first_order_spectrum, stark_levels, sweep_map, zeeman_levels,
)


@contextlib.contextmanager
def criterion(num: int, title: str):
    info: dict = {}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException:
        status = "FAIL"
        raise
    else:
        status = "PASS"
    finally:
        extra = " ".join(f"{k}={v}" for k, v in info.items())
        line = f"criterion {num}: {status} {title} ({time.perf_counter() - t0:.2f}s) {extra}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print("\n" + line)


def energy_cfg(calE, calB) -> FieldConfig:
    return FieldConfig(tuple(calE), tuple(2 * np.asarray(calB, float)), "au")


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def test_criterion_01_symbolic_suite():
    with criterion(1, "exact operator identities reduce to zero") as info:
        t0 = time.perf_counter()
        # cold process so no cache is warm
        proc = subprocess.run([sys.executable, "-m", "rlso4", "verify"],
                              capture_output=True, text=True, timeout=300)
        elapsed = time.perf_counter() - t0
        lines = proc.stdout.strip().splitlines()
        info.update(identities=len(lines), runtime=f"{elapsed:.1f}s")
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert sorted(l.split()[0] for l in lines) == sorted(IDENTITY_IDS)
        assert all(l.split()[1:3] == ["PASS", "0"] for l in lines)
        assert elapsed <= 120


def test_criterion_02_t_ansatz():
    with criterion(2, "T ansatz solved exactly"):
        sol = solve_T_ansatz()   # raises if the stacked system is inconsistent
        assert sol == (Fraction(1, 2), Fraction(-1), Fraction(1))
        assert all(isinstance(v, Fraction) for v in sol)


def test_criterion_03_representation():
    with criterion(3, "so(4) relations, L^2 spectrum and degeneracy for n=1..8") as info:
        worst = 0.0
        for n in range(1, 9):
            rep = check_rep(n, tol=1e-12)
            assert rep.passed, (n, rep.failures)
            worst = max(worst, max(rep.residuals.values()) / n)
            r = build_so4(n)
            assert r.dim == n * n
            L2 = sum(m @ m for m in r.L)
            w = eig_hermitian(L2).eigenvalues
            expected = np.array(sorted(l * (l + 1) for l in range(n) for _ in range(2 * l + 1)),
                                dtype=float)
            assert len(w) == n * n
            assert np.abs(w - expected).max() <= 1e-12 * n
        info["max_residual_over_n"] = f"{worst:.2e}"


def test_criterion_04_energies():
    with criterion(4, "energy levels, exact and Casimir routes, n=1..10"):
        for n in range(1, 11):
            e = energy_level(n)
            assert e == Fraction(-1, 2 * n * n)
            assert casimir_energy(n) == e
            num = casimir_energy_numeric(build_so4(n))
            assert np.abs(num - float(e)).max() <= 4 * np.finfo(float).eps * abs(float(e))


def test_criterion_05_oracle_equivalence():
    with criterion(5, "closed form vs brute force, 100 configs, n<=6") as info:
        rng = np.random.default_rng(5)
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(100):
            cfg = energy_cfg(random_unit(rng) * rng.uniform(0, 1e-3),
                             random_unit(rng) * rng.uniform(0, 1e-3))
            for n in range(1, 7):
                closed = np.sort(first_order_spectrum(n, cfg).shifts)
                brute = brute_force_spectrum(n, cfg)
                eff = effective_fields(n, cfg)
                scale = max(eff.E_minus, eff.E_plus)
                rel = np.abs(closed - brute).max() / scale if scale else np.abs(brute).max()
                worst = max(worst, rel)
        elapsed = time.perf_counter() - t0
        info.update(max_rel=f"{worst:.2e}", runtime=f"{elapsed:.1f}s")
        assert worst <= 1e-10
        assert elapsed <= 60


def test_criterion_06_special_cases():
    with criterion(6, "Stark, Zeeman, crossed and parallel fields") as info:
        for n in range(1, 9):
            for table, attr in ((stark_levels(n, 1e-4), "s"), (zeeman_levels(n, 1e-5), "m")):
                assert len(table.distinct()) == 2 * n - 1
                counts: dict = {}
                for lv in table.levels:
                    counts[getattr(lv, attr)] = counts.get(getattr(lv, attr), 0) + 1
                assert all(c == n - abs(k) for k, c in counts.items())
                assert sum(c for _, c in table.distinct()) == n * n
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(20):
            u = random_unit(rng)
            w = np.cross(u, random_unit(rng))
            w /= np.linalg.norm(w)
            e0, b0 = rng.uniform(1e-6, 1e-3, size=2)
            n = int(rng.integers(1, 9))
            t = crossed_field_levels(n, energy_cfg(e0 * u, b0 * w))
            e_perp = math.sqrt(2.25 * n * n * e0 * e0 + b0 * b0)
            for lv in t.levels:
                worst = max(worst, abs(lv.delta_E - e_perp * float(lv.m)) / e_perp)
        assert worst <= 1e-12
        for _ in range(20):
            d = random_unit(rng)
            n = int(rng.integers(2, 7))
            cfg = energy_cfg(d * rng.uniform(1e-5, 1e-3), d * rng.uniform(1e-5, 1e-3))
            assert len(first_order_spectrum(n, cfg).distinct()) == n * n
        info["crossed_max_rel"] = f"{worst:.2e}"


def test_criterion_07_rotation_identity():
    with criterion(7, "eigenvalues of nu.I and nu.K match I3, K3 for 50 axes, n<=6"):
        rng = np.random.default_rng(7)
        axes = [random_unit(rng) for _ in range(50)]
        for n in range(1, 7):
            rep = build_so4(n)
            for nu in axes:
                assert check_rotation_identity(n, nu, tol=1e-11, rep=rep)


def test_criterion_08_classical_suite():
    with criterion(8, "classical averages, Pauli relation, d(tau)/dt, tau ansatz") as info:
        unit = dict(mu=1.0, kappa=1.0, lam=1.0)
        for k in range(1, 10):
            o = orbit_from(e=k / 10, **unit)
            mean_x = time_average(o, lambda r, p: r[:, 0])
            assert abs(mean_x + 1.5 * o.e * o.a) <= 1e-10
        rng = np.random.default_rng(8)
        for _ in range(20):
            o = orbit_from(rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 2),
                           rng.uniform(0, 0.9))
            assert verify_classical_pauli(o, tol=1e-10).passed
        ratios = []
        for e in (0.0, 0.5):
            o = orbit_from(e=e, **unit)
            rep = verify_total_derivative(o, dt=o.period * 1e-5, tol=1e-8)
            assert rep.passed, rep.details
            coarse = verify_total_derivative(o, dt=o.period * 1e-3)
            ratios.append(coarse.details["ratio"])
            assert 3.5 <= coarse.details["ratio"] <= 4.5
        a, b, _ = solve_tau_ansatz(orbit_from(e=0.5, **unit))
        assert abs(a - 0.5) <= 1e-6 and abs(b + 1) <= 1e-6
        info["dt_ratios"] = ",".join(f"{r:.3f}" for r in ratios)


def test_criterion_09_crossed_sweep_linearity():
    with criterion(9, "crossed-field sweep linear per level, m-labelled Zeeman pattern"):
        ns = [2, 5, 34]
        steps = 9
        for axis, fixed in (("B", {}), ("E", {})):
            direction = (0, 0, 1) if axis == "B" else (1, 0, 0)
            rows = sweep_map(ns, axis, 0.0, 1e-4, steps, direction, **fixed)
            by_level: dict = {}
            for r in rows:
                by_level.setdefault((r.n, r.m_i, r.m_k), []).append((r.field, r.shift))
            for pts in by_level.values():
                f, s = np.array(sorted(pts)).T
                slope = s[-1] / f[-1]
                assert np.abs(s - slope * f).max() <= 1e-13 * max(abs(s[-1]), 1e-300)
        # both fields on: every level sits on m * E_perp with multiplicity n - |m|
        rows = sweep_map(ns, "B", 0.0, 1e-4, steps, (0, 0, 1), fixed_E=(3e-6, 0, 0))
        for r in rows:
            e_perp = math.sqrt(2.25 * r.n ** 2 * 9e-12 + (0.5 * r.field) ** 2)
            assert abs(r.shift - float(r.m) * e_perp) <= 1e-13 * e_perp * r.n
            assert r.multiplicity == r.n - abs(r.m)
        # first order: joint scaling of both fields scales every shift
        cfg = energy_cfg((2e-6, 0, 0), (0, 0, 3e-5))
        big = energy_cfg((6e-6, 0, 0), (0, 0, 9e-5))
        for n in ns:
            assert np.allclose(first_order_spectrum(n, big).shifts,
                               3 * first_order_spectrum(n, cfg).shifts, rtol=1e-13, atol=0)


def test_criterion_10_negative_controls():
    with criterion(10, "corrupted generator / DSL coefficient give exit 1") as info:
        def code(*argv):
            return run(list(argv), io.StringIO(), io.StringIO())
        assert code("rep-check", "--n", "3") == 0
        corrupt = [code("rep-check", "--n", "3", "--corrupt", g) for g in ("I1", "K3")]
        assert corrupt == [1, 1]
        assert code("verify", "--identity", "CONSERVE_M") == 0
        # one coefficient changed: -kappa X3 S  ->  -2 kappa X3 S inside M3
        bad_m3 = "M3=(P1*L2 - P2*L1 - L1*P2 + L2*P1)/(2*mu) - 2*kappa*X3*S"
        assert code("verify", "--identity", "CONSERVE_M", "--override", bad_m3) == 1
        bad_l3 = "L3=X1*P2 - 2*X2*P1"
        assert code("verify", "--identity", "ALG_LL", "--override", bad_l3) == 1
        info["controls"] = 4
