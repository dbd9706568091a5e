"""First-order hydrogen level shifts in uniform electric and magnetic fields.

Within a shell of principal quantum number n the perturbation is

    H1 ~ v_minus . I / hbar + v_plus . K / hbar,
    v_minus = -(3/2) n Ecal + Bcal,   v_plus = (3/2) n Ecal + Bcal,

with Ecal = q a0 E and Bcal = mu_B B (both energies). The two pieces
commute, so the shifts are m_i |v_minus| + m_k |v_plus|.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .so4rep import build_so4, eig_hermitian

__all__ = [
    "Constants", "DEFAULT_CONSTANTS", "FieldConfig", "EffectiveFields",
    "PerturbedLevel", "SpectrumTable", "SweepRow",
    "effective_fields", "first_order_spectrum", "brute_force_spectrum",
    "stark_levels", "zeeman_levels", "crossed_field_levels", "sweep_map",
    "magnetic_quantum_numbers",
]


@dataclass(frozen=True)
class Constants:
    """SI constants used for unit conversion (CODATA 2018 defaults)."""

    elementary_charge: float = 1.602176634e-19      # C
    bohr_radius: float = 5.29177210903e-11          # m
    bohr_magneton: float = 9.2740100783e-24         # J/T
    hartree: float = 4.3597447222071e-18            # J
    atomic_field_unit: float = 5.14220674763e11     # V/m
    atomic_magnetic_unit: float = 2.35051756758e5   # T

    @classmethod
    def from_text(cls, text: str) -> "Constants":
        """Parse ``key=value`` lines; ``#`` starts a comment."""
        known = {f.name for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ValueError(f"line {lineno}: unknown constant {key!r}")
            values[key] = float(val)
        return cls(**values)

    @classmethod
    def from_env(cls, var: str = "RLSO4_CONSTANTS") -> "Constants":
        path = os.environ.get(var)
        if not path:
            return cls()
        with open(path) as fh:
            return cls.from_text(fh.read())


DEFAULT_CONSTANTS = Constants()


@dataclass(frozen=True)
class FieldConfig:
    """Field vectors; ``units='au'`` (atomic) or ``'si'`` (V/m and tesla).

    Energies come out in hartree for atomic units and in joule for SI.
    """

    E_vec: tuple = (0.0, 0.0, 0.0)
    B_vec: tuple = (0.0, 0.0, 0.0)
    units: str = "au"
    constants: Constants = DEFAULT_CONSTANTS

    def __post_init__(self):
        if self.units not in ("au", "si"):
            raise ValueError(f"units must be 'au' or 'si', got {self.units!r}")
        for name in ("E_vec", "B_vec"):
            v = tuple(float(x) for x in getattr(self, name))
            if len(v) != 3 or not all(math.isfinite(x) for x in v):
                raise ValueError(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, v)

    @property
    def calE(self) -> np.ndarray:
        """q a0 E as an energy vector."""
        E = np.array(self.E_vec)
        if self.units == "au":
            return E
        c = self.constants
        return c.elementary_charge * c.bohr_radius * E

    @property
    def calB(self) -> np.ndarray:
        """mu_B B as an energy vector (mu_B = 1/2 in atomic units)."""
        B = np.array(self.B_vec)
        if self.units == "au":
            return 0.5 * B
        return self.constants.bohr_magneton * B

    @property
    def energy_unit(self) -> str:
        return "hartree" if self.units == "au" else "J"

    def to_atomic(self) -> "FieldConfig":
        if self.units == "au":
            return self
        c = self.constants
        return FieldConfig(tuple(np.array(self.E_vec) / c.atomic_field_unit),
                           tuple(np.array(self.B_vec) / c.atomic_magnetic_unit),
                           "au", c)


@dataclass(frozen=True)
class EffectiveFields:
    v_minus: np.ndarray
    v_plus: np.ndarray
    E_minus: float
    E_plus: float
    nu_minus: np.ndarray | None
    nu_plus: np.ndarray | None

    @property
    def degenerate_minus(self) -> bool:
        return self.nu_minus is None

    @property
    def degenerate_plus(self) -> bool:
        return self.nu_plus is None


def effective_fields(n: int, cfg: FieldConfig) -> EffectiveFields:
    if n < 1:
        raise ValueError("n must be >= 1")
    e = 1.5 * n * cfg.calE
    b = cfg.calB
    vm, vp = b - e, b + e
    Em, Ep = float(np.linalg.norm(vm)), float(np.linalg.norm(vp))
    # zero norm: direction undefined, the term contributes nothing
    num = vm / Em if Em > 0 else None
    nup = vp / Ep if Ep > 0 else None
    return EffectiveFields(vm, vp, Em, Ep, num, nup)


@dataclass(frozen=True, order=True)
class PerturbedLevel:
    delta_E: float
    m_i: Fraction
    m_k: Fraction

    @property
    def m(self) -> Fraction:
        return self.m_i + self.m_k

    @property
    def s(self) -> Fraction:
        return self.m_i - self.m_k


def magnetic_quantum_numbers(n: int) -> list[Fraction]:
    j = Fraction(n - 1, 2)
    return [-j + k for k in range(n)]


@dataclass
class SpectrumTable:
    n: int
    levels: list[PerturbedLevel]
    field: float | None = None
    unit: str = "hartree"
    rel_tol: float = 1e-12

    def __post_init__(self):
        self.levels = sorted(self.levels, key=lambda lv: (lv.delta_E, lv.m_i, lv.m_k))

    @property
    def shifts(self) -> np.ndarray:
        return np.array([lv.delta_E for lv in self.levels])

    def _scale(self) -> float:
        return max((abs(lv.delta_E) for lv in self.levels), default=0.0)

    def distinct(self) -> list[tuple[float, int]]:
        """Distinct shifts (within ``rel_tol`` of the largest) with multiplicities."""
        tol = self.rel_tol * self._scale()
        out: list[list] = []
        for lv in self.levels:
            if out and abs(lv.delta_E - out[-1][0]) <= tol:
                out[-1][1] += 1
            else:
                out.append([lv.delta_E, 1])
        return [(s, c) for s, c in out]

    def multiplicity(self, level: PerturbedLevel) -> int:
        tol = self.rel_tol * self._scale()
        return sum(1 for lv in self.levels if abs(lv.delta_E - level.delta_E) <= tol)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "field": self.field,
            "unit": self.unit,
            "levels": [{"m_i": str(lv.m_i), "m_k": str(lv.m_k), "shift": lv.delta_E}
                       for lv in self.levels],
            "distinct": [{"shift": s, "multiplicity": c} for s, c in self.distinct()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumTable":
        levels = [PerturbedLevel(float(lv["shift"]), Fraction(lv["m_i"]), Fraction(lv["m_k"]))
                  for lv in d["levels"]]
        return cls(int(d["n"]), levels, d.get("field"), d.get("unit", "hartree"))

    def __eq__(self, other):
        if not isinstance(other, SpectrumTable):
            return NotImplemented
        return (self.n, self.levels, self.field, self.unit) == (
            other.n, other.levels, other.field, other.unit)


def _table(n, fn, field=None, unit="hartree") -> SpectrumTable:
    ms = magnetic_quantum_numbers(n)
    # + 0.0 folds -0.0 so that equal shifts print and sort identically
    levels = [PerturbedLevel(float(fn(mi, mk)) + 0.0, mi, mk) for mi, mk in product(ms, ms)]
    return SpectrumTable(n, levels, field, unit)


def first_order_spectrum(n: int, cfg: FieldConfig) -> SpectrumTable:
    """Closed-form shifts m_i E_minus + m_k E_plus for all n^2 states."""
    eff = effective_fields(n, cfg)
    Em, Ep = eff.E_minus, eff.E_plus
    return _table(n, lambda mi, mk: float(mi) * Em + float(mk) * Ep, unit=cfg.energy_unit)


def brute_force_spectrum(n: int, cfg: FieldConfig, tol: float = 1e-12) -> np.ndarray:
    """Diagonalize -(3/2) n Ecal.M'/hbar + Bcal.L/hbar on the shell."""
    rep = build_so4(n)
    e = 1.5 * n * cfg.calE
    b = cfg.calB
    L, Mp = rep.L, rep.Mp
    H1 = sum(-e[a] * Mp[a] + b[a] * L[a] for a in range(3)) / rep.hbar
    return eig_hermitian(H1, tol).eigenvalues


def stark_levels(n: int, e_mag: float) -> SpectrumTable:
    """Pure electric field along z: shift -(3/2) e_mag n (m_i - m_k)."""
    if e_mag < 0:
        raise ValueError("field magnitude must be nonnegative")
    return _table(n, lambda mi, mk: -1.5 * e_mag * n * float(mi - mk))


def zeeman_levels(n: int, b_mag: float) -> SpectrumTable:
    """Pure magnetic field along z: shift b_mag (m_i + m_k), b_mag = mu_B |B|."""
    if b_mag < 0:
        raise ValueError("field magnitude must be nonnegative")
    return _table(n, lambda mi, mk: b_mag * float(mi + mk))


def crossed_field_levels(n: int, cfg: FieldConfig, rel_tol: float = 1e-12) -> SpectrumTable:
    """Perpendicular fields: shift E_perp (m_i + m_k)."""
    E, B = cfg.calE, cfg.calB
    if abs(float(E @ B)) > rel_tol * float(np.linalg.norm(E) * np.linalg.norm(B)):
        raise ValueError("electric and magnetic fields are not perpendicular")
    e_perp = math.sqrt(2.25 * n * n * float(E @ E) + float(B @ B))
    return _table(n, lambda mi, mk: e_perp * float(mi + mk), unit=cfg.energy_unit)


@dataclass(frozen=True)
class SweepRow:
    field: float
    n: int
    m_i: Fraction
    m_k: Fraction
    shift: float
    multiplicity: int

    @property
    def m(self) -> Fraction:
        return self.m_i + self.m_k


def sweep_map(n_list: Iterable[int], axis: str, vmin: float, vmax: float, steps: int,
              direction: Sequence[float] = (0.0, 0.0, 1.0),
              fixed_E: Sequence[float] = (0.0, 0.0, 0.0),
              fixed_B: Sequence[float] = (0.0, 0.0, 0.0),
              units: str = "au", constants: Constants = DEFAULT_CONSTANTS) -> list[SweepRow]:
    """Sweep one field's magnitude along ``direction`` and tabulate shifts.

    ``axis`` is ``'E'`` or ``'B'``; the swept vector replaces ``fixed_E`` or
    ``fixed_B`` respectively. Rows are ordered by field, n, shift, (m_i, m_k).
    """
    if axis not in ("E", "B"):
        raise ValueError("axis must be 'E' or 'B'")
    if vmin < 0 or vmax < vmin:
        raise ValueError("invalid field range")
    if steps < 1 or (steps == 1 and vmax != vmin):
        raise ValueError("steps must be >= 2 for a nonempty range")
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    values = [vmin] if steps == 1 else list(np.linspace(vmin, vmax, steps))
    rows = []
    for v in values:
        vec = tuple(float(v) * d)
        cfg = FieldConfig(vec if axis == "E" else tuple(fixed_E),
                          vec if axis == "B" else tuple(fixed_B), units, constants)
        for n in sorted(set(n_list)):
            table = first_order_spectrum(n, cfg)
            for lv in table.levels:
                rows.append(SweepRow(float(v), n, lv.m_i, lv.m_k, lv.delta_E,
                                     table.multiplicity(lv)))
    rows.sort(key=lambda r: (r.field, r.n, r.shift, r.m_i, r.m_k))
    return rows
