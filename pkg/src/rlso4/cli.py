"""Command-line front end: ``rlso4 <command> [flags]``.

Exit codes: 0 success, 1 a verification failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import time
from typing import Iterable, Sequence

import numpy as np

from . import identities, kepler, so4rep, spectra
from .symcore import DSLError, parse_expr, to_text

CSV_HEADER = "field,n,m_i,m_k,shift,multiplicity_label"
ORACLE_RTOL = 1e-10


def _g(x) -> str:
    # + 0.0 folds -0.0 into 0.0
    return "" if x is None else format(float(x) + 0.0, ".17g")


def _rows_of(obj) -> list[tuple]:
    """Flatten tables or sweep rows to (field, n, m_i, m_k, shift, mult) tuples."""
    rows = []
    for item in obj:
        if isinstance(item, spectra.SpectrumTable):
            for lv in item.levels:
                rows.append((item.field, item.n, lv.m_i, lv.m_k, lv.delta_E,
                             item.multiplicity(lv)))
        elif isinstance(item, spectra.SweepRow):
            rows.append((item.field, item.n, item.m_i, item.m_k, item.shift, item.multiplicity))
        else:
            raise TypeError(f"cannot emit {type(item).__name__}")
    return rows


def emit(tables: Iterable, fmt: str = "csv") -> bytes:
    """Serialize spectrum tables or sweep rows; output is bit-stable."""
    tables = list(tables)
    if fmt == "csv":
        lines = [CSV_HEADER]
        for f, n, mi, mk, shift, mult in _rows_of(tables):
            lines.append(f"{_g(f)},{n},{mi},{mk},{_g(shift)},{mult}")
        return ("\n".join(lines) + "\n").encode()
    if fmt == "json":
        if all(isinstance(t, spectra.SpectrumTable) for t in tables):
            payload = [t.to_dict() for t in tables]
        else:
            payload = [{"field": f, "n": n, "m_i": str(mi), "m_k": str(mk), "shift": s,
                        "multiplicity": m} for f, n, mi, mk, s, m in _rows_of(tables)]
        return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()
    if fmt == "text":
        out = io.StringIO()
        for t in tables:
            if isinstance(t, spectra.SpectrumTable):
                out.write(f"n={t.n} levels={len(t.levels)} unit={t.unit}\n")
                for shift, mult in t.distinct():
                    out.write(f"  {_g(shift)} x{mult}\n")
            else:
                out.write(f"{_g(t.field)} n={t.n} m_i={t.m_i} m_k={t.m_k} "
                          f"shift={_g(t.shift)} x{t.multiplicity}\n")
        return out.getvalue().encode()
    raise ValueError(f"unsupported format {fmt!r}")


def tables_from_json(data: bytes | str) -> list[spectra.SpectrumTable]:
    return [spectra.SpectrumTable.from_dict(d) for d in json.loads(data)]


# --- argument parsing --------------------------------------------------------

def _vector(text: str) -> tuple[float, float, float]:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed vector {text!r}") from None
    if len(parts) != 3 or not all(np.isfinite(parts)):
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return tuple(parts)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not np.isfinite(v) or v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text!r}")
    return v


def _override(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError("override must look like NAME=EXPR")
    name, expr = text.split("=", 1)
    name = name.strip()
    if name not in identities.OPERATOR_NAMES:
        raise argparse.ArgumentTypeError(f"unknown operator {name!r}")
    return name, expr


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rlso4", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the exact operator identity suite")
    v.add_argument("--identity", choices=identities.IDENTITY_IDS, action="append")
    v.add_argument("--budget", type=_nonneg_float, default=120.0, help="seconds")
    v.add_argument("--override", type=_override, action="append", default=[],
                   metavar="NAME=EXPR", help="replace a named operator (negative controls)")
    v.add_argument("--format", choices=("text", "json"), default="text")

    r = sub.add_parser("reduce", help="print the canonical form of a DSL expression")
    r.add_argument("--expr", required=True)

    rc = sub.add_parser("rep-check", help="check the so(4) matrix representation")
    rc.add_argument("--n", type=_positive_int, required=True)
    rc.add_argument("--tol", type=_nonneg_float, default=1e-12)
    rc.add_argument("--corrupt", choices=[f"{k}{i}" for k in "IK" for i in "123"],
                    help="scale one generator by 1.001 (negative control)")
    rc.add_argument("--dump", metavar="GEN", help="also dump a generator matrix (e.g. L3, Mp1)")
    rc.add_argument("--format", choices=("text", "json"), default="text")

    s = sub.add_parser("spectrum", help="first-order shifts for one shell")
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--efield", type=_vector, default=(0.0, 0.0, 0.0))
    s.add_argument("--bfield", type=_vector, default=(0.0, 0.0, 0.0))
    s.add_argument("--units", choices=("au", "si"), default="au")
    s.add_argument("--oracle", action="store_true",
                   help="compare with brute-force diagonalization")
    s.add_argument("--format", choices=("csv", "json", "text"), default="csv")

    for name, helptext in (("stark-map", "electric-field sweep (E along z)"),
                           ("crossed-map", "crossed-field sweep (E along x, B along z)")):
        m = sub.add_parser(name, help=helptext)
        m.add_argument("--n-min", type=_positive_int, required=True)
        m.add_argument("--n-max", type=_positive_int, required=True)
        m.add_argument("--steps", type=_positive_int, required=True)
        m.add_argument("--units", choices=("au", "si"), default="au")
        m.add_argument("--format", choices=("csv", "json", "text"), default="csv")
        if name == "stark-map":
            m.add_argument("--emax", type=_nonneg_float, required=True)
        else:
            m.add_argument("--sweep", choices=("B", "E"), default="B")
            m.add_argument("--max", type=_nonneg_float, required=True, dest="vmax")
            m.add_argument("--fixed", type=_nonneg_float, default=0.0,
                           help="magnitude of the other (unswept) field")

    k = sub.add_parser("kepler", help="classical orbit checks")
    k.add_argument("--lambda", type=float, required=True, dest="lam")
    k.add_argument("--e", type=float, required=True)
    k.add_argument("--mu", type=float, default=1.0)
    k.add_argument("--kappa", type=float, default=1.0)
    k.add_argument("--check", choices=("pauli", "tau", "all"), default="all")
    k.add_argument("--trajectory", type=_positive_int, metavar="N",
                   help="print an N-point trajectory CSV instead of checks")
    k.add_argument("--format", choices=("text", "json"), default="text")
    return p


# --- commands ----------------------------------------------------------------

def _cmd_verify(args, out, err) -> int:
    overrides = {}
    for name, text in args.override:
        try:
            overrides[name] = parse_expr(text)
        except DSLError as exc:
            err.write(f"rlso4 verify: bad override for {name}: {exc}\n")
            return 2
    try:
        reports = identities.verify_suite(args.identity, overrides or None, args.budget)
    except identities.IdentityBudgetExceeded as exc:
        out.write(identities.format_reports(exc.reports) + "\n")
        err.write(f"rlso4 verify: {exc}\n")
        return 1
    if args.format == "json":
        out.write(identities.reports_to_json(reports) + "\n")
    else:
        out.write(identities.format_reports(reports) + "\n")
    return 0 if all(r.passed for r in reports) else 1


def _cmd_reduce(args, out, err) -> int:
    try:
        expr = parse_expr(args.expr)
    except DSLError as exc:
        err.write(f"rlso4 reduce: {exc}\n")
        return 2
    out.write(to_text(expr) + "\n")
    return 0


def _cmd_rep_check(args, out, err) -> int:
    rep = so4rep.build_so4(args.n)
    if args.corrupt:
        rep = rep.replace(args.corrupt, rep.generator(args.corrupt) * 1.001)
    report = so4rep.check_rep(args.n, args.tol, rep)
    if args.format == "json":
        out.write(json.dumps({"n": args.n, "tol": args.tol, "passed": report.passed,
                              "residuals": report.residuals}, indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n".join(report.lines()) + "\n")
    if args.dump:
        try:
            mat = rep.generator(args.dump)
        except KeyError as exc:
            err.write(f"rlso4 rep-check: {exc}\n")
            return 2
        out.write(so4rep.dump_matrix(mat, args.n, args.dump))
    return 0 if report.passed else 1


def _constants():
    return spectra.Constants.from_env()


def _cmd_spectrum(args, out, err) -> int:
    cfg = spectra.FieldConfig(args.efield, args.bfield, args.units, _constants())
    table = spectra.first_order_spectrum(args.n, cfg)
    code = 0
    dev = None
    if args.oracle:
        brute = spectra.brute_force_spectrum(args.n, cfg)
        dev = float(np.max(np.abs(np.sort(table.shifts) - brute)))
        eff = spectra.effective_fields(args.n, cfg)
        scale = max(eff.E_minus, eff.E_plus)
        if dev > ORACLE_RTOL * scale:
            code = 1
    if args.format == "json":
        d = table.to_dict()
        if dev is not None:
            d["oracle_max_deviation"] = dev
        out.write(json.dumps(d, indent=2, sort_keys=True) + "\n")
    else:
        out.write(emit([table], args.format).decode())
        if dev is not None:
            out.write(f"# oracle max deviation {_g(dev)} {'PASS' if code == 0 else 'FAIL'}\n")
    return code


def _cmd_map(args, out, err) -> int:
    if args.n_max < args.n_min:
        err.write(f"rlso4 {args.command}: --n-max must be >= --n-min\n")
        return 2
    ns = range(args.n_min, args.n_max + 1)
    try:
        if args.command == "stark-map":
            rows = spectra.sweep_map(ns, "E", 0.0, args.emax, args.steps, (0, 0, 1),
                                     units=args.units, constants=_constants())
        elif args.sweep == "B":
            rows = spectra.sweep_map(ns, "B", 0.0, args.vmax, args.steps, (0, 0, 1),
                                     fixed_E=(args.fixed, 0, 0), units=args.units,
                                     constants=_constants())
        else:
            rows = spectra.sweep_map(ns, "E", 0.0, args.vmax, args.steps, (1, 0, 0),
                                     fixed_B=(0, 0, args.fixed), units=args.units,
                                     constants=_constants())
    except ValueError as exc:
        err.write(f"rlso4 {args.command}: {exc}\n")
        return 2
    out.write(emit(rows, args.format).decode())
    return 0


def _cmd_kepler(args, out, err) -> int:
    try:
        orbit = kepler.orbit_from(args.mu, args.kappa, args.lam, args.e)
    except ValueError as exc:
        err.write(f"rlso4 kepler: {exc}\n")
        return 2
    if args.trajectory:
        out.write(kepler.trajectory_csv(orbit, args.trajectory))
        return 0
    reports = []
    if args.check in ("pauli", "all"):
        t0 = time.perf_counter()
        r = kepler.verify_classical_pauli(orbit)
        r.elapsed = time.perf_counter() - t0
        reports.append(r)
    if args.check in ("tau", "all"):
        t0 = time.perf_counter()
        r = kepler.verify_total_derivative(orbit)
        r.elapsed = time.perf_counter() - t0
        reports.append(r)
        if orbit.e > 0:
            t0 = time.perf_counter()
            a, b, resid = kepler.solve_tau_ansatz(orbit)
            ok = abs(a - 0.5) <= 1e-6 and abs(b + 1) <= 1e-6
            reports.append(kepler.CheckReport("tau_ansatz", ok, max(abs(a - 0.5), abs(b + 1)),
                                              {"a": a, "b": b, "fit_residual": resid},
                                              time.perf_counter() - t0))
    if args.format == "json":
        out.write(json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n".join(r.line() for r in reports) + "\n")
    return 0 if all(r.passed for r in reports) else 1


_COMMANDS = {
    "verify": _cmd_verify,
    "reduce": _cmd_reduce,
    "rep-check": _cmd_rep_check,
    "spectrum": _cmd_spectrum,
    "stark-map": _cmd_map,
    "crossed-map": _cmd_map,
    "kepler": _cmd_kepler,
}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, out, err)
    except (OSError, ValueError) as exc:
        err.write(f"rlso4 {args.command}: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
