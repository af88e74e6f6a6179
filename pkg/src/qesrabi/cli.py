"""Command-line interface: ``qesrabi <command> [options]``.

Exit codes: 0 success, 2 usage or parameter error, 3 certification failure.
Data files are deterministic; each one written with ``--out`` gets a
``<out>.manifest.json`` sidecar holding the command, parameters, version,
timestamp and SHA-256 digest.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import (
    Family,
    SubspaceSpec,
    build_generators,
    check_quadratic_relations,
    differential_action_error,
)
from .fock import FockTruncation, SupercriticalCouplingError, nearest_eigenvalue, spectrum
from .reduction import (
    QesBranch,
    TprhParams,
    closed_form_g,
    determinant_roots,
    has_closed_form,
)
from .special_functions import KummerError
from .wavefunctions import (
    assemble_phi1,
    compare_up_to_scale,
    QuadratureWindowError,
    decay_exponent,
    reference_case,
    residual_report,
    sample,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CERT = 3

RELATION_TOL = 1e-9
CLOSED_FORM_TOL = 1e-9
RESIDUAL_TOL = 1e-8
CROSSCHECK_TOL = 1e-5
SPOT_TS = (-2.0, -0.5, 0.3, 1.1, 2.7)


class UsageError(ValueError):
    """Bad parameters; mapped to exit code 2."""


@dataclass
class RunManifest:
    command: str
    params: dict
    version: str = __version__
    timestamp: str = ""
    outputs: dict[str, str] = field(default_factory=dict)


def fmt(v) -> str:
    """17 significant digits, empty cell for missing values."""
    if v is None:
        return ""
    return f"{float(v):.17g}"


def _csv_text(header: list[str], rows: list[list], comments: list[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None, command: str, params: dict):
    """Write ``text`` to ``out`` (plus manifest) or to stdout."""
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    data = text.encode("utf-8")
    path.write_bytes(data)
    manifest = RunManifest(
        command,
        params,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(),
        outputs={path.name: hashlib.sha256(data).hexdigest()},
    )
    Path(f"{out}.manifest.json").write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")


def _params(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}


# --- commands -----------------------------------------------------------------


def cmd_verify_algebra(args) -> int:
    spec = SubspaceSpec(Family.parse(args.family), args.n, args.alpha, args.s)
    gens = build_generators(spec)
    report = check_quadratic_relations(spec)
    action = differential_action_error(spec, SPOT_TS)
    with np.printoptions(precision=12, suppress=True, linewidth=120):
        print(f"family={spec.family.value} N={spec.N} alpha={spec.alpha!r} s={spec.s!r} dim={spec.dim}")
        print("basis order: " + ("plus block then minus block" if spec.family is Family.R2 else "n = 0..N"))
        print("J- =")
        print(gens.jminus.entries)
        print("J+ =")
        print(gens.jplus.entries)
    print("relation  variant          canon.   residual")
    for r in report.residuals:
        sig = ",".join(f"{e:+d}" for e in r.variant)
        print(f"{r.relation:8s}  ({sig:14s})  {'*' if r.canonical else ' ':7s}  {r.residual:.3e}")
    for name in ("[J+,S]", "[J-,S]"):
        b = report.best(name)
        print(f"best {name}: variant {b.variant} residual {b.residual:.3e}")
    print(f"differential action spot check (t in {list(SPOT_TS)}): max rel. error {action:.3e}")
    ok = report.best_residual < RELATION_TOL and action < RELATION_TOL
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CERT


def _pair_closed(roots: list[float], closed: list[float]) -> list[tuple[float | None, float | None]]:
    """Match every closed-form value to its nearest numerical root."""
    out = []
    for gc in closed:
        if not roots:
            out.append((gc, None))
            continue
        gn = min(roots, key=lambda r: abs(r - gc))
        out.append((gc, abs(gn - gc)))
    return out


def cmd_solve(args) -> int:
    branch = QesBranch.parse(args.branch)
    lo, hi, steps = args.omega0_min, args.omega0_max, args.steps
    if not (lo > 0 and hi >= lo and steps >= 1) or (steps > 1 and hi == lo):
        raise UsageError(f"empty or invalid omega0 window [{lo}, {hi}] with {steps} steps")
    closed = has_closed_form(branch)
    grid = np.linspace(lo, hi, steps)
    rows, ncols, failed = [], 2, False
    results = []
    for w in grid:
        sols = determinant_roots(branch, float(w))
        ncols = max(ncols, len(sols))
        results.append((float(w), sols))
    header = ["omega0"]
    for i in range(ncols):
        header += [f"g_{i + 1}", f"E_{i + 1}"]
    if closed:
        for i in range(2):
            header += [f"g_closed_{i + 1}", f"abs_diff_{i + 1}"]
    for w, sols in results:
        row = [w]
        for i in range(ncols):
            row += [sols[i].g, sols[i].energy] if i < len(sols) else [None, None]
        if closed:
            pts = [p.g for p in closed_form_g(branch, w) if not p.boundary]
            pairs = _pair_closed([s.g for s in sols], pts)
            for i in range(2):
                if i < len(pairs):
                    gc, diff = pairs[i]
                    row += [gc, diff]
                    failed |= diff is None or diff >= CLOSED_FORM_TOL
                else:
                    row += [None, None]
        rows.append(row)
    _emit(_csv_text(header, rows), args.out, "solve", _params(args))
    if failed:
        print(f"closed-form discrepancy above {CLOSED_FORM_TOL:g}", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.g < 0:
        raise UsageError(f"coupling g={args.g} must be non-negative")
    try:
        res = spectrum(
            TprhParams(args.omega0, args.g),
            FockTruncation(args.nmax),
            allow_supercritical=args.allow_supercritical,
        )
    except SupercriticalCouplingError as exc:
        raise UsageError(str(exc)) from exc
    payload = {
        "omega0": args.omega0,
        "g": args.g,
        "nmax": res.nmax_used,
        "convergence_gap": res.convergence_gap,
        "converged": res.converged,
        "supercritical": res.supercritical,
        "eigenvalues": [float(v) for v in res.eigenvalues],
    }
    _emit(json.dumps(payload, indent=1) + "\n", args.out, "oracle", _params(args))
    return EXIT_OK


def cmd_wavefunction(args) -> int:
    if args.samples < 1:
        raise UsageError(f"samples must be positive, got {args.samples}")
    if not args.xmax > 0:
        raise UsageError(f"xmax must be positive, got {args.xmax}")
    ref = None
    if args.case:
        if args.branch or args.omega0 is not None:
            raise UsageError("--case excludes --branch/--omega0")
        ref = reference_case(args.case)
        wf = ref.wavefunction()
    else:
        if not args.branch or args.omega0 is None:
            raise UsageError("give --case, or both --branch and --omega0")
        sols = determinant_roots(QesBranch.parse(args.branch), args.omega0)
        if not 1 <= args.root <= len(sols):
            raise UsageError(f"root {args.root} requested, {len(sols)} found at omega0={args.omega0}")
        wf = assemble_phi1(sols[args.root - 1])
    rep = residual_report(wf)
    xs = np.linspace(-args.xmax, args.xmax, args.samples)
    table = sample(wf, xs)
    comments = [
        f"branch={wf.branch}",
        f"omega0={fmt(wf.solution.omega0)}",
        f"g={fmt(wf.solution.g)}",
        f"E={fmt(wf.energy)}",
        f"residual={rep.residual:.6e}",
        f"quadrature_window={fmt(rep.window)}",
        f"decay_exponent={fmt(decay_exponent(wf))}",
        f"c={fmt(wf.gauge_c)}",
        f"xi={fmt(wf.arg_scale_xi)}",
    ]
    if ref is not None:
        cmp = compare_up_to_scale(wf, ref, xs)
        comments.append(f"reference_case={ref.tag}")
        comments.append(f"reference_deviation={cmp.deviation:.6e}")
    text = _csv_text(["x", "phi1", "phi2"], table.tolist(), comments)
    _emit(text, args.out, "wavefunction", _params(args))
    if not rep.residual < RESIDUAL_TOL:
        print(f"residual {rep.residual:.3e} exceeds {RESIDUAL_TOL:g}", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


def cmd_crosscheck(args) -> int:
    branch = QesBranch.parse(args.branch)
    sols = determinant_roots(branch, args.omega0)
    if not sols:
        print(f"no QES points for {branch} at omega0={args.omega0}")
        return EXIT_OK
    print("g                        E_qes                    E_oracle                 abs_diff")
    failed = False
    for sol in sols:
        res = spectrum(TprhParams(args.omega0, sol.g), FockTruncation(args.nmax))
        lam, diff = nearest_eigenvalue(res, sol.energy)
        failed |= not diff < CROSSCHECK_TOL
        print(f"{fmt(sol.g):24s} {fmt(sol.energy):24s} {fmt(lam):24s} {diff:.3e}")
    print("FAIL" if failed else "PASS")
    return EXIT_CERT if failed else EXIT_OK


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qesrabi", description="QES structure of the two-photon Rabi model")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("verify-algebra", help="generator matrices and commutation relations")
    a.add_argument("--family", required=True, choices=["r2", "r3", "R2", "R3"])
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--alpha", type=float, required=True)
    a.add_argument("--s", type=float, required=True)
    a.set_defaults(func=cmd_verify_algebra)

    s = sub.add_parser("solve", help="QES couplings over an omega0 window")
    s.add_argument("--branch", required=True, help="e.g. r2:0 or r3:2")
    s.add_argument("--omega0-min", type=float, required=True)
    s.add_argument("--omega0-max", type=float, required=True)
    s.add_argument("--steps", type=int, default=11)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="truncated number-basis spectrum (JSON)")
    o.add_argument("--omega0", type=float, required=True)
    o.add_argument("--g", type=float, required=True)
    o.add_argument("--nmax", type=int, default=400)
    o.add_argument("--allow-supercritical", action="store_true")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    w = sub.add_parser("wavefunction", help="sampled QES eigenfunction (CSV)")
    w.add_argument("--case", choices=["b1", "b2"])
    w.add_argument("--branch")
    w.add_argument("--omega0", type=float)
    w.add_argument("--root", type=int, default=1, help="1-based index among roots in ascending g")
    w.add_argument("--xmax", type=float, default=6.0)
    w.add_argument("--samples", type=int, default=241)
    w.add_argument("--out")
    w.set_defaults(func=cmd_wavefunction)

    c = sub.add_parser("crosscheck", help="QES energies against the number-basis oracle")
    c.add_argument("--branch", required=True)
    c.add_argument("--omega0", type=float, required=True)
    c.add_argument("--nmax", type=int, default=400)
    c.set_defaults(func=cmd_crosscheck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for name, v in vars(args).items():
            if isinstance(v, float) and not math.isfinite(v):
                raise UsageError(f"--{name.replace('_', '-')} must be finite")
        return args.func(args)
    except QuadratureWindowError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    except (UsageError, KummerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
