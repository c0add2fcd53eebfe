"""Command-line interface ``erestab``.

Every subcommand writes CSV (default) or JSON to stdout or ``--out``.
``--config PATH`` reads a flat ``key = value`` file whose keys mirror the
long flags of the chosen subcommand (dashes or underscores); values given
on the command line win over the file.

Exit codes: 0 on success, 1 on invalid input or usage, 2 on solver failure.
"""

from __future__ import annotations

import argparse
import cmath
import contextlib
import math
import sys
from typing import Any, Iterator, Sequence, TextIO

import numpy as np

from .. import __version__
from ..errors import EreError, InputError, SolverError
from ..kepler_cc import MassTriple, solve_central_configuration
from ..maslov import N0_DEFAULT, N_MAX_DEFAULT, index_via_splitting, morse_index
from ..monodromy import dump_path_csv, integrate_path, period_map
from ..reduction import build_B, reduced_params
from ..spectral import DEFAULT_TOL, classify, eigenstructure, stability_verdict
from . import engine
from .io import emit
from .selftest import run_selftest

__all__ = ["build_parser", "cli_main", "main"]


class UsageError(Exception):
    """Raised by the parser instead of exiting."""

    def __init__(self, parser: argparse.ArgumentParser, message: str):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        raise UsageError(self, message)


def _floats(text: str) -> list[float]:
    """Comma-separated list of floats."""
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="flat key=value file mirroring the flags")
    p.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default csv)")


def _numerics(p: argparse.ArgumentParser, indices: bool = False) -> None:
    p.add_argument("--steps", type=int, default=None, help="RK4 steps per period (default: e-dependent)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="classification boundary tolerance")
    if indices:
        p.add_argument("--n0", type=int, default=N0_DEFAULT, help="initial Galerkin cutoff")
        p.add_argument("--nmax", type=int, default=N_MAX_DEFAULT, help="largest Galerkin cutoff")


def _masses(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--m1", type=float, required=required, help="mass of the left primary")
    p.add_argument("--m2", type=float, default=None, help="middle mass (default 1 - m1 - m3)")
    p.add_argument("--m3", type=float, required=required, help="mass of the right primary")


def _threads(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=None, help="worker count (default ERE_THREADS or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = _Parser(prog="erestab", description="Linear stability of elliptic relative equilibria.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("cc", help="central configuration and potential matrix for a mass triple")
    _masses(p, required=True)
    p.add_argument("--e", type=float, default=0.0, help="eccentricity used for the reduced parameters")
    _common(p)

    p = sub.add_parser("monodromy", help="period map of the linearized system")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--e", type=float, required=True)
    p.add_argument("--stride", type=int, default=32, help="sample stride of the path dump")
    p.add_argument("--dump", metavar="PATH", help="write the sampled path (theta + 16 entries) as CSV")
    p.add_argument("--project", type=_bool, default=False, help="apply symplectic projection")
    _numerics(p)
    _common(p)

    p = sub.add_parser("index", help="omega-Morse index and nullity")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--e", type=float, required=True)
    p.add_argument(
        "--omega-angle", type=_floats, default=[math.pi],
        help="comma-separated arguments of omega in radians (default pi, i.e. omega = -1)",
    )
    p.add_argument("--splitting", type=_bool, default=False, help="also report the splitting-number route")
    _numerics(p, indices=True)
    _common(p)

    p = sub.add_parser("classify", help="normal form and stability verdict")
    p.add_argument("--alpha", type=float, default=None, help="spectral gap (or give masses)")
    _masses(p, required=False)
    p.add_argument("--e", type=float, required=True)
    _numerics(p)
    _common(p)

    p = sub.add_parser("scan-ae", help="stability diagram over (alpha, e)")
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=3.0)
    p.add_argument("--alpha-n", type=int, default=301)
    p.add_argument("--e-min", type=float, default=0.0)
    p.add_argument("--e-max", type=float, default=0.9)
    p.add_argument("--e-n", type=int, default=101)
    p.add_argument("--indices", type=_bool, default=True, help="compute Galerkin indices per point")
    _numerics(p, indices=True)
    _threads(p)
    _common(p)

    p = sub.add_parser("scan-mass", help="stability map over the (m1, m3) plane")
    p.add_argument("--m1-min", type=float, default=0.0)
    p.add_argument("--m1-max", type=float, default=1.0)
    p.add_argument("--m1-n", type=int, default=201)
    p.add_argument("--m3-min", type=float, default=0.0)
    p.add_argument("--m3-max", type=float, default=1.0)
    p.add_argument("--m3-n", type=int, default=201)
    p.add_argument("--e", type=float, default=0.0)
    _numerics(p)
    _threads(p)
    _common(p)

    p = sub.add_parser("trace-curves", help="alpha_k, alpha_s, alpha_m as functions of e")
    p.add_argument("--e", type=_floats, required=True, help="comma-separated eccentricities")
    p.add_argument("--width", type=float, default=1e-8, help="bracket width")
    _numerics(p, indices=True)
    _threads(p)
    _common(p)

    p = sub.add_parser("symmetric", help="equal outer masses: m2 sweep and stability threshold")
    p.add_argument("--e", type=float, default=0.0)
    p.add_argument("--m2-n", type=int, default=101, help="number of sweep points on [0, m2-max]")
    p.add_argument("--m2-max", type=float, default=0.999)
    p.add_argument("--find-threshold", type=_bool, nargs="?", const=True, default=False)
    _numerics(p)
    _threads(p)
    _common(p)

    p = sub.add_parser("selftest", help="run the built-in reference checks")
    p.add_argument("--full", type=_bool, nargs="?", const=True, default=False, help="include slow checks")
    _common(p)
    return parser


# ----------------------------------------------------------------------------
# configuration file


def read_config(path: str) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise InputError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{number}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:  # argparse offers no public accessor
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _prescan(argv: Sequence[str]) -> tuple[str | None, str | None]:
    """Subcommand name and ``--config`` value, found without a full parse."""
    command = next((a for a in argv if not a.startswith("-")), None)
    config = None
    for k, token in enumerate(argv):
        if token == "--config" and k + 1 < len(argv):
            config = argv[k + 1]
        elif token.startswith("--config="):
            config = token.split("=", 1)[1]
    return command, config


def apply_config(parser: argparse.ArgumentParser, command: str, path: str) -> None:
    """Install config-file values as defaults of the ``command`` subparser."""
    values = read_config(path)
    sub = _subparser(parser, command)
    known = {a.dest: a for a in sub._actions}
    defaults: dict[str, Any] = {}
    for key, text in values.items():
        action = known.get(key)
        if action is None or key in ("config", "help"):
            raise InputError(f"unknown config key {key!r} for {command}")
        if action.type is not None:
            try:
                defaults[key] = action.type(text)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise InputError(f"config key {key!r}: {exc}") from exc
        else:
            defaults[key] = text
        action.required = False
    sub.set_defaults(**defaults)


# ----------------------------------------------------------------------------
# commands


@contextlib.contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    try:
        handle = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot write {path!r}: {exc.strerror}") from exc
    with handle:
        yield handle


def _mass_triple(args: argparse.Namespace) -> MassTriple:
    if args.m1 is None or args.m3 is None:
        raise InputError("give both --m1 and --m3")
    m2 = 1.0 - args.m1 - args.m3 if args.m2 is None else args.m2
    return MassTriple(args.m1, m2, args.m3)


def _config(args: argparse.Namespace, indices: bool = True) -> engine.ScanConfig:
    return engine.ScanConfig(
        steps=getattr(args, "steps", None),
        tol=getattr(args, "tol", DEFAULT_TOL),
        n0=getattr(args, "n0", N0_DEFAULT),
        n_max=getattr(args, "nmax", N_MAX_DEFAULT),
        indices=indices,
        threads=getattr(args, "threads", None),
    )


def _cmd_cc(args, out) -> int:
    masses = _mass_triple(args)
    cc = solve_central_configuration(masses)
    params = reduced_params(cc, args.e)
    row = {
        "m1": masses.m1,
        "m2": masses.m2,
        "m3": masses.m3,
        "x": cc.x,
        "a1x": float(cc.a1[0]),
        "a2x": float(cc.a2[0]),
        "a3x": float(cc.a3[0]),
        "a4x": float(cc.a4[0]),
        "a4y": float(cc.a4[1]),
        "mu": cc.mu,
        "d11": float(params.D[0, 0]),
        "d12": float(params.D[0, 1]),
        "d22": float(params.D[1, 1]),
        "lambda3": params.lambda3,
        "lambda4": params.lambda4,
        "alpha": params.alpha,
    }
    emit([row], list(row), out, args.format, ["erestab cc"])
    return 0


def _cmd_monodromy(args, out) -> int:
    from ..reduction import ReducedParams

    path = integrate_path(
        build_B(ReducedParams.from_alpha(args.alpha, args.e)),
        steps=args.steps,
        stride=args.stride,
        project=args.project,
    )
    if args.dump:
        with _output(args.dump) as handle:
            dump_path_csv(path, handle)
    rows = [
        {"row": i, **{f"c{j}": float(path.period_map[i, j]) for j in range(4)}} for i in range(4)
    ]
    comments = [
        "erestab monodromy",
        f"alpha={args.alpha!r} e={args.e!r} steps={path.steps}",
        f"sympl_residual={path.sympl_residual!r} reliable={path.reliable}",
    ]
    emit(rows, ["row", "c0", "c1", "c2", "c3"], out, args.format, comments)
    return 0


def _cmd_index(args, out) -> int:
    rows = []
    M = period_map(args.alpha, args.e, steps=args.steps).period_map if args.splitting else None
    i1 = morse_index(args.alpha, args.e, 1.0, args.n0, args.nmax).i_omega if args.splitting else None
    for angle in args.omega_angle:
        omega = cmath.exp(1j * angle)
        if abs(omega.imag) < 1e-15:
            omega = complex(round(omega.real), 0.0)
        record = morse_index(args.alpha, args.e, omega, args.n0, args.nmax)
        row = {
            "alpha": args.alpha,
            "e": args.e,
            "omega_angle": float(angle),
            "i_omega": record.i_omega,
            "nu_omega": record.nu_omega,
            "N_used": record.N_used,
            "converged": record.converged,
        }
        if args.splitting:
            try:
                row["splitting"] = index_via_splitting(i1, M, omega, args.tol)
            except SolverError as exc:
                row["splitting"] = f"MARGINAL:{type(exc).__name__}"
        rows.append(row)
    columns = list(rows[0]) if rows else ["alpha", "e"]
    emit(rows, columns, out, args.format, ["erestab index"])
    return 0


def _cmd_classify(args, out) -> int:
    masses = None
    if args.alpha is None:
        masses = _mass_triple(args)
        alpha = reduced_params(solve_central_configuration(masses), args.e).alpha
    else:
        alpha = args.alpha
    path = period_map(alpha, args.e, steps=args.steps)
    es = eigenstructure(path.period_map, args.tol)
    nf = classify(path.period_map, args.tol)
    sv = stability_verdict(nf)
    angles = list(nf.angles) + [float("nan"), float("nan")]
    row = {
        "alpha": float(alpha),
        "e": args.e,
        "form": engine.form_label(nf),
        "label": nf.label,
        "verdict": sv.verdict.value,
        "region": sv.region.value,
        "theta1": angles[0],
        "theta2": angles[1],
        "residual": path.sympl_residual,
    }
    for k, lam in enumerate(es.eigenvalues):
        row[f"lambda{k + 1}"] = complex(lam)
    for k, sign in enumerate(es.krein):
        row[f"krein{k + 1}"] = int(sign)
    comments = ["erestab classify"]
    if masses is not None:
        comments.append(f"masses={masses.m1!r},{masses.m2!r},{masses.m3!r}")
    emit([row], list(row), out, args.format, comments)
    return 0


def _grid(lo: float, hi: float, n: int) -> list[float]:
    if n < 1:
        raise InputError("grid resolution must be at least 1")
    return [float(v) for v in np.linspace(lo, hi, n)]


def _cmd_scan_ae(args, out) -> int:
    alphas = _grid(args.alpha_min, args.alpha_max, args.alpha_n)
    es = _grid(args.e_min, args.e_max, args.e_n)
    records = engine.scan_alpha_e(alphas, es, _config(args, args.indices))
    comments = [
        "erestab scan-ae",
        f"alpha=[{args.alpha_min!r},{args.alpha_max!r}]x{args.alpha_n} e=[{args.e_min!r},{args.e_max!r}]x{args.e_n}",
        f"steps={args.steps} tol={args.tol!r} n0={args.n0} nmax={args.nmax} indices={args.indices}",
    ]
    emit(records, engine.ScanRecord.COLUMNS, out, args.format, comments)
    return 0


def _cmd_scan_mass(args, out) -> int:
    m1 = _grid(args.m1_min, args.m1_max, args.m1_n)
    m3 = _grid(args.m3_min, args.m3_max, args.m3_n)
    records = engine.scan_mass_plane(m1, m3, args.e, _config(args, False))
    comments = [
        "erestab scan-mass",
        f"m1=[{args.m1_min!r},{args.m1_max!r}]x{args.m1_n} m3=[{args.m3_min!r},{args.m3_max!r}]x{args.m3_n} e={args.e!r}",
        "points with m1 <= 0, m3 <= 0 or m1 + m3 >= 1 are omitted",
    ]
    emit(records, engine.MassRecord.COLUMNS, out, args.format, comments)
    return 0


def _cmd_trace(args, out) -> int:
    samples = engine.trace_curves(args.e, args.width, _config(args))
    comments = ["erestab trace-curves"]
    for s in samples:
        if s.coincident:
            comments.append(f"e={s.e!r}: alpha_k={s.alpha_k:.9f}, alpha_s=alpha_m={s.alpha_s:.9f}")
        else:
            comments.append(
                f"e={s.e!r}: alpha_k={s.alpha_k:.9f}, alpha_s={s.alpha_s:.9f}, alpha_m={s.alpha_m:.9f}"
            )
    emit(samples, engine.CurveSample.COLUMNS, out, args.format, comments)
    return 0


def _cmd_symmetric(args, out) -> int:
    config = _config(args, False)
    comments = ["erestab symmetric", f"e={args.e!r}"]
    if args.find_threshold:
        m2_star = engine.find_symmetric_threshold(args.e, config=config, m2_max=args.m2_max)
        from ..reduction import symmetric_alpha

        alpha = symmetric_alpha(m2_star)
        comments.append(f"threshold m2*={m2_star:.6f} alpha={alpha:.9f}")
        emit([{"e": args.e, "m2_star": m2_star, "alpha": alpha}], ["e", "m2_star", "alpha"], out, args.format, comments)
        return 0
    rows = engine.symmetric_sweep(_grid(0.0, args.m2_max, args.m2_n), args.e, config)
    emit(rows, engine.SymmetricRow.COLUMNS, out, args.format, comments)
    return 0


def _cmd_selftest(args, out) -> int:
    results = run_selftest(full=args.full)
    rows = [{"check": r.name, "status": "PASS" if r.passed else "FAIL", "detail": r.detail, "seconds": round(r.seconds, 3)} for r in results]
    emit(rows, ["check", "status", "detail", "seconds"], out, args.format, ["erestab selftest"])
    return 0 if all(r.passed for r in results) else 2


_COMMANDS = {
    "cc": _cmd_cc,
    "monodromy": _cmd_monodromy,
    "index": _cmd_index,
    "classify": _cmd_classify,
    "scan-ae": _cmd_scan_ae,
    "scan-mass": _cmd_scan_mass,
    "trace-curves": _cmd_trace,
    "symmetric": _cmd_symmetric,
    "selftest": _cmd_selftest,
}


def cli_main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        command, config = _prescan(argv)
        if config is not None and command in _COMMANDS:
            apply_config(parser, command, config)
        args = parser.parse_args(argv)
        with _output(args.out) as out:
            return _COMMANDS[args.command](args, out)
    except UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"{exc.parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except InputError as exc:
        print(f"erestab: input error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, EreError) as exc:
        print(f"erestab: solver failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2


def main() -> None:
    """Console-script entry point."""
    sys.exit(cli_main())
