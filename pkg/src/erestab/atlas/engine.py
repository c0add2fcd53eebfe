"""Scanning engine: stability diagrams, curve tracing and mass-plane maps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from ..errors import EreError, InconsistencyError, InputError, ThresholdNotFoundError
from ..kepler_cc import MassTriple, solve_central_configuration, solve_symmetric_y
from ..maslov import N0_DEFAULT, N_MAX_DEFAULT, morse_index, negative_count
from ..monodromy import integrate_path, period_map
from ..reduction import build_B, reduced_params, symmetric_alpha, symmetric_z
from ..spectral import (
    DEFAULT_TOL,
    NormalForm,
    Verdict,
    classify,
    eigenstructure,
    is_hyperbolic,
    stability_verdict,
)

__all__ = [
    "ScanConfig",
    "ScanRecord",
    "MassRecord",
    "SymmetricRow",
    "CurveSample",
    "worker_count",
    "parallel_map",
    "form_label",
    "evaluate_point",
    "scan_alpha_e",
    "scan_mass_plane",
    "symmetric_sweep",
    "find_symmetric_threshold",
    "trace_curves",
    "trace_curve_e",
]

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class ScanConfig:
    """Numerical settings shared by all scans.

    Attributes
    ----------
    steps : int or None
        RK4 steps per period (``None`` selects the eccentricity-dependent default).
    tol : float
        Classification boundary tolerance.
    n0, n_max : int
        Galerkin cutoffs.
    indices : bool
        Compute Galerkin indices for each point.
    threads : int or None
        Worker count; ``None`` reads ``ERE_THREADS`` or uses the CPU count.
    """

    steps: int | None = None
    tol: float = DEFAULT_TOL
    n0: int = N0_DEFAULT
    n_max: int = N_MAX_DEFAULT
    indices: bool = True
    threads: int | None = None


@dataclass(frozen=True)
class ScanRecord:
    """One row of an ``(alpha, e)`` scan."""

    alpha: float
    e: float
    i1: int = -1
    im1: int = -1
    nu1: int = -1
    num1: int = -1
    form: str = ""
    verdict: str = ""
    theta1: float = float("nan")
    theta2: float = float("nan")
    residual: float = float("nan")
    region: str = field(default="", compare=False)
    label: str = field(default="", compare=False)
    marginal: bool = field(default=False, compare=False)
    converged: bool = field(default=True, compare=False)

    COLUMNS = ("alpha", "e", "i1", "im1", "nu1", "num1", "form", "verdict", "theta1", "theta2", "residual")


@dataclass(frozen=True)
class MassRecord:
    """One row of an ``(m1, m3)`` mass-plane scan."""

    m1: float
    m2: float
    m3: float
    x: float = float("nan")
    a4x: float = float("nan")
    a4y: float = float("nan")
    alpha: float = float("nan")
    form: str = ""
    verdict: str = ""

    COLUMNS = ("m1", "m2", "m3", "x", "a4x", "a4y", "alpha", "form", "verdict")


@dataclass(frozen=True)
class SymmetricRow:
    """Closed-form symmetric chain ``m2 -> (y, z, alpha)`` plus verdict."""

    m2: float
    y: float
    z: float
    alpha: float
    verdict: str

    COLUMNS = ("m2", "y", "z", "alpha", "verdict")


@dataclass(frozen=True)
class CurveSample:
    """Traced ``alpha_k <= alpha_s <= alpha_m`` at one eccentricity."""

    e: float
    alpha_k: float
    alpha_s: float
    alpha_m: float
    width_k: float
    width_s: float
    width_m: float
    coincident: bool

    COLUMNS = ("e", "alpha_k", "alpha_s", "alpha_m", "width_k", "width_s", "width_m", "coincident")


def worker_count(requested: int | None = None) -> int:
    """Worker pool size: explicit request, then ``ERE_THREADS``, then CPU count."""
    if requested is not None and requested > 0:
        return int(requested)
    env = os.environ.get("ERE_THREADS", "").strip()
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise InputError(f"ERE_THREADS must be an integer, got {env!r}") from exc
        if value > 0:
            return value
    return max(1, os.cpu_count() or 1)


def parallel_map(func: Callable[[T], R], items: Sequence[T], threads: int | None = None) -> list[R]:
    """Map over ``items`` with a thread pool, preserving input order."""
    n = worker_count(threads)
    if n == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def form_label(nf: NormalForm) -> str:
    """CSV form column: the tag, prefixed with ``MARGINAL:`` at boundaries."""
    return f"MARGINAL:{nf.tag}" if nf.marginal else nf.tag


def evaluate_point(alpha: float, e: float, config: ScanConfig = ScanConfig()) -> ScanRecord:
    """Monodromy, normal form, verdict and indices at one ``(alpha, e)``.

    Failures are reported in the row (``form == "ERROR"``) rather than raised.
    """
    try:
        path = period_map(alpha, e, steps=config.steps)
        nf = classify(path.period_map, config.tol)
        sv = stability_verdict(nf)
        angles = list(nf.angles) + [float("nan"), float("nan")]
        values = dict(
            alpha=float(alpha),
            e=float(e),
            form=form_label(nf),
            verdict=sv.verdict.value,
            theta1=angles[0],
            theta2=angles[1],
            residual=path.sympl_residual,
            region=sv.region.value,
            label=nf.label,
            marginal=nf.marginal,
        )
        if config.indices:
            r1 = morse_index(alpha, e, 1.0, config.n0, config.n_max)
            rm1 = morse_index(alpha, e, -1.0, config.n0, config.n_max)
            values.update(
                i1=r1.i_omega,
                nu1=r1.nu_omega,
                im1=rm1.i_omega,
                num1=rm1.nu_omega,
                converged=r1.converged and rm1.converged,
            )
        return ScanRecord(**values)
    except EreError as exc:
        return ScanRecord(alpha=float(alpha), e=float(e), form="ERROR", verdict=type(exc).__name__, label=str(exc))


def scan_alpha_e(
    alphas: Iterable[float], es: Iterable[float], config: ScanConfig = ScanConfig()
) -> list[ScanRecord]:
    """Evaluate every grid point; rows are ordered by ``e`` then ``alpha``."""
    points = [(float(a), float(e)) for e in es for a in alphas]
    return parallel_map(lambda p: evaluate_point(p[0], p[1], config), points, config.threads)


def _mass_point(m1: float, m3: float, e: float, config: ScanConfig) -> MassRecord:
    m2 = 1.0 - m1 - m3
    try:
        masses = MassTriple(m1, m2, m3)
        cc = solve_central_configuration(masses)
        params = reduced_params(cc, e)
        path = integrate_path(build_B(params), steps=config.steps)
        nf = classify(path.period_map, config.tol)
        return MassRecord(
            m1=m1,
            m2=m2,
            m3=m3,
            x=cc.x,
            a4x=float(cc.a4[0]),
            a4y=float(cc.a4[1]),
            alpha=params.alpha,
            form=form_label(nf),
            verdict=stability_verdict(nf).verdict.value,
        )
    except EreError as exc:
        return MassRecord(m1=m1, m2=m2, m3=m3, form="ERROR", verdict=type(exc).__name__)


def scan_mass_plane(
    m1_values: Iterable[float], m3_values: Iterable[float], e: float, config: ScanConfig = ScanConfig()
) -> list[MassRecord]:
    """Verdicts over the ``(m1, m3)`` plane; points with ``m1 + m3 >= 1`` are skipped."""
    points = [
        (float(m1), float(m3))
        for m3 in m3_values
        for m1 in m1_values
        if m1 > 0.0 and m3 > 0.0 and m1 + m3 < 1.0
    ]
    return parallel_map(lambda p: _mass_point(p[0], p[1], e, config), points, config.threads)


def _verdict_at(alpha: float, e: float, config: ScanConfig) -> Verdict:
    nf = classify(period_map(alpha, e, steps=config.steps).period_map, config.tol)
    return stability_verdict(nf).verdict


def symmetric_sweep(m2_grid: Iterable[float], e: float, config: ScanConfig = ScanConfig()) -> list[SymmetricRow]:
    """Equal outer masses: ``(m2, y, z, alpha, verdict)`` for each ``m2``."""

    def row(m2: float) -> SymmetricRow:
        alpha = symmetric_alpha(m2)
        return SymmetricRow(
            m2=float(m2),
            y=solve_symmetric_y(m2),
            z=symmetric_z(m2),
            alpha=alpha,
            verdict=_verdict_at(alpha, e, config).value,
        )

    return parallel_map(row, [float(m) for m in m2_grid], config.threads)


def find_symmetric_threshold(
    e: float = 0.0,
    grid: int = 200,
    tol: float = 1e-10,
    m2_max: float = 0.999,
    config: ScanConfig = ScanConfig(),
) -> float:
    """Smallest ``m2*`` such that every ``m2 in (m2*, 1)`` is linearly stable.

    A coarse sweep over ``[0, m2_max]`` locates the last unstable grid value;
    bisection on the verdict then refines the flip.  ``m2_max`` stays away
    from 1, where ``alpha -> 3`` drives two multipliers into the boundary
    tolerance around 1.
    """
    m2_values = np.linspace(0.0, m2_max, grid + 1)
    stable = parallel_map(
        lambda m2: _verdict_at(symmetric_alpha(m2), e, config).linearly_stable, list(m2_values), config.threads
    )
    if not stable[-1]:
        raise ThresholdNotFoundError("the near-collinear end of the sweep is not stable")
    unstable_idx = [i for i, s in enumerate(stable) if not s]
    if not unstable_idx:
        raise ThresholdNotFoundError("no unstable mass ratio in the sweep")
    lo, hi = float(m2_values[unstable_idx[-1]]), float(m2_values[unstable_idx[-1] + 1])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _verdict_at(symmetric_alpha(mid), e, config).linearly_stable:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _bisect(predicate: Callable[[float], bool], lo: float, hi: float, width: float) -> tuple[float, float]:
    """Shrink ``[lo, hi]`` with ``predicate(lo)`` false and ``predicate(hi)`` true."""
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def _jump_bracket(e: float, level: int, lo: float, hi: float, width: float, n: int, n_max: int) -> tuple[float, float]:
    """Bracket where the raw ``-1`` count first reaches ``level``.

    The bracket is recomputed with a doubled cutoff until the counts at its
    ends are unchanged by doubling.
    """
    while True:
        a, b = _bisect(lambda x: negative_count(x, e, -1.0, n) >= level, lo, hi, width)
        if 2 * n > n_max:
            return a, b
        ok_lo = negative_count(a, e, -1.0, 2 * n) < level
        ok_hi = negative_count(b, e, -1.0, 2 * n) >= level
        if ok_lo and ok_hi:
            return a, b
        n *= 2


def trace_curve_e(
    e: float,
    width: float = 1e-8,
    config: ScanConfig = ScanConfig(),
) -> CurveSample:
    """Trace ``alpha_k(e)``, ``alpha_s(e)`` and ``alpha_m(e)``.

    ``alpha_s`` and ``alpha_m`` are the first values of ``alpha`` at which
    the ``-1`` index reaches 1 and 2; ``alpha_k`` bounds the hyperbolic
    region and is located on ``[0, alpha_s]``.

    Raises
    ------
    InconsistencyError
        If the ``-1`` index does not climb from 0 at ``alpha = 0`` to 2 at
        ``alpha = 3``.
    """
    n = config.n0
    start, end = negative_count(0.0, e, -1.0, n), negative_count(3.0, e, -1.0, n)
    if start != 0 or end != 2:
        raise InconsistencyError(f"-1 index profile runs from {start} to {end}, expected 0 to 2")
    s_lo, s_hi = _jump_bracket(e, 1, 0.0, 3.0, width, n, config.n_max)
    m_lo, m_hi = _jump_bracket(e, 2, s_lo, 3.0, width, n, config.n_max)
    coincident = m_lo <= s_hi

    def hyperbolic(alpha: float) -> bool:
        return is_hyperbolic(period_map(alpha, e, steps=config.steps).period_map)

    k_lo, k_hi = 0.0, s_hi
    if not hyperbolic(k_lo):
        raise InconsistencyError("period map at alpha = 0 is not hyperbolic")
    k_lo, k_hi = _bisect(lambda x: not hyperbolic(x), k_lo, k_hi, min(width, 1e-10))
    alpha_k = _polish_collision(e, k_lo, k_hi, config)
    alpha_s = 0.5 * (s_lo + s_hi)
    alpha_m = alpha_s if coincident else 0.5 * (m_lo + m_hi)
    return CurveSample(
        e=float(e),
        alpha_k=alpha_k,
        alpha_s=alpha_s,
        alpha_m=alpha_m,
        width_k=k_hi - k_lo,
        width_s=s_hi - s_lo,
        width_m=(s_hi - s_lo) if coincident else m_hi - m_lo,
        coincident=coincident,
    )


def _polish_collision(e: float, lo: float, hi: float, config: ScanConfig) -> float:
    """Secant refinement on the discriminant when the boundary is a Krein collision."""
    def disc(alpha: float) -> float:
        return eigenstructure(period_map(alpha, e, steps=config.steps).period_map, config.tol).disc

    d_lo, d_hi = disc(lo), disc(hi)
    if d_lo * d_hi >= 0.0 or d_lo == d_hi:
        return 0.5 * (lo + hi)
    root = lo - d_lo * (hi - lo) / (d_hi - d_lo)
    return min(max(root, lo), hi)


def trace_curves(e_list: Iterable[float], width: float = 1e-8, config: ScanConfig = ScanConfig()) -> list[CurveSample]:
    """:func:`trace_curve_e` over several eccentricities (in input order)."""
    return parallel_map(lambda e: trace_curve_e(e, width, config), [float(e) for e in e_list], config.threads)


def record_fields(record) -> list[str]:
    """Column names of a record type."""
    return list(getattr(record, "COLUMNS", [f.name for f in fields(record)]))
