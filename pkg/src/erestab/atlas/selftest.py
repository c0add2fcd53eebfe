"""Built-in reference checks against closed-form values of the circular case.

``run_selftest()`` runs the fast checks; ``run_selftest(full=True)`` adds
the Galerkin index table.  Each check returns a :class:`CheckResult`.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..kepler_cc import KeplerOrbit, MassTriple, solve_central_configuration, solve_symmetric_y
from ..maslov import morse_index
from ..monodromy import monodromy_circular, period_map
from ..reduction import build_D, canonical_frame, ere_state, inertial_to_reduced, symmetric_alpha
from ..spectral import Verdict, classify, stability_verdict

__all__ = ["CheckResult", "run_selftest", "FAST_CHECKS", "SLOW_CHECKS"]

SQRT2PI = 2.0 * math.pi - math.sqrt(2.0) * math.pi


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _circular_thresholds() -> tuple[bool, str]:
    from .engine import trace_curve_e

    c = trace_curve_e(0.0)
    err_k = abs(c.alpha_k - 2.0 * math.sqrt(2.0))
    err_s = abs(c.alpha_s - math.sqrt(33.0) / 2.0)
    err_m = abs(c.alpha_m - math.sqrt(33.0) / 2.0)
    ok = c.coincident and max(err_k, err_s, err_m) <= 1e-6
    return ok, f"alpha_k={c.alpha_k:.9f} alpha_s={c.alpha_s:.9f} alpha_m={c.alpha_m:.9f}"


def _circular_forms() -> tuple[bool, str]:
    failures = []

    nf = classify(period_map(1.0, 0.0).period_map)
    if stability_verdict(nf).verdict is not Verdict.COMPLEX_SADDLE:
        failures.append("alpha=1")

    nf = classify(period_map(2.0 * math.sqrt(2.0), 0.0).period_map)
    n2 = [b for b in nf.blocks if b.kind == "N2"]
    if not (n2 and n2[0].trivial and abs(cmath.exp(1j * n2[0].theta) - cmath.exp(1j * math.sqrt(2) * math.pi)) < 1e-6):
        failures.append("alpha=2sqrt2")

    nf = classify(period_map(2.85, 0.0).period_map)
    if not (nf.tag == "EE" and any(0.0 < t < math.pi for t in nf.angles)):
        failures.append("alpha=2.85")

    M = period_map(math.sqrt(33.0) / 2.0, 0.0).period_map
    ev = np.linalg.eigvals(M)
    target = cmath.exp(1j * math.sqrt(3.0) * math.pi)
    minus_one = sorted(abs(ev + 1.0))[:2]
    others = [min(abs(ev - target)), min(abs(ev - target.conjugate()))]
    if classify(M).tag != "-I2<>R" or max(minus_one) > 1e-6 or max(others) > 1e-6:
        failures.append("alpha=sqrt33/2")

    nf = classify(period_map(2.95, 0.0).period_map)
    if not (nf.tag == "EE" and all(math.pi < t <= 2.0 * math.pi for t in nf.angles)):
        failures.append("alpha=2.95")
    return not failures, "all five forms" if not failures else "failed: " + ", ".join(failures)


def _symmetric_endpoints() -> tuple[bool, str]:
    y0, a0 = solve_symmetric_y(0.0), symmetric_alpha(0.0)
    y1, a1 = solve_symmetric_y(1.0 - 1e-8), symmetric_alpha(1.0 - 1e-8)
    ok = abs(y0 - math.sqrt(3.0)) <= 1e-10 and abs(a0 - 1.5) <= 1e-10 and abs(y1 - 1.0) <= 1e-3 and abs(a1 - 3.0) <= 1e-3
    return ok, f"y(0)={y0!r} alpha(0)={a0!r} y(1-)={y1:.6f} alpha(1-)={a1:.6f}"


def _symmetric_threshold() -> tuple[bool, str]:
    from .engine import find_symmetric_threshold

    m2 = find_symmetric_threshold(0.0)
    gap = abs(symmetric_alpha(m2) - 2.0 * math.sqrt(2.0))
    return abs(m2 - 0.854) <= 1e-3 and gap <= 1e-5, f"m2*={m2:.6f} |alpha-2sqrt2|={gap:.2e}"


def _reduction_fixed_point() -> tuple[bool, str]:
    worst = 0.0
    cc = canonical_frame(solve_central_configuration(MassTriple(0.2, 0.5, 0.3)))
    for e in (0.0, 0.3, 0.7):
        orbit = KeplerOrbit(e=e, mu=cc.mu)
        sigma = orbit.sigma
        target = np.array([0.0, sigma, sigma, 0.0])
        for t in np.linspace(0.0, orbit.period, 100):
            P, q = ere_state(orbit, cc.a4, t)
            Z, z = inertial_to_reduced(P, q, float(t), orbit)
            worst = max(worst, float(np.max(np.abs(np.concatenate([Z, z]) - target))))
    return worst <= 1e-10, f"max error {worst:.2e}"


def _circular_oracle() -> tuple[bool, str]:
    worst = 0.0
    for alpha in np.linspace(0.0, 3.0, 13):
        diff = period_map(float(alpha), 0.0).period_map - monodromy_circular(float(alpha))
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst <= 1e-8, f"max |RK4 - exp| = {worst:.2e}"


def _trace_D() -> tuple[bool, str]:
    rng = np.random.default_rng(20240601)
    worst_tr, worst_det = 0.0, math.inf
    for _ in range(200):
        w = rng.dirichlet(np.ones(3))
        D = build_D(solve_central_configuration(MassTriple(*w)))
        worst_tr = max(worst_tr, abs(float(np.trace(D)) - 3.0))
        worst_det = min(worst_det, float(np.linalg.det(D)))
    return worst_tr <= 1e-10 and worst_det >= -1e-12, f"|tr D - 3| <= {worst_tr:.1e}, min det {worst_det:.4f}"


def _index_table() -> tuple[bool, str]:
    bad = []
    for e in (0.0, 0.2, 0.4, 0.6, 0.8):
        for alpha in np.arange(0.0, 3.01, 0.25):
            if morse_index(float(alpha), e, 1.0).i_omega != 0:
                bad.append(f"i1({alpha:g},{e:g})")
    for e in (0.0, 0.2, 0.5, 0.8):
        r3m, r31 = morse_index(3.0, e, -1.0), morse_index(3.0, e, 1.0)
        r0m = morse_index(0.0, e, -1.0)
        if r3m.i_omega != 2 or r31.nu_omega != 3 or r0m.i_omega != 0 or r0m.nu_omega != 0:
            bad.append(f"endpoints e={e:g}")
    return not bad, "table reproduced" if not bad else "failed: " + ", ".join(bad)


FAST_CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("circular thresholds", _circular_thresholds),
    ("circular normal forms", _circular_forms),
    ("symmetric endpoints", _symmetric_endpoints),
    ("symmetric stability threshold", _symmetric_threshold),
    ("reduction fixed point", _reduction_fixed_point),
    ("circular exponential oracle", _circular_oracle),
    ("trace and determinant of D", _trace_D),
]

SLOW_CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("index table", _index_table),
]


def run_selftest(full: bool = False) -> list[CheckResult]:
    """Run the checks and return one result per check (exceptions count as failures)."""
    results = []
    for name, check in FAST_CHECKS + (SLOW_CHECKS if full else []):
        start = time.perf_counter()
        try:
            passed, detail = check()
        except Exception as exc:  # a crashing check is reported, not propagated
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
    return results
