"""Fundamental solution and period map of the linearized system.

``integrate_path`` runs a fixed-step RK4 on ``[0, 2 pi]`` and audits the
symplecticity of every recorded sample.  For the circular orbit the period
map has the closed form ``exp(2 pi J B0)``, exposed as
:func:`monodromy_circular` and used as an oracle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from scipy.linalg import expm, sqrtm

from . import _kernels
from .errors import IntegrationError, InputError
from .reduction import J4, LinearSystemCoeff, ReducedParams, build_B

__all__ = [
    "RESIDUAL_RELIABLE",
    "RESIDUAL_FAIL",
    "SymplecticPath",
    "default_steps",
    "integrate_path",
    "period_map",
    "monodromy_circular",
    "iterate_path",
    "symplectic_residual",
    "project_symplectic",
    "dump_path_csv",
]

#: Residual above which a path is flagged unreliable.
RESIDUAL_RELIABLE = 1e-9
#: Residual above which integration is refused.
RESIDUAL_FAIL = 1e-6


@dataclass(frozen=True)
class SymplecticPath:
    """Sampled fundamental solution ``xi(theta)`` with ``xi(0) = I``.

    Attributes
    ----------
    thetas : ndarray, shape (n,)
        Sample abscissae, from 0 to ``2 pi m``.
    samples : ndarray, shape (n, 4, 4)
        ``xi`` at each abscissa.
    period_map : ndarray, shape (4, 4)
        ``xi(2 pi m)``.
    sympl_residual : float
        Largest Frobenius norm of ``xi^T J xi - J`` over the samples.
    steps : int
        RK4 steps per period.
    order : int
        Order of the integrator.
    iterations : int
        Number of periods ``m`` covered by the path.
    """

    thetas: np.ndarray
    samples: np.ndarray
    period_map: np.ndarray
    sympl_residual: float
    steps: int
    order: int = 4
    iterations: int = 1

    @property
    def reliable(self) -> bool:
        return self.sympl_residual <= RESIDUAL_RELIABLE


def default_steps(e: float) -> int:
    """``max(4096, ceil(2000 / (1 - e)))`` RK4 steps per period."""
    return max(4096, int(math.ceil(2000.0 / (1.0 - e))))


def symplectic_residual(M: np.ndarray) -> float:
    """Frobenius norm of ``M^T J M - J`` (evaluated in extended precision)."""
    Ml = np.asarray(M, dtype=np.longdouble)
    Jl = J4.astype(np.longdouble)
    if Ml.ndim == 2:
        return float(np.sqrt(np.sum((Ml.T @ Jl @ Ml - Jl) ** 2)))
    prod = np.einsum("nki,kl,nlj->nij", Ml, Jl, Ml)
    return float(np.sqrt(np.max(np.sum((prod - Jl) ** 2, axis=(1, 2)))))


def project_symplectic(M: np.ndarray) -> np.ndarray:
    """Symplectic polar projection ``M (M^# M)^(-1/2)`` with ``M^# = -J M^T J``.

    Exact for symplectic input; used only on request.
    """
    W = -J4 @ M.T @ J4 @ M
    root = np.real_if_close(sqrtm(W))
    return M @ np.linalg.inv(root)


def integrate_path(
    coeff: LinearSystemCoeff,
    steps: int | None = None,
    stride: int = 32,
    project: bool = False,
) -> SymplecticPath:
    """Integrate ``xi' = J B(theta) xi`` over one period.

    Parameters
    ----------
    coeff : LinearSystemCoeff
    steps : int, optional
        RK4 steps (at least 64); defaults to :func:`default_steps`.
    stride : int
        Record every ``stride``-th step (the endpoints are always kept).
    project : bool
        Apply :func:`project_symplectic` to the period map.

    Raises
    ------
    IntegrationError
        If the symplectic residual exceeds 1e-6.
    """
    if steps is None:
        steps = default_steps(coeff.e)
    if steps < 64:
        raise InputError("at least 64 steps are required")
    if stride < 1:
        raise InputError("stride must be positive")
    A0, A1, A2, A3 = coeff.generator_pieces()
    X, thetas, samples = _kernels.rk4_path(A0, A1, A2, A3, coeff.e, steps, stride)
    residual = symplectic_residual(samples)
    if residual > RESIDUAL_FAIL:
        raise IntegrationError(
            f"symplectic residual {residual:.2e} exceeds {RESIDUAL_FAIL:g}; increase the step count"
        )
    if project:
        X = project_symplectic(X)
        samples = samples.copy()
        samples[-1] = X
    return SymplecticPath(
        thetas=thetas, samples=samples, period_map=X, sympl_residual=residual, steps=int(steps)
    )


def period_map(alpha: float, e: float, steps: int | None = None) -> SymplecticPath:
    """Convenience wrapper: path for ``D = diag(lambda3, lambda4)``."""
    return integrate_path(build_B(ReducedParams.from_alpha(alpha, e)), steps=steps)


def monodromy_circular(alpha: float) -> np.ndarray:
    """Closed-form period map ``exp(2 pi J B0)`` of the circular case.

    Uses the eigen-decomposition of ``J B0``; falls back to scaling and
    squaring when the generator is defective or badly conditioned.
    """
    coeff = build_B(ReducedParams.from_alpha(alpha, 0.0))
    A = J4 @ (coeff.b0 + coeff.b1)
    vals, vecs = np.linalg.eig(A)
    if np.linalg.cond(vecs) < 1e6:
        M = vecs @ np.diag(np.exp(2.0 * math.pi * vals)) @ np.linalg.inv(vecs)
        return np.real(M)
    return expm(2.0 * math.pi * A)


def iterate_path(path: SymplecticPath, m: int) -> SymplecticPath:
    """``m``-fold iterate: ``xi(theta + 2 pi j) = xi(theta) xi(2 pi)^j``."""
    if m < 1:
        raise InputError("iteration count must be at least 1")
    if m == 1:
        return path
    base = path.period_map
    thetas = [path.thetas]
    samples = [path.samples]
    power = np.eye(4)
    for j in range(1, m):
        power = power @ base
        thetas.append(path.thetas[1:] + 2.0 * math.pi * j)
        samples.append(path.samples[1:] @ power)
    all_samples = np.concatenate(samples)
    return SymplecticPath(
        thetas=np.concatenate(thetas),
        samples=all_samples,
        period_map=all_samples[-1],
        sympl_residual=symplectic_residual(all_samples),
        steps=path.steps,
        order=path.order,
        iterations=path.iterations * m,
    )


def dump_path_csv(path: SymplecticPath, stream: TextIO) -> None:
    """Write ``theta`` followed by the 16 matrix entries (row-major) per sample."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["theta"] + [f"m{i}{j}" for i in range(4) for j in range(4)])
    for theta, X in zip(path.thetas, path.samples):
        writer.writerow([repr(float(theta))] + [repr(float(v)) for v in X.ravel()])
