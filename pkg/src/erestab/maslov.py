"""omega-Morse indices by Galerkin discretization.

The second-order operator

    A(alpha, e) y = -y'' - y + (3 I + alpha S(t)) / (2 (1 + e cos t)) y

on functions with ``y(2 pi) = omega y(0)`` has a Morse index equal to the
omega-Maslov index of the fundamental solution.  Writing
``omega = exp(2 pi i rho)``, the shifted Fourier modes
``exp(i (k + rho) t) v`` (``k = -N..N``, ``v`` in ``C^2``) satisfy the
boundary condition, the kinetic part is diagonal with entries
``(k + rho)^2 - 1`` and the potential couples modes through its Fourier
coefficients (computed by FFT).

Indices are negative-eigenvalue counts of the resulting Hermitian matrix;
the cutoff is doubled until two consecutive counts agree.  Counts come from
Sylvester inertia: the potential is positive semidefinite, so the block of
modes whose kinetic symbol exceeds the shift is positive definite and the
count reduces to a small Schur complement on the remaining low modes.  The module also
evaluates the index from splitting numbers of the period map and checks the
Bott iteration identity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded, eig_banded, eigvalsh

from .errors import InputError, MarginalNormalFormError
from .kepler_cc import E_MAX_DEFAULT
from .spectral import DEFAULT_TOL, NormalForm, classify, splitting_numbers

__all__ = [
    "N0_DEFAULT",
    "N_MAX_DEFAULT",
    "EPS_NULL_REL",
    "GalerkinProblem",
    "IndexRecord",
    "BottCheck",
    "rho_of",
    "potential_samples",
    "assemble_galerkin",
    "galerkin_counts",
    "galerkin_eigenvalues",
    "count_below",
    "negative_count",
    "morse_index",
    "morse_index_beta",
    "alpha_from_beta",
    "index_via_splitting",
    "bott_check",
]

N0_DEFAULT = 128
N_MAX_DEFAULT = 1024
#: Null-space threshold relative to the norm of the potential coupling.
EPS_NULL_REL = 1e-8
#: Fourier coefficients below this fraction of the mean potential are dropped
#: (FFT round-off sits near 1e-16).
_BAND_TOL = 1e-15


@dataclass(frozen=True)
class GalerkinProblem:
    """Hermitian Galerkin discretization of the operator on omega-boundary data.

    The matrix is block Toeplitz plus diagonal: entry ``(j, k)`` (modes) is
    ``delta_jk (((k + rho)/m)^2 - 1) I + Vhat[j - k]``.  Only the Fourier
    coefficients are stored; :attr:`matrix` builds the dense form and
    :meth:`band` the lower band storage used by the eigen-solver.

    Attributes
    ----------
    alpha, e : float
    omega : complex
    rho : float
        Shift in ``[0, 1)`` with ``omega = exp(2 pi i rho)``.
    N : int
        Mode cutoff; the matrix has size ``2 (2N + 1)``.
    periods : int
        Number of potential periods ``m`` spanned by the boundary problem.
    coeffs : ndarray, shape (8N + 1, 2, 2)
        FFT coefficients ``Vhat[n]`` (index ``n mod (8N + 1)``).
    kinetic : ndarray, shape (2N + 1,)
        Diagonal symbol ``((k + rho)/m)^2 - 1``.
    """

    alpha: float
    e: float
    omega: complex
    rho: float
    N: int
    periods: int
    coeffs: np.ndarray
    kinetic: np.ndarray

    @property
    def size(self) -> int:
        return 2 * (2 * self.N + 1)

    @property
    def matrix(self) -> np.ndarray:
        """Dense Hermitian matrix."""
        k = np.arange(2 * self.N + 1)
        idx = (k[:, None] - k[None, :]) % len(self.coeffs)
        H = self.coeffs[idx].transpose(0, 2, 1, 3).reshape(self.size, self.size)
        H[np.arange(self.size), np.arange(self.size)] += np.repeat(self.kinetic, 2)
        return 0.5 * (H + H.conj().T)

    def bandwidth(self, rel_tol: float = _BAND_TOL) -> int:
        """Number of scalar sub-diagonals carrying coefficients above ``rel_tol``."""
        mags = np.max(np.abs(self.coeffs.reshape(len(self.coeffs), 4)), axis=1)
        cutoff = rel_tol * mags[0]
        reach = 0
        for n in range(1, 2 * self.N + 1):
            if mags[n] > cutoff or mags[-n] > cutoff:
                reach = n
        return min(2 * reach + 1, self.size - 1)

    def band(self, rel_tol: float = _BAND_TOL) -> np.ndarray:
        """Lower band storage ``ab[d, q] = H[q + d, q]``."""
        width = self.bandwidth(rel_tol)
        n = self.size
        ab = np.zeros((width + 1, n), dtype=complex)
        q = np.arange(n)
        L = len(self.coeffs)
        for d in range(width + 1):
            cols = q[: n - d]
            rows = cols + d
            ab[d, : n - d] = self.coeffs[(rows // 2 - cols // 2) % L, rows % 2, cols % 2]
        ab[0] = ab[0].real + np.repeat(self.kinetic, 2)
        return ab

    @property
    def norm(self) -> float:
        """Infinity norm (largest absolute row sum) of the banded matrix."""
        ab = np.abs(self.band())
        rows = np.zeros(self.size)
        for d in range(ab.shape[0]):
            span = self.size - d
            rows[d:] += ab[d, :span]
            if d:
                rows[:span] += ab[d, :span]
        return float(rows.max())

    @property
    def coupling_norm(self) -> float:
        """Infinity-norm bound ``max_r sum_n sum_c |Vhat[n]_rc|`` of the potential part.

        Unlike :attr:`norm` this does not grow with the cutoff, so it sets a
        null-space threshold on the scale of the low eigenvalues.
        """
        return float(np.abs(self.coeffs).sum(axis=(0, 2)).max())


@dataclass(frozen=True)
class IndexRecord:
    """Converged ``(i_omega, nu_omega)`` pair.

    ``converged`` is true when the counts at ``N_used`` and ``2 N_used`` agree.
    """

    omega: complex
    i_omega: int
    nu_omega: int
    N_used: int
    converged: bool
    alpha: float = float("nan")
    e: float = float("nan")


@dataclass(frozen=True)
class BottCheck:
    """Outcome of ``i_1(xi^2) = i_1(xi) + i_{-1}(xi)``."""

    holds: bool
    lhs: int
    i1: int
    im1: int
    records: tuple[IndexRecord, ...]


def rho_of(omega: complex) -> float:
    """Shift ``rho in [0, 1)`` with ``omega = exp(2 pi i rho)``."""
    if abs(abs(omega) - 1.0) > 1e-12:
        raise InputError("omega must lie on the unit circle")
    rho = cmath.phase(omega) / (2.0 * math.pi)
    rho = rho % 1.0
    return 0.0 if rho > 1.0 - 1e-15 else rho


def alpha_from_beta(beta: float) -> float:
    """Shape parameter from the Lagrangian-problem parameter ``beta = 9 - alpha^2``."""
    if not (0.0 <= beta <= 9.0):
        raise InputError("beta must lie in [0, 9]")
    return math.sqrt(9.0 - beta)


def potential_samples(alpha: float, e: float, t: np.ndarray) -> np.ndarray:
    """Rotated potential at the abscissae ``t``, shape ``(len(t), 2, 2)``."""
    f = 1.0 / (2.0 * (1.0 + e * np.cos(t)))
    c2, s2 = np.cos(2.0 * t), np.sin(2.0 * t)
    out = np.empty((len(t), 2, 2))
    out[:, 0, 0] = (3.0 + alpha * c2) * f
    out[:, 1, 1] = (3.0 - alpha * c2) * f
    out[:, 0, 1] = out[:, 1, 0] = alpha * s2 * f
    return out


def _check(alpha: float, e: float) -> None:
    if not (0.0 <= alpha <= 3.0):
        raise InputError(f"alpha must lie in [0, 3], got {alpha!r}")
    if not (0.0 <= e < E_MAX_DEFAULT):
        raise InputError(f"eccentricity must lie in [0, {E_MAX_DEFAULT}), got {e!r}")


def assemble_galerkin(
    alpha: float, e: float, omega: complex, N: int, periods: int = 1
) -> GalerkinProblem:
    """Assemble the Hermitian Galerkin matrix.

    Parameters
    ----------
    alpha, e : float
    omega : complex
        Boundary multiplier on the unit circle.
    N : int
        Modes ``k = -N..N``.
    periods : int
        Length of the boundary problem in units of ``2 pi``; modes become
        ``exp(i (k + rho) t / periods)``.
    """
    _check(alpha, e)
    if N < 1 or periods < 1:
        raise InputError("N and periods must be positive")
    rho = rho_of(omega)
    L = 8 * N + 1
    t = 2.0 * math.pi * periods * np.arange(L) / L
    coeffs = np.fft.fft(potential_samples(alpha, e, t), axis=0) / L
    if periods > 1:
        # the potential is 2 pi periodic: only multiples of ``periods`` survive
        harmonic = np.fft.fftfreq(L, 1.0 / L).round().astype(int)
        coeffs[harmonic % periods != 0] = 0.0
    kinetic = ((np.arange(-N, N + 1) + rho) / periods) ** 2 - 1.0
    return GalerkinProblem(
        alpha=float(alpha),
        e=float(e),
        omega=complex(omega),
        rho=rho,
        N=N,
        periods=periods,
        coeffs=coeffs,
        kinetic=kinetic,
    )


def galerkin_eigenvalues(problem: GalerkinProblem, count: int) -> np.ndarray:
    """The ``count`` lowest eigenvalues from the banded Hermitian eigen-solver."""
    count = min(count, problem.size)
    return eig_banded(problem.band(), lower=True, eigvals_only=True, select="i", select_range=(0, count - 1))


def _entries(problem: GalerkinProblem, rows: np.ndarray, cols: np.ndarray, width: int) -> np.ndarray:
    """Matrix entries ``H[rows, cols]`` (broadcast) restricted to the band."""
    L = len(problem.coeffs)
    vals = problem.coeffs[(rows // 2 - cols // 2) % L, rows % 2, cols % 2]
    vals = np.where(np.abs(rows - cols) <= width, vals, 0.0)
    diag = rows == cols
    if np.any(diag):
        kin = np.repeat(problem.kinetic, 2)
        vals = np.where(diag, vals.real + kin[np.where(diag, rows, 0)], vals)
    return vals


def count_below(problem: GalerkinProblem, shift: float, margin: float = 1.0) -> int:
    """Number of eigenvalues strictly below ``shift``.

    Modes whose kinetic symbol exceeds ``shift + margin`` form a positive
    definite block (the potential is positive semidefinite); a banded
    Cholesky factorization certifies this, and by inertia additivity the
    count equals the number of negative eigenvalues of the Schur complement
    on the remaining modes.  If the factorization fails the margin grows; a
    dense eigen-solve is the last resort.
    """
    width = problem.bandwidth()
    n = problem.size
    kin = np.repeat(problem.kinetic, 2)
    while True:
        low = np.flatnonzero(kin - shift < margin)
        high = np.flatnonzero(kin - shift >= margin)
        if len(high) == 0 or len(low) == n:
            H = problem.matrix - shift * np.eye(n)
            return int(np.sum(eigvalsh(H) < 0.0))
        m = len(high)
        ab = np.zeros((width + 1, m), dtype=complex)
        for d in range(min(width, m - 1) + 1):
            ab[d, : m - d] = _entries(problem, high[d:], high[: m - d], width)
        ab[0] = ab[0].real - shift
        try:
            chol = cholesky_banded(ab, lower=True)
        except LinAlgError:
            margin *= 4.0
            continue
        H_hl = _entries(problem, high[:, None], low[None, :], width)
        H_ll = _entries(problem, low[:, None], low[None, :], width) - shift * np.eye(len(low))
        S = H_ll - H_hl.conj().T @ cho_solve_banded((chol, True), H_hl)
        S = 0.5 * (S + S.conj().T)
        return int(np.sum(eigvalsh(S) < 0.0))


def galerkin_counts(problem: GalerkinProblem, eps_rel: float = EPS_NULL_REL) -> tuple[int, int]:
    """``(negative count, null count)`` with ``eps_null = eps_rel * ||Vhat||``.

    The threshold scales with :attr:`GalerkinProblem.coupling_norm`.  The full
    matrix norm is dominated by the kinetic diagonal (order ``N**2``), which
    would swallow genuine eigenvalues near an index jump.
    """
    eps = eps_rel * problem.coupling_norm
    negative = count_below(problem, -eps)
    return negative, count_below(problem, eps) - negative


def negative_count(alpha: float, e: float, omega: complex, N: int = N0_DEFAULT, periods: int = 1) -> int:
    """Raw number of negative Galerkin eigenvalues (threshold zero).

    Used as the bisection predicate when locating index jumps.
    """
    return count_below(assemble_galerkin(alpha, e, omega, N, periods), 0.0)


def morse_index(
    alpha: float,
    e: float,
    omega: complex,
    N0: int = N0_DEFAULT,
    N_max: int = N_MAX_DEFAULT,
    eps_rel: float = EPS_NULL_REL,
    periods: int = 1,
) -> IndexRecord:
    """omega-Morse index and nullity with cutoff doubling.

    Returns a record with ``converged=False`` when the counts keep changing
    up to ``N_max``.
    """
    N = N0
    previous = galerkin_counts(assemble_galerkin(alpha, e, omega, N, periods), eps_rel)
    while 2 * N <= N_max:
        current = galerkin_counts(assemble_galerkin(alpha, e, omega, 2 * N, periods), eps_rel)
        if current == previous:
            return IndexRecord(complex(omega), current[0], current[1], N, True, float(alpha), float(e))
        N, previous = 2 * N, current
    return IndexRecord(complex(omega), previous[0], previous[1], N, False, float(alpha), float(e))


def morse_index_beta(beta: float, e: float, omega: complex, **kwargs) -> IndexRecord:
    """:func:`morse_index` parameterized by ``beta = 9 - alpha^2``."""
    return morse_index(alpha_from_beta(beta), e, omega, **kwargs)


def index_via_splitting(i1: int, M, omega: complex, tol: float = DEFAULT_TOL) -> int:
    """omega-index from ``i_1`` and the splitting numbers of the period map.

    Walks the unit-circle eigenvalues counter-clockwise from 1 to ``omega``::

        i_omega = i_1 + S+(1) + sum_j (S+(w_j) - S-(w_j)) - S-(omega)

    Parameters
    ----------
    i1 : int
    M : ndarray or NormalForm
        Period map or its classified normal form.
    omega : complex

    Raises
    ------
    MarginalNormalFormError
        If the normal form is marginal.
    """
    nf = M if isinstance(M, NormalForm) else classify(np.asarray(M, dtype=float), tol)
    if nf.marginal:
        raise MarginalNormalFormError(f"normal form {nf.label} is marginal")
    target = cmath.phase(omega) % (2.0 * math.pi)
    if abs(omega - 1.0) <= 1e-12:
        return int(i1)
    total = int(i1) + splitting_numbers(nf, 1.0 + 0j)[0]
    for w in nf.unit_eigenvalues():
        angle = cmath.phase(w) % (2.0 * math.pi)
        if 1e-12 < angle < target - 1e-12:
            plus, minus = splitting_numbers(nf, w)
            total += plus - minus
    return total - splitting_numbers(nf, omega)[1]


def bott_check(
    alpha: float, e: float, N0: int = N0_DEFAULT, N_max: int = N_MAX_DEFAULT
) -> BottCheck:
    """Check ``i_1(xi^2) = i_1(xi) + i_{-1}(xi)``.

    The left side is the periodic Morse index on the doubled period; the
    right side comes from single-period records.
    """
    r1 = morse_index(alpha, e, 1.0, N0, N_max)
    rm1 = morse_index(alpha, e, -1.0, N0, N_max)
    r2 = morse_index(alpha, e, 1.0, 2 * N0, 2 * N_max, periods=2)
    holds = r1.converged and rm1.converged and r2.converged and r2.i_omega == r1.i_omega + rm1.i_omega
    return BottCheck(holds=holds, lhs=r2.i_omega, i1=r1.i_omega, im1=rm1.i_omega, records=(r1, rm1, r2))
