"""Reduced linearized data of the massless body.

The linear stability of the elliptic relative equilibrium is governed by a
single symmetric 2x2 matrix ``D`` built from the central configuration, and
by the eccentricity ``e``.  In the true-anomaly parametrization the linear
system reads ``xi' = J B(theta) xi`` with

    B(theta) = [[I, -J2], [J2, I - D / (1 + e cos(theta))]]

acting on ``xi = (Z, z)``.  ``trace(D) = 3`` for every spanning
configuration, so the eigenvalues of ``D`` are ``3/2 +- alpha/2`` and the
problem depends on the shape parameter ``alpha in [0, 3]`` only.

The module also exposes the uniformly rotating frame in which the potential
becomes ``(3 I + alpha S(theta)) / (2 (1 + e cos(theta)))``, and the chain of
coordinate changes that carries an inertial trajectory of the massless body
into the reduced coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConfigurationError, DomainError, InconsistencyError, InputError
from .kepler_cc import E_MAX_DEFAULT, CentralConfiguration, KeplerOrbit, solve_symmetric_y

__all__ = [
    "J2",
    "J4",
    "ReducedParams",
    "LinearSystemCoeff",
    "build_D",
    "build_D_general",
    "beta_coefficients",
    "eigen_split",
    "reduced_params",
    "symmetric_alpha",
    "symmetric_z",
    "build_B",
    "build_operator_coeff",
    "rotated_potential",
    "rotation",
    "canonical_frame",
    "ere_state",
    "inertial_to_reduced",
    "reduction_matrix",
]

#: Planar rotation generator.
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])
#: Standard symplectic matrix on ``R^4`` for the ordering ``(Z, z)``.
J4 = np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]])

_CLAMP_TOL = 1e-9
_ZERO = np.zeros((2, 2))
_I2 = np.eye(2)


def rotation(theta: float) -> np.ndarray:
    """Counter-clockwise rotation matrix ``R(theta)``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class ReducedParams:
    """Complete input of the linearized problem.

    Attributes
    ----------
    D : ndarray, shape (2, 2)
        Symmetric potential matrix with ``trace(D) = 3``.
    lambda3, lambda4 : float
        Eigenvalues of ``D`` with ``lambda3 >= lambda4``.
    alpha : float
        Spectral gap ``lambda3 - lambda4`` in ``[0, 3]``.
    e : float
        Eccentricity.
    beta20 : float
        Diagnostic that vanishes for a valid central configuration.
    beta220 : complex
        Complex moment whose modulus sets ``alpha = 3 |beta220| / mu``.
    frame_angle : float
        Angle of the eigenvector of ``lambda3`` measured from the x-axis.
    """

    D: np.ndarray
    lambda3: float
    lambda4: float
    alpha: float
    e: float
    beta20: float = 0.0
    beta220: complex = 0j
    frame_angle: float = 0.0

    @classmethod
    def from_alpha(cls, alpha: float, e: float) -> "ReducedParams":
        """Parameters in the eigenframe of ``D``: ``D = diag(lambda3, lambda4)``."""
        alpha = float(alpha)
        if not (-_CLAMP_TOL <= alpha <= 3.0 + _CLAMP_TOL):
            raise InputError(f"alpha must lie in [0, 3], got {alpha!r}")
        alpha = min(max(alpha, 0.0), 3.0)
        _check_e(e)
        lam3, lam4 = 1.5 + 0.5 * alpha, 1.5 - 0.5 * alpha
        return cls(D=np.diag([lam3, lam4]), lambda3=lam3, lambda4=lam4, alpha=alpha, e=float(e))


@dataclass(frozen=True)
class LinearSystemCoeff:
    """Periodic coefficient ``B(theta)`` of a linear Hamiltonian system.

    The coefficient has the form::

        B(theta) = b0 + (b1 + cos(2 theta) b2 + sin(2 theta) b3) / (1 + e cos(theta))

    which covers both the matrix form (``b2 = b3 = 0``) and the rotated
    operator form.  Instances are callable.

    Attributes
    ----------
    b0, b1, b2, b3 : ndarray, shape (4, 4)
        Symmetric coefficient pieces.
    e : float
        Eccentricity.
    frame : str
        ``"matrix"`` or ``"operator"``.
    D : ndarray or None
        Potential matrix the coefficient was built from, if any.
    """

    b0: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray
    e: float
    frame: str = "matrix"
    D: np.ndarray | None = field(default=None)

    def __call__(self, theta: float) -> np.ndarray:
        denom = 1.0 + self.e * math.cos(theta)
        assert denom > 0.0, "1 + e cos(theta) must stay positive"
        return self.b0 + (self.b1 + math.cos(2.0 * theta) * self.b2 + math.sin(2.0 * theta) * self.b3) / denom

    def generator_pieces(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``J4 @ b_k`` for the four pieces, the input of the integrators."""
        return tuple(np.ascontiguousarray(J4 @ b) for b in (self.b0, self.b1, self.b2, self.b3))


def _check_e(e: float, e_max: float = E_MAX_DEFAULT) -> None:
    if not (0.0 <= e < e_max):
        raise DomainError(f"eccentricity must lie in [0, {e_max}), got {e!r}")


def build_D_general(
    masses: np.ndarray, primaries: np.ndarray, a_n: np.ndarray, mu: float
) -> np.ndarray:
    """Potential matrix for any number of primaries around a massless body.

    ``D = I - (1/mu) sum(m_i / r_i^3) I + (3/mu) sum(m_i d_i d_i^T / r_i^5)``
    with ``d_i = a_i - a_n``.  For a valid central configuration the first
    two terms cancel.
    """
    masses = np.asarray(masses, dtype=float)
    delta = np.asarray(primaries, dtype=float) - np.asarray(a_n, dtype=float)
    dist = np.linalg.norm(delta, axis=1)
    if np.any(dist == 0.0):
        raise DegenerateConfigurationError("massless body coincides with a primary")
    weights = masses / dist**5
    outer = np.einsum("i,ij,ik->jk", weights, delta, delta)
    isotropic = float(np.sum(masses / dist**3))
    D = (1.0 - isotropic / mu) * _I2 + 3.0 / mu * outer
    return 0.5 * (D + D.T)


def _require_massless(cc: CentralConfiguration) -> np.ndarray:
    if cc.a4 is None:
        raise InputError("central configuration has no massless body position")
    a1, a3 = cc.primaries[0], cc.primaries[-1]
    axis = (a3 - a1) / float(np.linalg.norm(a3 - a1))
    offset = cc.a4 - a1
    if abs(axis[0] * offset[1] - axis[1] * offset[0]) < 1e-8:
        raise DegenerateConfigurationError("massless body lies on the line of primaries")
    return cc.a4


def build_D(cc: CentralConfiguration) -> np.ndarray:
    """Potential matrix ``D`` of a complete central configuration."""
    a4 = _require_massless(cc)
    return build_D_general(cc.masses.as_array(), cc.primaries, a4, cc.mu)


def beta_coefficients(cc: CentralConfiguration) -> tuple[float, complex]:
    """Diagnostics ``(beta20, beta220)``.

    ``beta20 = (1/mu) sum(m_i / r_i^3) - 1`` vanishes at a central
    configuration; ``beta220 = sum(m_i (z_i - z_4)^2 / r_i^5)`` uses complex
    positions ``z = x + i y``.
    """
    a4 = _require_massless(cc)
    m = cc.masses.as_array()
    delta = cc.primaries - a4
    dist = np.linalg.norm(delta, axis=1)
    beta20 = float(np.sum(m / dist**3)) / cc.mu - 1.0
    zeta = delta[:, 0] + 1j * delta[:, 1]
    beta220 = complex(np.sum(m * zeta**2 / dist**5))
    return beta20, beta220


def eigen_split(D: np.ndarray) -> tuple[float, float, float]:
    """Closed-form eigenvalues ``(lambda3, lambda4, alpha)`` of a symmetric 2x2 matrix.

    Raises
    ------
    InconsistencyError
        If ``alpha`` lies outside ``[0, 3]`` by more than 1e-9.
    """
    D = np.asarray(D, dtype=float)
    half_trace = 0.5 * (D[0, 0] + D[1, 1])
    gap = math.hypot(0.5 * (D[0, 0] - D[1, 1]), 0.5 * (D[0, 1] + D[1, 0]))
    lam3, lam4 = half_trace + gap, half_trace - gap
    alpha = 2.0 * gap
    if alpha > 3.0 + _CLAMP_TOL or lam4 < -_CLAMP_TOL:
        raise InconsistencyError(f"alpha = {alpha!r} outside [0, 3] (lambda4 = {lam4!r})")
    if alpha < _CLAMP_TOL:
        alpha = 0.0
    elif alpha > 3.0 - _CLAMP_TOL:
        alpha = 3.0
    return lam3, lam4, alpha


def _eigen_angle(D: np.ndarray) -> float:
    """Angle of the dominant eigenvector of a symmetric 2x2 matrix."""
    return 0.5 * math.atan2(D[0, 1] + D[1, 0], D[0, 0] - D[1, 1])


def reduced_params(cc: CentralConfiguration, e: float) -> ReducedParams:
    """Assemble :class:`ReducedParams` from a complete central configuration."""
    _check_e(e)
    D = build_D(cc)
    if abs(np.trace(D) - 3.0) > 1e-8:
        raise InconsistencyError(f"trace(D) = {np.trace(D)!r} differs from 3")
    lam3, lam4, alpha = eigen_split(D)
    beta20, beta220 = beta_coefficients(cc)
    return ReducedParams(
        D=D,
        lambda3=lam3,
        lambda4=lam4,
        alpha=alpha,
        e=float(e),
        beta20=beta20,
        beta220=beta220,
        frame_angle=_eigen_angle(D),
    )


def symmetric_z(m2: float) -> float:
    """Auxiliary ``z = 8 (1 - m2) / ((1 + 7 m2) (y^2 + 1)^(5/2))`` for equal outer masses."""
    y = solve_symmetric_y(m2)
    return 8.0 * (1.0 - m2) / ((1.0 + 7.0 * m2) * (y * y + 1.0) ** 2.5)


def symmetric_alpha(m2: float) -> float:
    """Shape parameter ``alpha = 6 (1/2 - z)`` for ``m1 = m3``."""
    return 6.0 * (0.5 - symmetric_z(m2))


def build_B(params: ReducedParams) -> LinearSystemCoeff:
    """Coefficient ``B(theta)`` of the linearized system in the rotating frame."""
    _check_e(params.e)
    D = np.asarray(params.D, dtype=float)
    b0 = np.block([[_I2, -J2], [J2, _I2]])
    b1 = np.block([[_ZERO, _ZERO], [_ZERO, -D]])
    zero = np.zeros((4, 4))
    return LinearSystemCoeff(b0=b0, b1=b1, b2=zero, b3=zero.copy(), e=params.e, frame="matrix", D=D)


def build_operator_coeff(alpha: float, e: float) -> LinearSystemCoeff:
    """First-order form of the second-order operator with rotated potential.

    With ``y = R(theta) z`` and ``p = R(theta) Z`` the linearized system
    becomes ``y'' = (V(theta) - I) y`` where ``V`` is
    :func:`rotated_potential`.  The Hamiltonian coefficient is
    ``diag(I, I - V(theta))``.  Its period map equals the one of
    :func:`build_B` for ``D = diag(lambda3, lambda4)``.
    """
    _check_e(e)
    b0 = np.eye(4)
    b1 = np.zeros((4, 4))
    b1[2:, 2:] = -1.5 * _I2
    b2 = np.zeros((4, 4))
    b2[2:, 2:] = -0.5 * alpha * np.diag([1.0, -1.0])
    b3 = np.zeros((4, 4))
    b3[2:, 2:] = -0.5 * alpha * np.array([[0.0, 1.0], [1.0, 0.0]])
    return LinearSystemCoeff(b0=b0, b1=b1, b2=b2, b3=b3, e=float(e), frame="operator")


def rotated_potential(alpha: float, e: float, theta: float) -> np.ndarray:
    """Potential block ``(3 I + alpha S(theta)) / (2 (1 + e cos(theta)))``.

    ``S(theta) = [[cos 2theta, sin 2theta], [sin 2theta, -cos 2theta]]``.
    """
    c2, s2 = math.cos(2.0 * theta), math.sin(2.0 * theta)
    S = np.array([[c2, s2], [s2, -c2]])
    return (3.0 * _I2 + alpha * S) / (2.0 * (1.0 + e * math.cos(theta)))


def canonical_frame(cc: CentralConfiguration) -> CentralConfiguration:
    """Rotate and rescale so that the massless body sits at ``(1, 0)``.

    Rotations and dilations map central configurations to central
    configurations; under ``a -> a / c`` the multiplier becomes
    ``mu c^3`` while ``D`` is unchanged up to the rotation.
    """
    a4 = _require_massless(cc)
    c = float(np.linalg.norm(a4))
    rot = rotation(-math.atan2(a4[1], a4[0]))
    primaries = (cc.primaries @ rot.T) / c
    new_a4 = np.array([1.0, 0.0])
    return CentralConfiguration(
        masses=cc.masses, x=cc.x, primaries=primaries, mu=cc.mu * c**3, a4=new_a4
    )


def ere_state(orbit: KeplerOrbit, a4: np.ndarray, t) -> tuple[np.ndarray, np.ndarray]:
    """Inertial momentum and position ``(P, q)`` of the massless body on the ERE.

    ``q(t) = r(t) R(theta(t)) a4`` and ``P = q'(t)``; rates come from the
    eccentric anomaly.
    """
    r, r_dot, theta, theta_dot = orbit.state(t)
    R = rotation(float(theta))
    a4 = np.asarray(a4, dtype=float)
    q = float(r) * (R @ a4)
    P = float(r_dot) * (R @ a4) + float(r * theta_dot) * (J2 @ R @ a4)
    return P, q


def reduction_matrix(t: float, orbit: KeplerOrbit) -> np.ndarray:
    """Linear map ``(P, q) -> (Zbar, zbar)`` at time ``t`` as a 4x4 matrix."""
    r, r_dot, theta, _ = orbit.state(t)
    r, r_dot = float(r), float(r_dot)
    if not r > 0.0:
        raise DomainError("orbit radius must stay positive")
    sigma = orbit.sigma
    Rt = rotation(float(theta)).T
    return np.block([[r / sigma * Rt, -r_dot / sigma * Rt], [_ZERO, sigma / r * Rt]])


def inertial_to_reduced(
    P: np.ndarray, q: np.ndarray, t: float, orbit: KeplerOrbit
) -> tuple[np.ndarray, np.ndarray]:
    """Carry inertial data of the massless body into reduced coordinates.

    The chain is: rotate into the frame of the primaries, divide by the
    orbital radius (with the matching momentum shift), switch time to the
    true anomaly, and rescale by ``sigma``.

    Returns
    -------
    Zbar, zbar : ndarray, shape (2,)
    """
    r, r_dot, theta, _ = orbit.state(t)
    r, r_dot = float(r), float(r_dot)
    if not r > 0.0:
        raise DomainError("orbit radius must stay positive")
    Rt = rotation(float(theta)).T
    z_hat = Rt @ np.asarray(q, dtype=float)
    Z_hat = Rt @ np.asarray(P, dtype=float)
    z_tilde = z_hat / r
    Z_tilde = r * (Z_hat - r_dot * z_tilde)
    sigma = orbit.sigma
    return Z_tilde / sigma, sigma * z_tilde

