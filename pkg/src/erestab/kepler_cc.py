"""Euler collinear central configurations and Kepler-orbit kinematics.

The three primaries sit on a line in the order ``q1 = 0``, ``q2 = (x, 0)``,
``q3 = (1 + x, 0)`` where ``x`` is the positive root of the Euler quintic.
The configuration is then translated to its mass centre and scaled so that
``sum(m_i |a_i|^2) = 1``.  Under that normalization the central-configuration
multiplier equals the potential ``mu = U(a)``.

The massless fourth body is located off the line by a damped Newton solve of
its own central-configuration equation.  For equal outer masses the
reduction to a scalar equation in ``y`` is also provided.

Examples
--------
>>> cc = solve_central_configuration(MassTriple.symmetric(0.4))
>>> round(cc.x, 12)
1.0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateConfigurationError,
    DomainError,
    InputError,
    RootBracketError,
    SolverError,
)

__all__ = [
    "E_MAX_DEFAULT",
    "MassTriple",
    "CentralConfiguration",
    "KeplerOrbit",
    "euler_quintic_coefficients",
    "solve_euler_quintic",
    "build_collinear_cc",
    "solve_massless_position",
    "solve_central_configuration",
    "solve_symmetric_y",
    "symmetric_y_residual",
    "theta_of_time",
    "sigma_of",
    "cc_residuals",
]

#: Default eccentricity cap; ``1/(1 + e cos(theta))`` blows up as ``e -> 1``.
E_MAX_DEFAULT = 0.99

_MASS_SUM_TOL = 1e-12


@dataclass(frozen=True)
class MassTriple:
    """Masses of the three primaries, normalized to unit total mass.

    Parameters
    ----------
    m1, m2, m3 : float
        Strictly positive masses with ``m1 + m2 + m3 = 1`` (within 1e-12).
        ``m2`` is the middle primary.
    """

    m1: float
    m2: float
    m3: float

    def __post_init__(self) -> None:
        for name in ("m1", "m2", "m3"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise InputError(f"{name} must be a positive finite mass, got {value!r}")
            object.__setattr__(self, name, value)
        total = self.m1 + self.m2 + self.m3
        if abs(total - 1.0) > _MASS_SUM_TOL:
            raise InputError(f"masses must sum to 1, got {total!r}")

    @classmethod
    def from_outer(cls, m1: float, m3: float) -> "MassTriple":
        """Build from the two outer masses; ``m2 = 1 - m1 - m3``."""
        return cls(m1, 1.0 - m1 - m3, m3)

    @classmethod
    def symmetric(cls, m2: float) -> "MassTriple":
        """Equal outer masses ``m1 = m3 = (1 - m2)/2``."""
        half = 0.5 * (1.0 - m2)
        return cls(half, 1.0 - 2.0 * half, half)

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3])


@dataclass(frozen=True)
class CentralConfiguration:
    """Planar central configuration of the primaries plus the massless body.

    Attributes
    ----------
    masses : MassTriple
    x : float
        Euler ordering ratio ``|q2 - q1| / |q3 - q2|``.
    primaries : ndarray, shape (3, 2)
        Positions ``a1, a2, a3`` on the x-axis.
    mu : float
        Central-configuration multiplier, equal to ``U(a)``.
    a4 : ndarray, shape (2,) or None
        Position of the massless body; ``None`` for a partial configuration.
    """

    masses: MassTriple
    x: float
    primaries: np.ndarray
    mu: float
    a4: np.ndarray | None = field(default=None)

    @property
    def a1(self) -> np.ndarray:
        return self.primaries[0]

    @property
    def a2(self) -> np.ndarray:
        return self.primaries[1]

    @property
    def a3(self) -> np.ndarray:
        return self.primaries[2]

    @property
    def moment_of_inertia(self) -> float:
        """``I(a) = sum(m_i |a_i|^2) / 2``; equals 1/2 after normalization."""
        m = self.masses.as_array()
        return 0.5 * float(np.sum(m * np.sum(self.primaries**2, axis=1)))

    @property
    def potential(self) -> float:
        """Newtonian potential ``U(a)`` of the primaries."""
        return _potential(self.masses.as_array(), self.primaries)

    def with_massless(self, a4: np.ndarray) -> "CentralConfiguration":
        return replace(self, a4=np.asarray(a4, dtype=float).copy())


@dataclass(frozen=True)
class KeplerOrbit:
    """Keplerian ellipse carrying the central configuration.

    Parameters
    ----------
    e : float
        Eccentricity in ``[0, e_max)``.
    mu : float
        Gravitational parameter of the relative equilibrium.
    period : float, optional
        Orbital period ``T``; defaults to ``2 pi``.
    e_max : float, optional
        Eccentricity cap (default 0.99).

    Notes
    -----
    ``p`` is the semi-latus rectum ``a (1 - e^2)`` and ``sigma = (mu p)^(1/4)``.
    """

    e: float
    mu: float
    period: float = 2.0 * math.pi
    e_max: float = E_MAX_DEFAULT

    def __post_init__(self) -> None:
        if not (0.0 <= self.e < self.e_max):
            raise DomainError(f"eccentricity {self.e!r} outside [0, {self.e_max})")
        if not (self.mu > 0.0 and self.period > 0.0):
            raise DomainError("mu and period must be positive")

    @classmethod
    def from_semi_major_axis(cls, e: float, mu: float, a: float, **kw) -> "KeplerOrbit":
        """Orbit with prescribed semi-major axis (period from Kepler's third law)."""
        period = 2.0 * math.pi * math.sqrt(a**3 / mu)
        return cls(e=e, mu=mu, period=period, **kw)

    @property
    def mean_motion(self) -> float:
        return 2.0 * math.pi / self.period

    @property
    def semi_major_axis(self) -> float:
        return (self.mu / self.mean_motion**2) ** (1.0 / 3.0)

    @property
    def p(self) -> float:
        return self.semi_major_axis * (1.0 - self.e**2)

    @property
    def sigma(self) -> float:
        return sigma_of(self.mu, self.p)

    def radius(self, theta):
        """``r(theta) = p / (1 + e cos(theta))``."""
        return self.p / (1.0 + self.e * np.cos(theta))

    def theta(self, t):
        return theta_of_time(self, t)

    def state(self, t):
        """Return ``(r, r_dot, theta, theta_dot)`` at time ``t``.

        Rates are computed from the eccentric anomaly, independently of the
        angular-momentum relation ``r^2 theta_dot = sqrt(mu p)``.
        """
        t = np.asarray(t, dtype=float)
        ecc = _eccentric_anomaly(self.e, self.mean_motion * t)
        e, n, a = self.e, self.mean_motion, self.semi_major_axis
        one_minus = 1.0 - e * np.cos(ecc)
        r = a * one_minus
        e_dot = n / one_minus
        r_dot = a * e * np.sin(ecc) * e_dot
        theta = theta_of_time(self, t)
        theta_dot = n * math.sqrt(1.0 - e * e) / one_minus**2
        return r, r_dot, theta, theta_dot


def euler_quintic_coefficients(masses: MassTriple) -> np.ndarray:
    """Coefficients of the Euler quintic, highest degree first."""
    m1, m2, m3 = masses.m1, masses.m2, masses.m3
    return np.array(
        [
            m3 + m2,
            3.0 * m3 + 2.0 * m2,
            3.0 * m3 + m2,
            -(3.0 * m1 + m2),
            -(3.0 * m1 + 2.0 * m2),
            -(m1 + m2),
        ]
    )


def _horner(coeffs: np.ndarray, x: float) -> tuple[float, float, float]:
    """Value, derivative and absolute-value scale of a polynomial at ``x``."""
    value = deriv = scale = 0.0
    ax = abs(x)
    for c in coeffs:
        deriv = deriv * x + value
        value = value * x + c
        scale = scale * ax + abs(c)
    return value, deriv, scale


def solve_euler_quintic(masses: MassTriple, max_iter: int = 200) -> float:
    """Unique positive root of the Euler quintic.

    The polynomial has one sign change in its coefficients, so Descartes'
    rule guarantees exactly one positive root.  A bracket ``[0, X]`` is grown
    by doubling, bisected to width 1e-6 and finished by safeguarded Newton.

    Raises
    ------
    RootBracketError
        If the bracket cannot be established or refinement stalls.
    """
    coeffs = euler_quintic_coefficients(masses)
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        if _horner(coeffs, hi)[0] > 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RootBracketError("could not bracket the Euler quintic root", (lo, hi))

    for _ in range(max_iter):
        if hi - lo <= 1e-6:
            break
        mid = 0.5 * (lo + hi)
        if _horner(coeffs, mid)[0] > 0.0:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    for _ in range(50):
        value, deriv, _ = _horner(coeffs, x)
        if value > 0.0:
            hi = x
        elif value < 0.0:
            lo = x
        else:
            break
        step = value / deriv if deriv > 0.0 else 0.0
        candidate = x - step
        if not (lo <= candidate <= hi) or step == 0.0:
            candidate = 0.5 * (lo + hi)
        if candidate == x:
            break
        x = candidate

    value, deriv, scale = _horner(coeffs, x)
    if abs(value) > 1e-12 * scale or deriv <= 0.0:
        raise RootBracketError(
            f"Euler quintic refinement stalled (residual {value:.3e})", (lo, hi)
        )
    return x


def _potential(masses: np.ndarray, positions: np.ndarray) -> float:
    total = 0.0
    n = len(masses)
    for i in range(n):
        for j in range(i + 1, n):
            total += masses[i] * masses[j] / float(np.linalg.norm(positions[i] - positions[j]))
    return total


def build_collinear_cc(masses: MassTriple, x: float) -> CentralConfiguration:
    """Place the primaries on the x-axis and normalize.

    Returns a partial :class:`CentralConfiguration` (``a4`` is ``None``).
    """
    if not (x > 0.0 and math.isfinite(x)):
        raise InputError(f"ordering ratio must be positive, got {x!r}")
    m = masses.as_array()
    line = np.array([0.0, x, 1.0 + x])
    line -= np.dot(m, line)
    scale = float(np.dot(m, line**2))
    if not (scale > 0.0 and math.isfinite(scale)):
        raise SolverError("degenerate collinear configuration")
    line /= math.sqrt(scale)
    primaries = np.zeros((3, 2))
    primaries[:, 0] = line
    mu = _potential(m, primaries)
    return CentralConfiguration(masses=masses, x=float(x), primaries=primaries, mu=mu)


def _massless_force(cc: CentralConfiguration, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Residual ``F(p) = sum m_j (a_j - p)/|a_j - p|^3 + mu p`` and its Jacobian."""
    m = cc.masses.as_array()
    delta = cc.primaries - p
    dist = np.linalg.norm(delta, axis=1)
    residual = (m / dist**3) @ delta + cc.mu * p
    jac = cc.mu * np.eye(2)
    for mj, dj, rj in zip(m, delta, dist):
        jac += mj * (-np.eye(2) / rj**3 + 3.0 * np.outer(dj, dj) / rj**5)
    return residual, jac


def solve_massless_position(
    cc: CentralConfiguration, tol: float = 1e-13, max_iter: int = 200
) -> np.ndarray:
    """Off-line equilibrium of the massless body, with ``a4_y > 0``.

    Damped Newton on the planar central-configuration residual from a short
    list of starting points above the line; the first non-collinear root wins.

    Raises
    ------
    SolverError
        If Newton fails to converge.
    DegenerateConfigurationError
        If the solution falls onto the line of the primaries.
    """
    xs = cc.primaries[:, 0]
    span = float(xs.max() - xs.min())
    # Far from the primaries the balance |p|^3 = 1 / mu holds; start there
    # above the mass centre, then fall back to points above the segment.
    radius = cc.mu ** (-1.0 / 3.0)
    starts = [
        np.array([0.0, radius]),
        np.array([0.5 * (xs.max() + xs.min()), 0.5 * span]),
        np.array([0.0, 0.5 * radius]),
        np.array([0.0, 2.0 * radius]),
    ]
    best_norm = math.inf
    for start in starts:
        p, norm = _damped_newton(cc, start, tol, max_iter)
        best_norm = min(best_norm, norm)
        if norm <= 1e-10 * max(1.0, cc.mu) and abs(p[1]) >= 1e-8:
            return np.array([p[0], abs(p[1])])
    if best_norm > 1e-10 * max(1.0, cc.mu):
        raise SolverError(f"massless-body Newton did not converge (residual {best_norm:.3e})")
    raise DegenerateConfigurationError("massless body collapsed onto the line of primaries")


def _damped_newton(
    cc: CentralConfiguration, p: np.ndarray, tol: float, max_iter: int
) -> tuple[np.ndarray, float]:
    """Backtracking Newton on :func:`_massless_force`; returns the iterate and residual norm."""
    residual, jac = _massless_force(cc, p)
    norm = float(np.linalg.norm(residual))
    for _ in range(max_iter):
        if norm <= tol:
            break
        try:
            step = np.linalg.solve(jac, -residual)
        except np.linalg.LinAlgError:
            break
        damping = 1.0
        while damping > 1e-8:
            trial = p + damping * step
            if abs(trial[1]) > 1e-12:
                trial_res, trial_jac = _massless_force(cc, trial)
                trial_norm = float(np.linalg.norm(trial_res))
                if trial_norm < norm:
                    break
            damping *= 0.5
        else:
            break
        p, residual, jac, norm = trial, trial_res, trial_jac, trial_norm
    return p, norm


def solve_central_configuration(masses: MassTriple) -> CentralConfiguration:
    """Full pipeline: quintic root, collinear primaries and massless body."""
    x = solve_euler_quintic(masses)
    cc = build_collinear_cc(masses, x)
    return cc.with_massless(solve_massless_position(cc))


def cc_residuals(cc: CentralConfiguration) -> np.ndarray:
    """Norm of the central-configuration residual for each body (``m4 = 0``)."""
    m = np.append(cc.masses.as_array(), 0.0)
    if cc.a4 is None:
        pos = cc.primaries
        m = m[:3]
    else:
        pos = np.vstack([cc.primaries, cc.a4])
    out = np.empty(len(pos))
    for i in range(len(pos)):
        acc = cc.mu * pos[i].copy()
        for j in range(len(pos)):
            if j != i and m[j] != 0.0:
                d = pos[j] - pos[i]
                acc += m[j] * d / np.linalg.norm(d) ** 3
        out[i] = np.linalg.norm(acc)
    return out


def symmetric_y_residual(y: float, m2: float) -> float:
    """Residual of the scalar equation for the apex height with equal outer masses."""
    return (1.0 - m2) / (y * y + 1.0) ** 1.5 + m2 / y**3 - (1.0 + 7.0 * m2) / 8.0


def solve_symmetric_y(m2: float) -> float:
    """Root ``y`` in ``[1, sqrt(3)]`` of the symmetric apex equation.

    For ``m1 = m3`` the massless body sits at ``(0, y (1 - m2)^(-1/2))``.
    """
    if not (0.0 <= m2 < 1.0):
        raise InputError(f"m2 must lie in [0, 1), got {m2!r}")
    lo, hi = 1.0, math.sqrt(3.0)
    f_hi = symmetric_y_residual(hi, m2)
    if f_hi >= 0.0:
        return hi
    if symmetric_y_residual(lo, m2) <= 0.0:
        return lo
    return brentq(symmetric_y_residual, lo, hi, args=(m2,), xtol=1e-16, rtol=1e-15, maxiter=200)


def _eccentric_anomaly(e: float, mean_anomaly):
    """Solve ``E - e sin E = M`` with safeguarded Newton (vectorized).

    The returned ``E`` is a continuous lift: ``E(M + 2 pi) = E(M) + 2 pi``.
    """
    M = np.asarray(mean_anomaly, dtype=float)
    turns = np.floor(M / (2.0 * math.pi))
    M0 = M - 2.0 * math.pi * turns
    if e == 0.0:
        return M
    E = M0 + e * np.sin(M0)
    lo = np.zeros_like(M0)
    hi = np.full_like(M0, 2.0 * math.pi)
    for _ in range(100):
        f = E - e * np.sin(E) - M0
        lo = np.where(f < 0.0, E, lo)
        hi = np.where(f > 0.0, E, hi)
        step = f / (1.0 - e * np.cos(E))
        E_new = E - step
        outside = (E_new <= lo) | (E_new >= hi)
        E_new = np.where(outside, 0.5 * (lo + hi), E_new)
        if np.all(np.abs(E_new - E) <= 1e-15 * (1.0 + np.abs(E))):
            E = E_new
            break
        E = E_new
    residual = np.max(np.abs(E - e * np.sin(E) - M0), initial=0.0)
    if residual > 1e-13:
        raise SolverError(f"Kepler equation residual {residual:.3e}")
    return E + 2.0 * math.pi * turns


def theta_of_time(orbit: KeplerOrbit, t):
    """True anomaly ``theta(t)`` as a continuous lift with ``theta(0) = 0``.

    Parameters
    ----------
    orbit : KeplerOrbit
    t : float or array_like
        Time since pericentre passage.

    Returns
    -------
    float or ndarray
        ``theta(T) = 2 pi`` and ``theta`` is strictly increasing.
    """
    e = orbit.e
    if not (0.0 <= e < orbit.e_max):
        raise DomainError(f"eccentricity {e!r} outside [0, {orbit.e_max})")
    M = orbit.mean_motion * np.asarray(t, dtype=float)
    E = _eccentric_anomaly(e, M)
    turns = np.floor(E / (2.0 * math.pi))
    E0 = E - 2.0 * math.pi * turns
    half = 0.5 * E0
    theta0 = 2.0 * np.arctan2(math.sqrt(1.0 + e) * np.sin(half), math.sqrt(1.0 - e) * np.cos(half))
    theta = theta0 + 2.0 * math.pi * turns
    return float(theta) if np.ndim(theta) == 0 else theta


def sigma_of(mu: float, p: float) -> float:
    """Scale factor ``(mu p)^(1/4)``."""
    if not (mu > 0.0 and p > 0.0):
        raise DomainError("mu and p must be positive")
    return (mu * p) ** 0.25
