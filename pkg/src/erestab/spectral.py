"""Spectral analysis of 4x4 symplectic period maps.

Every ``M`` in ``Sp(4)`` has a palindromic characteristic polynomial
``l^4 - a l^3 + b l^2 - a l + 1``.  With ``s = l + 1/l`` it factors through
``s^2 - a s + (b - 2) = 0``, so the whole spectrum is described by the two
stability invariants ``s1, s2`` and the discriminant ``a^2 - 4 b + 8``:

* ``disc < 0``: complex quadruple off the unit circle;
* real ``s`` with ``|s| < 2``: elliptic pair ``exp(+-i phi)`` with ``2 cos(phi) = s``;
* real ``s`` with ``|s| > 2``: real hyperbolic pair;
* ``s = +-2``: eigenvalue ``+-1`` of algebraic multiplicity two.

Working with ``(s1, s2)`` keeps the reciprocity ``l <-> 1/l`` exact and
makes boundary cases explicit: values within the tolerance of ``disc = 0``
or ``s = +-2`` are snapped to the degenerate case and flagged ``marginal``.

Normal forms are reported as lists of basic blocks ``R(theta)``,
``D(lambda)``, ``N1(+-1, b)``, ``N2(omega, trivial)``, ``M2(+-1)`` and the
complex quadruple ``Q``.  The rotation angle of an elliptic pair follows
its Krein sign: a Krein-negative pair is reported as ``theta in (0, pi)``,
a Krein-positive pair as ``theta in (pi, 2 pi)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ClassificationError, MarginalNormalFormError
from .reduction import J4

__all__ = [
    "DEFAULT_TOL",
    "NU_REL_TOL",
    "Verdict",
    "Region",
    "Block",
    "NormalForm",
    "EigenStructure",
    "StabilityVerdict",
    "stability_invariants",
    "eigenstructure",
    "classify_normal_form",
    "classify",
    "splitting_numbers",
    "stability_verdict",
    "is_hyperbolic",
    "krein_sign",
    "n2_triviality_invariant",
]

#: Boundary tolerance on the stability invariants.
DEFAULT_TOL = 1e-8
#: Singular values below ``NU_REL_TOL * ||M||`` count toward a kernel.
NU_REL_TOL = 1e-7

_TWO_PI = 2.0 * math.pi


class Verdict(str, Enum):
    STRONGLY_LINEARLY_STABLE = "StronglyLinearlyStable"
    LINEARLY_STABLE_NOT_STRONG = "LinearlyStableNotStrong"
    SPECTRALLY_STABLE_LINEARLY_UNSTABLE = "SpectrallyStableLinearlyUnstable"
    ELLIPTIC_HYPERBOLIC = "EllipticHyperbolic"
    HYPERBOLIC = "Hyperbolic"
    COMPLEX_SADDLE = "ComplexSaddle"

    @property
    def linearly_stable(self) -> bool:
        return self in (Verdict.STRONGLY_LINEARLY_STABLE, Verdict.LINEARLY_STABLE_NOT_STRONG)

    @property
    def hyperbolic(self) -> bool:
        return self in (Verdict.HYPERBOLIC, Verdict.COMPLEX_SADDLE)


class Region(str, Enum):
    """Position in the ``(alpha, e)`` rectangle relative to the three curves."""

    BELOW_GAMMA_K = "BelowGammaK"
    ON_GAMMA_K = "OnGammaK"
    K_TO_S = "KtoS"
    ON_GAMMA_S = "OnGammaS"
    S_TO_M = "StoM"
    ON_GAMMA_M = "OnGammaM"
    ABOVE_GAMMA_M = "AboveGammaM"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class Block:
    """Basic normal-form block.

    Attributes
    ----------
    kind : str
        ``"R"``, ``"D"``, ``"N1"``, ``"N2"``, ``"M2"`` or ``"Q"``.
    theta : float or None
        Rotation angle in ``(0, 2 pi)`` for ``R``; angle of ``omega`` for ``N2``.
    lam : complex or None
        Eigenvalue of modulus greater than one for ``D`` and ``Q``; ``+-1``
        for ``N1`` and ``M2``.
    b : int or None
        Sign of the off-diagonal entry of ``N1`` (``-1``, ``0`` or ``1``).
    trivial : bool or None
        Triviality of an ``N2`` block.
    """

    kind: str
    theta: float | None = None
    lam: complex | None = None
    b: int | None = None
    trivial: bool | None = None

    def label(self) -> str:
        if self.kind == "R":
            return f"R({self.theta:.10g})"
        if self.kind == "D":
            return f"D({self.lam.real:.10g})"
        if self.kind == "Q":
            return f"Q({self.lam.real:.10g}{self.lam.imag:+.10g}i)"
        if self.kind == "N1":
            if self.b == 0:
                return "I2" if self.lam.real > 0 else "-I2"
            return f"N1({self.lam.real:+.0f},{self.b:+d})"
        if self.kind == "N2":
            kind = "trivial" if self.trivial else "nontrivial"
            return f"N2(exp(i{self.theta:.10g}),{kind})"
        return f"M2({self.lam.real:+.0f})"

    def unit_eigenvalues(self) -> list[complex]:
        """Distinct eigenvalues of the block lying on the unit circle."""
        if self.kind in ("R", "N2"):
            w = cmath.exp(1j * self.theta)
            return [w, w.conjugate()]
        if self.kind in ("N1", "M2"):
            return [complex(self.lam)]
        return []

    def splitting(self, omega: complex, atol: float = 1e-8) -> tuple[int, int]:
        """Splitting numbers ``(S+, S-)`` of this block at ``omega``."""
        if self.kind in ("D", "Q"):
            return 0, 0
        if self.kind == "R":
            w = cmath.exp(1j * self.theta)
            if abs(omega - w) <= atol:
                return 0, 1
            if abs(omega - w.conjugate()) <= atol:
                return 1, 0
            return 0, 0
        if self.kind == "N2":
            w = cmath.exp(1j * self.theta)
            if abs(omega - w) <= atol or abs(omega - w.conjugate()) <= atol:
                return (0, 0) if self.trivial else (1, 1)
            return 0, 0
        if self.kind == "N1":
            if abs(omega - self.lam) > atol:
                return 0, 0
            # N1(1, b): (1, 1) for b in {1, 0}; N1(-1, b): (1, 1) for b in {-1, 0}.
            if self.lam.real > 0:
                return (1, 1) if self.b in (1, 0) else (0, 0)
            return (1, 1) if self.b in (-1, 0) else (0, 0)
        if abs(omega - self.lam) > atol:
            return 0, 0
        raise MarginalNormalFormError("splitting numbers of M2 blocks are not tabulated")


@dataclass(frozen=True)
class NormalForm:
    """Symplectic normal form as a ``<>``-sum of basic blocks.

    Attributes
    ----------
    tag : str
        ``"EE"``, ``"EH"``, ``"HH"``, ``"-I2<>R"``, ``"N1"``, ``"N2"`` or ``"M2"``.
    blocks : tuple of Block
    marginal : bool
        True when a tolerance snapped the spectrum onto a case boundary.
    complex_saddle : bool
        True for a complex quadruple off the unit circle.
    """

    tag: str
    blocks: tuple[Block, ...]
    marginal: bool = False
    complex_saddle: bool = False

    @property
    def label(self) -> str:
        return "<>".join(b.label() for b in self.blocks)

    @property
    def angles(self) -> tuple[float, ...]:
        """Sorted rotation angles of the ``R`` blocks."""
        return tuple(sorted(b.theta for b in self.blocks if b.kind == "R"))

    def unit_eigenvalues(self) -> list[complex]:
        out: list[complex] = []
        for block in self.blocks:
            for w in block.unit_eigenvalues():
                if all(abs(w - v) > 1e-12 for v in out):
                    out.append(w)
        return out


@dataclass(frozen=True)
class EigenStructure:
    """Spectrum of a symplectic 4x4 matrix organised by reciprocal pairs.

    Attributes
    ----------
    M : ndarray, shape (4, 4)
    eigenvalues : ndarray, shape (4,)
        Ordered as ``(l1, 1/l1, l2, 1/l2)``; unit pairs list the upper
        half-plane member first.
    s_values : tuple of complex
        ``(s1, s2)`` with ``s = l + 1/l`` after boundary snapping.
    disc : float
        Discriminant ``(s1 - s2)^2`` before snapping.
    unit_circle_flags : ndarray of bool, shape (4,)
    krein : ndarray of int, shape (4,)
        Krein sign per eigenvalue (0 off the circle or at ``+-1``).
    snapped : tuple of str
        Boundaries onto which the spectrum was snapped.
    tol : float
    """

    M: np.ndarray
    eigenvalues: np.ndarray
    s_values: tuple[complex, complex]
    disc: float
    unit_circle_flags: np.ndarray
    krein: np.ndarray
    snapped: tuple[str, ...] = field(default=())
    tol: float = DEFAULT_TOL

    @property
    def marginal(self) -> bool:
        return bool(self.snapped)

    def nu(self, omega: complex) -> int:
        """``dim ker(M - omega I)`` with a singular-value threshold."""
        return _nullity(self.M, omega)


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    normal_form: NormalForm
    region: Region


def _nullity(M: np.ndarray, omega: complex, rel_tol: float = NU_REL_TOL) -> int:
    sv = np.linalg.svd(M - omega * np.eye(4), compute_uv=False)
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    return int(np.sum(sv < rel_tol * scale))


def stability_invariants(M: np.ndarray) -> tuple[complex, complex, float]:
    """``(s1, s2, disc)`` with ``s1 + s2 = a``, ``s1 s2 = b - 2``.

    ``a`` and ``b`` are the first two elementary symmetric functions of the
    eigenvalues, which are well conditioned even at defective eigenvalues.
    """
    lam = np.linalg.eigvals(np.asarray(M, dtype=float))
    a = float(np.sum(lam).real)
    b = float(((np.sum(lam) ** 2 - np.sum(lam**2)) / 2.0).real)
    disc = a * a - 4.0 * b + 8.0
    root = cmath.sqrt(disc)
    s1, s2 = (a + root) / 2.0, (a - root) / 2.0
    if disc >= 0.0:
        s1, s2 = complex(s1.real, 0.0), complex(s2.real, 0.0)
    return s1, s2, disc


def is_hyperbolic(M: np.ndarray) -> bool:
    """True when no eigenvalue lies on the unit circle (no tolerance)."""
    s1, s2, disc = stability_invariants(M)
    if disc < 0.0:
        return True
    return abs(s1.real) > 2.0 and abs(s2.real) > 2.0


def _pair_from_s(s: complex) -> tuple[complex, complex]:
    """Eigenvalue pair ``(l, 1/l)`` with ``l + 1/l = s``.

    Unit pairs return the upper half-plane member first, real pairs the
    member of modulus greater than one.
    """
    if abs(s.imag) == 0.0 and abs(s.real) <= 2.0:
        c = s.real / 2.0
        w = complex(c, math.sqrt(max(0.0, 1.0 - c * c)))
        return w, w.conjugate()
    root = cmath.sqrt(s * s - 4.0)
    lam = (s + root) / 2.0
    if abs(lam) < 1.0:
        lam = (s - root) / 2.0
    if s.imag == 0.0:
        lam = complex(lam.real, 0.0)
    return lam, 1.0 / lam


def _null_vectors(A: np.ndarray, k: int) -> np.ndarray:
    """Right singular vectors of the ``k`` smallest singular values (columns)."""
    _, _, vh = np.linalg.svd(A)
    return vh[-k:].conj().T


def krein_sign(M: np.ndarray, omega: complex) -> int:
    """Krein sign of a simple unit eigenvalue ``omega``.

    The sign of ``Re(i x^* J x)`` for the eigenvector ``x``.
    """
    x = _null_vectors(M - omega * np.eye(4), 1)[:, 0]
    value = (1j * (x.conj() @ J4 @ x)).real
    return 1 if value > 0.0 else -1


def _krein_form(M: np.ndarray, omega: complex, dim: int) -> np.ndarray:
    """Eigenvalues of the Hermitian Krein form on a ``dim``-dimensional eigenspace."""
    V = _null_vectors(M - omega * np.eye(4), dim)
    H = 1j * (V.conj().T @ J4 @ V)
    return np.linalg.eigvalsh(0.5 * (H + H.conj().T))


def _angle_from_krein(phi: float, sign: int) -> float:
    """Rotation angle of ``R(theta)`` for the upper eigenvalue ``exp(i phi)``."""
    return phi if sign < 0 else _TWO_PI - phi


def n2_triviality_invariant(M: np.ndarray, omega: complex) -> float:
    """Symplectic invariant deciding triviality of a Krein collision at ``omega``.

    On the generalized eigenspace ``E = ker (M - omega)^2`` choose the unit
    vector ``w`` maximizing ``|(M - omega) w|``; return
    ``Re(conj(omega) w^* J (M - omega) w)``.  Negative means trivial.
    """
    A = M - omega * np.eye(4)
    E = _null_vectors(A @ A, 2)
    _, _, vh = np.linalg.svd(A @ E)
    w = E @ vh[0].conj()
    return float((omega.conjugate() * (w.conj() @ J4 @ (A @ w))).real)


def _n1_signs(M: np.ndarray, lam0: float, dim: int) -> list[int]:
    """Signs of the nilpotent parts of ``N1(lam0, b)`` blocks.

    Uses the inertia of the symmetric form ``x^T J (M - lam0) x`` restricted
    to the generalized eigenspace of ``lam0`` (dimension ``dim``).
    """
    A = M - lam0 * np.eye(4)
    if dim == 4:
        E = np.eye(4)
    else:
        E = np.real(_null_vectors(A @ A, dim))
    Q = E.T @ (J4 @ A) @ E
    vals = np.linalg.eigvalsh(0.5 * (Q + Q.T))
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    return [1 if v > 0 else -1 for v in vals if abs(v) > NU_REL_TOL * scale]


def eigenstructure(M: np.ndarray, tol: float = DEFAULT_TOL) -> EigenStructure:
    """Spectrum, unit-circle membership and Krein signs of ``M``."""
    M = np.asarray(M, dtype=float)
    s1, s2, disc = stability_invariants(M)
    snapped: list[str] = []
    if abs(disc) <= tol:
        mean = complex(0.5 * (s1 + s2).real, 0.0)
        s1 = s2 = mean
        snapped.append("collision")
    values = []
    for s in (s1, s2):
        if s.imag == 0.0:
            for target in (2.0, -2.0):
                if abs(s.real - target) <= tol:
                    s = complex(target, 0.0)
                    snapped.append(f"eigenvalue {target / 2:+.0f}")
        values.append(s)
    s1, s2 = values
    if s1.imag == 0.0 and s2.imag == 0.0 and s2.real > s1.real:
        s1, s2 = s2, s1
    eig = np.array([*_pair_from_s(s1), *_pair_from_s(s2)], dtype=complex)
    unit = np.array([abs(abs(v) - 1.0) <= tol for v in eig])
    krein = np.zeros(4, dtype=int)
    if "collision" not in snapped:
        for idx in (0, 2):
            w = eig[idx]
            if unit[idx] and abs(w.imag) > 0.0:
                sign = krein_sign(M, w)
                krein[idx], krein[idx + 1] = sign, -sign
    return EigenStructure(
        M=M,
        eigenvalues=eig,
        s_values=(s1, s2),
        disc=disc,
        unit_circle_flags=unit,
        krein=krein,
        snapped=tuple(dict.fromkeys(snapped)),
        tol=tol,
    )


def _pair_block(M: np.ndarray, s: complex) -> Block:
    """Block for a simple reciprocal pair with invariant ``s`` (``s != +-2``)."""
    lam, _ = _pair_from_s(s)
    if s.imag != 0.0:
        return Block("Q", lam=lam)
    if abs(s.real) > 2.0:
        return Block("D", lam=complex(lam.real, 0.0))
    phi = math.acos(max(-1.0, min(1.0, s.real / 2.0)))
    return Block("R", theta=_angle_from_krein(phi, krein_sign(M, lam)))


def _tag(blocks: list[Block]) -> str:
    kinds = sorted(b.kind for b in blocks)
    if kinds == ["R", "R"]:
        return "EE"
    if kinds == ["D", "R"]:
        return "EH"
    if kinds in (["D", "D"], ["Q"]):
        return "HH"
    if "N2" in kinds:
        return "N2"
    if "M2" in kinds:
        return "M2"
    if kinds == ["N1", "R"]:
        n1 = next(b for b in blocks if b.kind == "N1")
        if n1.lam.real < 0 and n1.b == 0:
            return "-I2<>R"
    return "N1"


def classify_normal_form(es: EigenStructure, M: np.ndarray | None = None, tol: float | None = None) -> NormalForm:
    """Basic normal form of the period map.

    Parameters
    ----------
    es : EigenStructure
    M : ndarray, optional
        Period map (defaults to ``es.M``).
    tol : float, optional
        Boundary tolerance; re-derives the eigenstructure when it differs
        from ``es.tol``.

    Raises
    ------
    ClassificationError
        If the spectrum matches no supported configuration.
    """
    if M is None:
        M = es.M
    if tol is not None and tol != es.tol:
        es = eigenstructure(M, tol)
    s1, s2 = es.s_values
    marginal = es.marginal
    blocks: list[Block] = []

    if s1.imag != 0.0:
        return NormalForm("HH", (Block("Q", lam=es.eigenvalues[0]),), marginal, complex_saddle=True)

    collision = "collision" in es.snapped
    x1, x2 = s1.real, s2.real
    special = [x for x in (x1, x2) if abs(x) == 2.0]

    if collision and not special:
        s = x1
        if abs(s) > 2.0:
            lam = _pair_from_s(complex(s, 0.0))[0]
            blocks = [Block("D", lam=lam), Block("D", lam=lam)]
        else:
            omega = _pair_from_s(complex(s, 0.0))[0]
            phi = cmath.phase(omega)
            if es.nu(omega) >= 2:
                form = _krein_form(M, omega, 2)
                signs = [1 if v > 0 else -1 for v in form]
                blocks = [Block("R", theta=_angle_from_krein(phi, sg)) for sg in signs]
            else:
                trivial = n2_triviality_invariant(M, omega) < 0.0
                blocks = [Block("N2", theta=_TWO_PI - phi, trivial=trivial)]
        return NormalForm(_tag(blocks), tuple(blocks), marginal)

    if not special:
        blocks = [_pair_block(M, s1), _pair_block(M, s2)]
        return NormalForm(_tag(blocks), tuple(blocks), marginal)

    if len(special) == 2 and x1 == x2:
        lam0 = x1 / 2.0
        nu = es.nu(lam0)
        signs = _n1_signs(M, lam0, 4)
        if nu >= 4:
            blocks = [Block("N1", lam=complex(lam0), b=0), Block("N1", lam=complex(lam0), b=0)]
        elif nu == 3:
            b = signs[0] if signs else 0
            blocks = [Block("N1", lam=complex(lam0), b=b), Block("N1", lam=complex(lam0), b=0)]
        elif nu == 2 and len(signs) == 2:
            blocks = [Block("N1", lam=complex(lam0), b=sg) for sg in signs]
        elif nu >= 1:
            blocks = [Block("M2", lam=complex(lam0))]
        else:
            raise ClassificationError("eigenvalue +-1 with trivial kernel")
        return NormalForm(_tag(blocks), tuple(blocks), marginal)

    for x in (x1, x2):
        if abs(x) == 2.0:
            lam0 = x / 2.0
            if es.nu(lam0) >= 2:
                b = 0
            else:
                signs = _n1_signs(M, lam0, 2)
                b = signs[0] if signs else 0
            blocks.append(Block("N1", lam=complex(lam0), b=b))
        else:
            blocks.append(_pair_block(M, complex(x, 0.0)))
    return NormalForm(_tag(blocks), tuple(blocks), marginal)


def classify(M: np.ndarray, tol: float = DEFAULT_TOL) -> NormalForm:
    """Shortcut for ``classify_normal_form(eigenstructure(M, tol))``."""
    return classify_normal_form(eigenstructure(M, tol))


def splitting_numbers(nf: NormalForm, omega: complex, atol: float = 1e-8) -> tuple[int, int]:
    """Splitting numbers ``(S+, S-)`` at ``omega`` by symplectic additivity."""
    plus = minus = 0
    for block in nf.blocks:
        p, m = block.splitting(omega, atol)
        plus += p
        minus += m
    return plus, minus


def _verdict_for(nf: NormalForm) -> Verdict:
    kinds = sorted(b.kind for b in nf.blocks)
    if nf.tag == "HH":
        return Verdict.COMPLEX_SADDLE if nf.complex_saddle else Verdict.HYPERBOLIC
    if nf.tag == "EE":
        thetas = [b.theta for b in nf.blocks]
        if abs(thetas[0] - thetas[1]) > 1e-12 and abs(thetas[0] + thetas[1] - _TWO_PI) > 1e-12:
            return Verdict.STRONGLY_LINEARLY_STABLE
        same_side = (thetas[0] < math.pi) == (thetas[1] < math.pi)
        return Verdict.STRONGLY_LINEARLY_STABLE if same_side else Verdict.LINEARLY_STABLE_NOT_STRONG
    if nf.tag == "EH":
        return Verdict.ELLIPTIC_HYPERBOLIC
    if nf.tag == "-I2<>R":
        return Verdict.LINEARLY_STABLE_NOT_STRONG
    if "D" in kinds or "Q" in kinds:
        return Verdict.ELLIPTIC_HYPERBOLIC
    if nf.tag in ("N2", "M2"):
        return Verdict.SPECTRALLY_STABLE_LINEARLY_UNSTABLE
    if any(b.kind == "N1" and b.b != 0 for b in nf.blocks):
        return Verdict.SPECTRALLY_STABLE_LINEARLY_UNSTABLE
    return Verdict.LINEARLY_STABLE_NOT_STRONG


def _region_for(nf: NormalForm) -> Region:
    kinds = sorted(b.kind for b in nf.blocks)
    if nf.tag == "HH":
        return Region.BELOW_GAMMA_K
    if nf.tag in ("N2", "M2"):
        return Region.ON_GAMMA_K
    if nf.tag == "EE":
        upper = sum(1 for b in nf.blocks if b.theta > math.pi)
        if upper == 2:
            return Region.ABOVE_GAMMA_M
        if upper == 1:
            return Region.K_TO_S
        return Region.UNCLASSIFIED
    if nf.tag == "EH":
        return Region.S_TO_M
    if nf.tag == "-I2<>R":
        return Region.ON_GAMMA_S
    n1 = [b for b in nf.blocks if b.kind == "N1"]
    if len(n1) == 1 and n1[0].lam.real < 0:
        if "D" in kinds:
            return Region.ON_GAMMA_K
        return Region.ON_GAMMA_S if n1[0].b == -1 else Region.ON_GAMMA_M
    return Region.UNCLASSIFIED


def stability_verdict(nf: NormalForm) -> StabilityVerdict:
    """Stability verdict and region label of a normal form."""
    return StabilityVerdict(verdict=_verdict_for(nf), normal_form=nf, region=_region_for(nf))
