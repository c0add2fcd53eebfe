import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from erestab.errors import MarginalNormalFormError
from erestab.monodromy import period_map
from erestab.reduction import J4
from erestab.spectral import (
    Block,
    NormalForm,
    Region,
    Verdict,
    classify,
    eigenstructure,
    is_hyperbolic,
    krein_sign,
    splitting_numbers,
    stability_invariants,
    stability_verdict,
)


def rot(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def diamond(A, B):
    """Symplectic sum of two 2x2 symplectic matrices in (x1, x2, y1, y2) order."""
    M = np.zeros((4, 4))
    M[np.ix_([0, 2], [0, 2])] = A
    M[np.ix_([1, 3], [1, 3])] = B
    return M


def random_symplectic(rng, scale=0.3):
    S = rng.normal(size=(4, 4)) * scale
    return expm(J4 @ (S + S.T))


def conjugate(M, P):
    return P @ M @ np.linalg.inv(P)


angles = st.floats(0.05, 2 * math.pi - 0.05)


def test_diamond_is_symplectic():
    M = diamond(rot(0.3), np.array([[2.0, 0.0], [0.0, 0.5]]))
    assert np.allclose(M.T @ J4 @ M, J4)


@settings(max_examples=60, deadline=None)
@given(angles, angles, st.integers(0, 10_000))
def test_rotation_angles_recovered(a, b, seed):
    assume(abs(a - b) > 0.05 and abs(a + b - 2 * math.pi) > 0.05 and abs(a - math.pi) > 0.05 and abs(b - math.pi) > 0.05)
    P = random_symplectic(np.random.default_rng(seed))
    nf = classify(conjugate(diamond(rot(a), rot(b)), P))
    assert nf.tag == "EE"
    assert np.allclose(nf.angles, sorted([a, b]), atol=1e-8)
    assert not nf.marginal


@settings(max_examples=40, deadline=None)
@given(st.floats(1.1, 5.0), angles, st.integers(0, 10_000))
def test_elliptic_hyperbolic(lam, a, seed):
    assume(abs(a - math.pi) > 0.05)
    P = random_symplectic(np.random.default_rng(seed))
    nf = classify(conjugate(diamond(np.diag([lam, 1 / lam]), rot(a)), P))
    assert nf.tag == "EH"
    d = next(b for b in nf.blocks if b.kind == "D")
    assert d.lam.real == pytest.approx(lam, rel=1e-8)
    assert nf.angles[0] == pytest.approx(a, abs=1e-8)
    assert stability_verdict(nf).verdict is Verdict.ELLIPTIC_HYPERBOLIC


@settings(max_examples=40, deadline=None)
@given(st.floats(1.1, 3.0), st.floats(0.2, 2.9), st.integers(0, 10_000))
def test_complex_saddle(r, phi, seed):
    A = r * rot(phi)
    M = np.zeros((4, 4))
    M[:2, :2] = A
    M[2:, 2:] = np.linalg.inv(A).T
    M = conjugate(M, random_symplectic(np.random.default_rng(seed)))
    nf = classify(M)
    assert nf.complex_saddle and nf.tag == "HH"
    assert is_hyperbolic(M)
    assert stability_verdict(nf).verdict is Verdict.COMPLEX_SADDLE


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 3.0), st.integers(0, 10_000))
def test_reciprocal_pairs(theta, seed):
    rng = np.random.default_rng(seed)
    M = conjugate(diamond(np.diag([2.5, 0.4]), rot(theta)), random_symplectic(rng))
    es = eigenstructure(M)
    lam = es.eigenvalues
    assert lam[0] * lam[1] == pytest.approx(1.0, abs=1e-8)
    assert lam[2] * lam[3] == pytest.approx(1.0, abs=1e-8)
    s1, s2, _ = stability_invariants(M)
    assert sorted([s1.real, s2.real]) == pytest.approx(sorted([2.9, 2 * math.cos(theta)]), abs=1e-8)


def test_krein_sign_of_rotation():
    # R(theta) with theta in (0, pi): exp(i theta) is Krein negative
    M = diamond(rot(1.0), rot(2.0))
    assert krein_sign(M, cmath.exp(1j * 1.0)) == -1
    assert krein_sign(M, cmath.exp(-1j * 1.0)) == 1


@pytest.mark.parametrize("b", [-1.0, 1.0])
@pytest.mark.parametrize("lam0", [-1.0, 1.0])
def test_n1_sign_recovered(lam0, b):
    M = diamond(np.array([[lam0, b], [0.0, lam0]]), rot(2.0))
    M = conjugate(M, random_symplectic(np.random.default_rng(3)))
    nf = classify(M)
    n1 = next(blk for blk in nf.blocks if blk.kind == "N1")
    assert n1.lam.real == lam0
    assert n1.b == int(b)
    assert nf.marginal


def test_minus_identity_block():
    M = diamond(-np.eye(2), rot(5.0))
    nf = classify(M)
    assert nf.tag == "-I2<>R"
    assert nf.angles[0] == pytest.approx(5.0)
    assert stability_verdict(nf).region is Region.ON_GAMMA_S


def test_double_rotation_with_definite_krein_form():
    M = diamond(rot(4.0), rot(4.0))
    nf = classify(M)
    assert nf.tag == "EE" and nf.marginal
    assert nf.angles == pytest.approx((4.0, 4.0))
    assert stability_verdict(nf).verdict is Verdict.STRONGLY_LINEARLY_STABLE


def test_mixed_krein_double_rotation_is_not_strong():
    M = diamond(rot(1.0), rot(2 * math.pi - 1.0))
    nf = classify(M)
    assert nf.tag == "EE"
    assert stability_verdict(nf).verdict is Verdict.LINEARLY_STABLE_NOT_STRONG


@pytest.mark.parametrize(
    "alpha,tag,verdict",
    [
        (1.0, "HH", Verdict.COMPLEX_SADDLE),
        (2.5, "HH", Verdict.COMPLEX_SADDLE),
        (2.85, "EE", Verdict.STRONGLY_LINEARLY_STABLE),
        (2.9, "EE", Verdict.STRONGLY_LINEARLY_STABLE),
        (2.95, "EE", Verdict.STRONGLY_LINEARLY_STABLE),
    ],
)
def test_circular_period_maps(alpha, tag, verdict):
    nf = classify(period_map(alpha, 0.0).period_map)
    assert nf.tag == tag
    assert stability_verdict(nf).verdict is verdict


def test_krein_collision_at_two_sqrt_two():
    nf = classify(period_map(2 * math.sqrt(2), 0.0).period_map)
    assert nf.tag == "N2" and nf.marginal
    block = nf.blocks[0]
    assert block.trivial
    assert cmath.exp(1j * block.theta) == pytest.approx(cmath.exp(1j * math.sqrt(2) * math.pi), abs=1e-6)
    assert stability_verdict(nf).verdict is Verdict.SPECTRALLY_STABLE_LINEARLY_UNSTABLE


def test_alpha_three_has_defective_unit_eigenvalue():
    nf = classify(period_map(3.0, 0.0).period_map)
    assert nf.tag == "N1" and nf.marginal
    kinds = sorted((b.kind, b.b) for b in nf.blocks)
    assert kinds == [("N1", 0), ("N1", 1)]
    assert stability_verdict(nf).verdict is Verdict.SPECTRALLY_STABLE_LINEARLY_UNSTABLE


def test_eigenstructure_snaps_within_tolerance():
    M = diamond(rot(math.pi + 1e-5), rot(2.0))
    assert eigenstructure(M).marginal
    assert not eigenstructure(M, tol=1e-12).marginal


@settings(max_examples=60, deadline=None)
@given(angles, angles, st.floats(0.0, 2 * math.pi))
def test_splitting_number_axioms(a, b, phi):
    assume(abs(a - b) > 0.05 and abs(a + b - 2 * math.pi) > 0.05 and abs(a - math.pi) > 0.05 and abs(b - math.pi) > 0.05)
    nf = classify(diamond(rot(a), rot(b)))
    omega = cmath.exp(1j * phi)
    plus, minus = splitting_numbers(nf, omega)
    plus_c, minus_c = splitting_numbers(nf, omega.conjugate())
    assert (plus, minus) == (minus_c, plus_c)
    if min(abs(omega - w) for w in nf.unit_eigenvalues()) > 1e-6:
        assert (plus, minus) == (0, 0)
    for theta in (a, b):
        w = cmath.exp(1j * theta)
        p, m = splitting_numbers(nf, w)
        assert p + m == 1


def test_splitting_of_m2_block_is_refused():
    nf = NormalForm("M2", (Block("M2", lam=-1 + 0j),))
    with pytest.raises(MarginalNormalFormError):
        splitting_numbers(nf, -1.0)
