import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erestab.errors import InputError, MarginalNormalFormError
from erestab.maslov import (
    alpha_from_beta,
    assemble_galerkin,
    bott_check,
    count_below,
    galerkin_counts,
    galerkin_eigenvalues,
    index_via_splitting,
    morse_index,
    morse_index_beta,
    negative_count,
    potential_samples,
    rho_of,
)
from erestab.monodromy import monodromy_circular, period_map


def inverse_kepler_factor_coefficient(e, n):
    """Oracle: Fourier coefficient of 1 / (1 + e cos t) in closed form."""
    root = math.sqrt(1.0 - e * e)
    lam = (1.0 - root) / e if e > 0 else 0.0
    return (-lam) ** abs(n) / root


@pytest.mark.parametrize("e", [0.0, 0.3, 0.8])
def test_potential_fourier_coefficients_match_series(e):
    problem = assemble_galerkin(0.0, e, 1.0, 16)
    for n in range(-6, 7):
        expected = 1.5 * inverse_kepler_factor_coefficient(e, n)
        assert problem.coeffs[n, 0, 0] == pytest.approx(expected, abs=1e-13)
        assert problem.coeffs[n, 1, 1] == pytest.approx(expected, abs=1e-13)
        assert abs(problem.coeffs[n, 0, 1]) < 1e-13


@pytest.mark.parametrize("alpha,e,omega", [(2.9, 0.0, 1.0), (1.3, 0.5, -1.0), (2.5, 0.7, cmath.exp(0.7j))])
def test_quadratic_form_matches_quadrature(alpha, e, omega):
    """<A y, y> from the Galerkin matrix equals the quadrature of the action."""
    N = 12
    problem = assemble_galerkin(alpha, e, omega, N)
    rng = np.random.default_rng(11)
    c = (rng.normal(size=(2 * N + 1, 2)) + 1j * rng.normal(size=(2 * N + 1, 2))) * np.exp(-0.3 * np.abs(np.arange(-N, N + 1)))[:, None]
    vec = c.reshape(-1)
    galerkin = (vec.conj() @ problem.matrix @ vec).real

    rho = problem.rho
    t = np.linspace(0.0, 2 * math.pi, 4001)[:-1]
    k = np.arange(-N, N + 1) + rho
    phase = np.exp(1j * np.outer(t, k))
    y = phase @ c
    dy = phase @ (1j * k[:, None] * c)
    V = potential_samples(alpha, e, t)
    integrand = np.sum(np.abs(dy) ** 2, axis=1) - np.sum(np.abs(y) ** 2, axis=1) + np.einsum("ti,tij,tj->t", y.conj(), V, y).real
    quadrature = float(np.mean(integrand))
    assert galerkin == pytest.approx(quadrature, rel=1e-10)


def test_boundary_condition_shift():
    assert rho_of(1.0) == 0.0
    assert rho_of(-1.0) == pytest.approx(0.5)
    assert rho_of(cmath.exp(-0.5j)) == pytest.approx(1 - 0.25 / math.pi)
    with pytest.raises(InputError):
        rho_of(2.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 0.85), st.floats(0.0, 1.0), st.sampled_from([1, 2]), st.floats(-0.5, 0.5))
def test_inertia_count_matches_eigenvalues(alpha, e, rho, periods, shift):
    problem = assemble_galerkin(alpha, e, cmath.exp(2j * math.pi * rho), 24, periods)
    dense = np.linalg.eigvalsh(problem.matrix)
    gap = np.min(np.abs(dense - shift))
    if gap > 1e-9:
        assert count_below(problem, shift) == int(np.sum(dense < shift))
        assert count_below(problem, shift) == int(np.sum(galerkin_eigenvalues(problem, problem.size) < shift))


def test_band_storage_reproduces_dense_matrix():
    problem = assemble_galerkin(2.2, 0.6, -1.0, 20)
    band = problem.band()
    H = problem.matrix
    for d in range(band.shape[0]):
        assert np.allclose(band[d, : problem.size - d], np.diag(H, -d), atol=1e-15)
    assert np.allclose(H, H.conj().T)


@pytest.mark.parametrize("e", [0.0, 0.2, 0.4, 0.6, 0.8])
@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0, 2.75, 3.0])
def test_periodic_index_vanishes(alpha, e):
    assert morse_index(alpha, e, 1.0).i_omega == 0


@pytest.mark.parametrize("e", [0.0, 0.2, 0.5, 0.8])
def test_endpoint_indices(e):
    top_minus = morse_index(3.0, e, -1.0)
    top_plus = morse_index(3.0, e, 1.0)
    bottom = morse_index(0.0, e, -1.0)
    assert (top_minus.i_omega, top_plus.nu_omega) == (2, 3)
    assert (bottom.i_omega, bottom.nu_omega) == (0, 0)
    assert top_minus.converged and top_plus.converged and bottom.converged


@pytest.mark.parametrize("e", [0.0, 0.5])
def test_minus_one_index_is_monotone(e):
    counts = [negative_count(a, e, -1.0) for a in np.linspace(0.0, 3.0, 31)]
    assert counts[0] == 0 and counts[-1] == 2
    assert all(b >= a for a, b in zip(counts, counts[1:]))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 0.8), st.floats(0.01, math.pi - 0.01))
def test_index_is_symmetric_under_conjugation(alpha, e, phi):
    a = morse_index(alpha, e, cmath.exp(1j * phi), N0=32, N_max=64)
    b = morse_index(alpha, e, cmath.exp(-1j * phi), N0=32, N_max=64)
    assert (a.i_omega, a.nu_omega) == (b.i_omega, b.nu_omega)


@pytest.mark.parametrize("alpha,omega", [(2.85, -1.0), (2.9, -1.0), (2.5, 1j), (2.95, cmath.exp(2.0j)), (1.0, -1.0)])
def test_circular_index_by_two_routes(alpha, omega):
    i1 = morse_index(alpha, 0.0, 1.0).i_omega
    galerkin = morse_index(alpha, 0.0, omega).i_omega
    assert index_via_splitting(i1, monodromy_circular(alpha), omega) == galerkin


def test_index_at_2_85_circular():
    assert morse_index(2.85, 0.0, -1.0).i_omega == 0
    assert morse_index(2.9, 0.0, -1.0).i_omega == 2


def test_splitting_route_refuses_marginal_forms():
    with pytest.raises(MarginalNormalFormError):
        index_via_splitting(0, period_map(3.0, 0.0).period_map, -1.0)


@pytest.mark.parametrize("alpha,e", [(2.0, 0.5), (3.0, 0.3), (0.0, 0.8), (2.95, 0.8), (2.86, 0.1)])
def test_bott_identity(alpha, e):
    check = bott_check(alpha, e)
    assert check.holds
    assert check.lhs == check.i1 + check.im1


def test_null_count_at_alpha_three():
    problem = assemble_galerkin(3.0, 0.4, 1.0, 128)
    assert galerkin_counts(problem) == (0, 3)


def test_beta_parametrization():
    assert alpha_from_beta(0.0) == 3.0
    assert alpha_from_beta(9.0) == 0.0
    assert morse_index_beta(0.0, 0.3, -1.0).i_omega == 2
    with pytest.raises(InputError):
        alpha_from_beta(10.0)


def test_input_validation():
    with pytest.raises(InputError):
        assemble_galerkin(3.5, 0.2, 1.0, 8)
    with pytest.raises(InputError):
        assemble_galerkin(1.0, 0.995, 1.0, 8)
    with pytest.raises(InputError):
        assemble_galerkin(1.0, 0.2, 1.0, 0)


@pytest.mark.parametrize("N", [64, 256, 1024])
def test_null_threshold_does_not_grow_with_cutoff(N):
    """A genuine eigenvalue of size ~1e-4 just past a jump is negative, not null."""
    problem = assemble_galerkin(2.8207835985, 0.2, -1.0, N)
    assert galerkin_counts(problem) == (1, 0)
