import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from chronograph import matfun


def random_complex(seed, n=4, scale=1.0):
    r = np.random.default_rng(seed)
    M = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    return scale * M / n


def reference_expm(A, t=1.0, terms=60, prec=200):
    """Scaled Taylor series at 200-bit precision; shares nothing with expm."""
    n = A.shape[0]
    with mpmath.workprec(prec):
        M = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                M[i, j] = mpmath.mpc(A[i, j]) * mpmath.mpf(t)
        norm = max(sum(abs(M[i, j]) for j in range(n)) for i in range(n))
        k = 0
        if norm > 0.5:
            k = int(mpmath.floor(mpmath.log(norm, 2))) + 2
            M = M / mpmath.mpf(2 ** k)
        E = mpmath.eye(n)
        term = mpmath.eye(n)
        for j in range(1, terms):
            term = term * M / j
            E = E + term
        for _ in range(k):
            E = E * E
        return np.array([[complex(E[i, j]) for j in range(n)]
                         for i in range(n)])


def test_expm_against_high_precision_series():
    A = random_complex(7, n=4, scale=3.0)
    got = matfun.expm(A, 0.7)
    want = reference_expm(A, 0.7)
    assert np.max(np.abs(got - want)) <= 1e-12 * np.linalg.norm(want, 2)


def test_expm_large_norm_goes_through_squaring():
    A = random_complex(11, n=5, scale=35.0)
    got = matfun.expm(A)
    want = reference_expm(A)
    assert np.max(np.abs(got - want)) <= 1e-11 * np.linalg.norm(want, 2)


def test_expm_zero_matrix_is_exactly_identity():
    assert np.array_equal(matfun.expm(np.zeros((3, 3))), np.eye(3))


def test_expm_scalar_and_diagonal():
    got = matfun.expm(np.array([[-1.0]]), 1.0)[0, 0]
    assert abs(got - math.exp(-1.0)) <= 1e-15
    D = np.diag([-1.0, -2.0, 0.5])
    got = matfun.expm(D, 2.0)
    assert np.max(np.abs(got - np.diag(np.exp(2.0 * np.diag(D))))) <= 1e-13


def test_expm_rejects_bad_input():
    with pytest.raises(ValueError):
        matfun.expm(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        matfun.expm(np.array([[np.inf]]))


@given(st.integers(0, 10 ** 6))
def test_expm_semigroup_property(seed):
    A = random_complex(seed, n=3, scale=2.0)
    full = matfun.expm(A, 0.9)
    split = matfun.expm(A, 0.5) @ matfun.expm(A, 0.4)
    assert np.max(np.abs(full - split)) <= 1e-10 * max(
        1.0, np.linalg.norm(full, 2))


@given(st.integers(0, 10 ** 6))
def test_expm_inverse_is_negated_exponent(seed):
    A = random_complex(seed, n=3, scale=2.0)
    prod = matfun.expm(A) @ matfun.expm(-A)
    assert np.max(np.abs(prod - np.eye(3))) <= 1e-10


@given(st.integers(0, 10 ** 6))
def test_expm_of_skew_hermitian_is_unitary(seed):
    M = random_complex(seed, n=4, scale=2.0)
    K = M - M.conj().T
    U = matfun.expm(K)
    assert np.max(np.abs(U @ U.conj().T - np.eye(4))) <= 1e-11


def test_phi_triple_scalar_values():
    E, P1, P2 = matfun.expm_phi12(np.array([[1.0]]), 1.0)
    assert abs(E[0, 0] - math.e) <= 1e-14
    assert abs(P1[0, 0] - (math.e - 1.0)) <= 1e-14
    assert abs(P2[0, 0] - (math.e - 2.0)) <= 1e-14


def test_phi_triple_at_zero_operator():
    E, P1, P2 = matfun.expm_phi12(np.zeros((2, 2)), 1.0)
    assert np.allclose(E, np.eye(2), atol=1e-15)
    assert np.allclose(P1, np.eye(2), atol=1e-13)
    assert np.allclose(P2, 0.5 * np.eye(2), atol=1e-13)


@given(st.integers(0, 10 ** 6))
def test_phi_recurrence_identities(seed):
    A = random_complex(seed, n=3, scale=2.0)
    h = 0.37
    E, P1, P2 = matfun.expm_phi12(A, h)
    # e^{hA} = I + hA phi1 and phi1 = I + hA phi2
    assert np.max(np.abs(E - np.eye(3) - h * A @ P1)) <= 1e-11
    assert np.max(np.abs(P1 - np.eye(3) - h * A @ P2)) <= 1e-11


def test_phi_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        matfun.expm_phi12(np.eye(2), 0.0)
    with pytest.raises(ValueError):
        matfun.phi1(np.eye(2), -1.0)


def test_phi_shortcuts_match_triple():
    A = random_complex(3, n=3)
    _, P1, P2 = matfun.expm_phi12(A, 0.5)
    assert np.array_equal(matfun.phi1(A, 0.5), P1)
    assert np.array_equal(matfun.phi2(A, 0.5), P2)


def test_solve_linear_and_rcond():
    M = np.diag([2.0, 1.0])
    X, rc = matfun.solve_linear(M, np.array([2.0, 3.0]))
    assert np.allclose(X, [1.0, 3.0])
    assert abs(rc - 0.5) <= 1e-14


def test_solve_linear_rejects_singular():
    with pytest.raises(matfun.SingularMatrix) as err:
        matfun.solve_linear(np.zeros((2, 2)), np.ones(2))
    assert err.value.rcond <= matfun.SINGULARITY_RCOND


def test_rcond_estimators():
    assert matfun.rcond_estimate(np.zeros((2, 2))) == 0.0
    assert abs(matfun.rcond_estimate(np.diag([1.0, 1e-6])) - 1e-6) <= 1e-18
    # scalar matrices: plain ratio saturates at 1, identity-scale does not
    assert matfun.rcond_estimate(np.array([[1e-16]])) == 1.0
    assert matfun.rcond_identity_scale(np.array([[1e-16]])) <= 1e-15
    assert abs(matfun.rcond_identity_scale(np.array([[0.5]])) - 0.5) <= 1e-15
    assert abs(matfun.rcond_identity_scale(np.diag([2.0, 1.0])) - 0.5) <= 1e-15


def test_hermitian_eig_round_trip(rng):
    M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = M + M.conj().T
    eig = matfun.hermitian_eig(H)
    assert np.max(np.abs(eig.reconstruct() - H)) <= 1e-12 * np.linalg.norm(H, 2)
    assert np.max(np.abs(np.sort(eig.eigenvalues)
                         - np.sort(np.linalg.eigvalsh(H)))) <= 1e-10


def test_hermitian_eig_rejects_asymmetric():
    with pytest.raises(matfun.NotHermitian):
        matfun.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermitian_eig_symmetrizes_roundoff():
    H = np.array([[1.0, 0.5], [0.5 + 1e-14, 2.0]])
    eig = matfun.hermitian_eig(H)
    assert np.max(np.abs(eig.reconstruct() - H)) <= 1e-12


def test_funm_hermitian_exponential(rng):
    M = rng.standard_normal((3, 3))
    H = M + M.T
    eig = matfun.hermitian_eig(H)
    got = matfun.funm_hermitian(eig, math.exp)
    assert np.max(np.abs(got - matfun.expm(H))) <= 1e-11 * np.linalg.norm(
        got, 2)


def test_funm_hermitian_square(rng):
    M = rng.standard_normal((3, 3))
    H = M + M.T
    eig = matfun.hermitian_eig(H)
    got = matfun.funm_hermitian(eig, lambda x: x * x)
    assert np.max(np.abs(got - H @ H)) <= 1e-12 * max(
        1.0, np.linalg.norm(H @ H, 2))


def test_spectral_radius():
    A = np.array([[0.0, 1.0], [-4.0, 0.0]])
    assert abs(matfun.spectral_radius(A) - 2.0) <= 1e-12
    assert matfun.spectral_radius(np.zeros((2, 2))) == 0.0
