"""Dense matrix kernels: exponential, phi-functions, solves, Hermitian calculus.

Everything downstream (monodromy assembly, exponential integrators, unitarity
and factorization checks) is built on these few functions.  All routines work
on complex arrays; real inputs are promoted.
"""

import numpy as np
import scipy.linalg as la

# Hard singularity threshold for linear solves (reciprocal 2-norm condition).
SINGULARITY_RCOND = 1e-14
# Relative tolerance for accepting a matrix as Hermitian.
HERMITIAN_TOL = 1e-10


class SingularMatrix(Exception):
    """Linear system rejected: reciprocal condition estimate below threshold."""

    def __init__(self, rcond):
        super().__init__(f"matrix numerically singular (rcond={rcond:.3e})")
        self.rcond = rcond


class NotHermitian(Exception):
    """Input failed the Hermitian symmetry check."""


def _as_square(A):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


# Pade-13 numerator coefficients for the diagonal approximant of exp.
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
    33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
# Scaling threshold so that the order-13 approximant is accurate to unit
# roundoff (Higham's theta_13).
_THETA13 = 5.371920351148152


def expm(A, t=1.0):
    """Matrix exponential e^{tA} by scaling and squaring with Pade-13.

    Exact (to roundoff) for diagonal and nilpotent inputs; target accuracy
    1e-12 relative in the spectral norm for ||tA|| up to ~50.
    """
    A = _as_square(A)
    n = A.shape[0]
    if not np.all(np.isfinite(A)) or not np.isfinite(t):
        raise ValueError("non-finite entries in matrix exponential input")
    B = t * A
    norm = np.linalg.norm(B, 1)
    if norm == 0.0:
        return np.eye(n, dtype=complex)  # exact, avoids solver roundoff
    s = 0
    if norm > _THETA13:
        s = int(np.ceil(np.log2(norm / _THETA13)))
        B = B / (2.0 ** s)
    I = np.eye(n, dtype=complex)
    B2 = B @ B
    B4 = B2 @ B2
    B6 = B2 @ B4
    b = _PADE13
    U = B @ (B6 @ (b[13] * B6 + b[11] * B4 + b[9] * B2)
             + b[7] * B6 + b[5] * B4 + b[3] * B2 + b[1] * I)
    V = (B6 @ (b[12] * B6 + b[10] * B4 + b[8] * B2)
         + b[6] * B6 + b[4] * B4 + b[2] * B2 + b[0] * I)
    E = la.solve(V - U, V + U)
    for _ in range(s):
        E = E @ E
    return E


def expm_phi12(A, h):
    """Return (e^{hA}, phi1(hA), phi2(hA)) in one augmented exponential.

    phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, extended by their
    limits at z = 0.  The triple is read off the top block row of
    exp([[hA, I, 0], [0, 0, I], [0, 0, 0]]), so singular A needs no special
    casing.
    """
    A = _as_square(A)
    if not h > 0:
        raise ValueError("step h must be positive")
    n = A.shape[0]
    W = np.zeros((3 * n, 3 * n), dtype=complex)
    W[:n, :n] = h * A
    W[:n, n:2 * n] = np.eye(n)
    W[n:2 * n, 2 * n:] = np.eye(n)
    Ew = expm(W)
    return Ew[:n, :n], Ew[:n, n:2 * n], Ew[:n, 2 * n:]


def phi1(A, h):
    """phi1(hA) = (hA)^{-1}(e^{hA} - I), by limits where hA is singular."""
    return expm_phi12(A, h)[1]


def phi2(A, h):
    """phi2(hA) = (hA)^{-2}(e^{hA} - I - hA), by limits where hA is singular."""
    return expm_phi12(A, h)[2]


def rcond_estimate(M):
    """Reciprocal 2-norm condition number sigma_min/sigma_max (0 for the zero matrix)."""
    M = _as_square(M)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0.0
    return float(sv[-1] / sv[0])


def rcond_identity_scale(M):
    """sigma_min(M) / max(1, sigma_max(M)).

    Conditioning for matrices of the form I - X: the identity fixes the unit
    of scale, so a matrix that is an O(eps) residue of cancellation counts as
    singular even in dimension one, where sigma_min/sigma_max is always 1.
    """
    M = _as_square(M)
    sv = np.linalg.svd(M, compute_uv=False)
    return float(sv[-1] / max(float(sv[0]), 1.0))


def solve_linear(M, rhs):
    """Solve M X = rhs by LU; returns (X, rcond estimate).

    Raises SingularMatrix when the reciprocal condition estimate falls below
    SINGULARITY_RCOND.
    """
    M = _as_square(M)
    rhs = np.asarray(rhs, dtype=complex)
    rc = rcond_estimate(M)
    if rc < SINGULARITY_RCOND:
        raise SingularMatrix(rc)
    X = la.solve(M, rhs)
    return X, rc


class HermitianEigenSystem:
    """Spectral decomposition A = V diag(w) V* with real ascending eigenvalues."""

    def __init__(self, eigenvalues, eigenvectors):
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.eigenvectors = np.asarray(eigenvectors, dtype=complex)

    def reconstruct(self):
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def hermitian_eig(A, tol=HERMITIAN_TOL):
    """Eigendecomposition of a (numerically) Hermitian matrix.

    The input is symmetrized to (A + A*)/2 before decomposition; a relative
    asymmetry above `tol` raises NotHermitian.
    """
    A = _as_square(A)
    scale = np.linalg.norm(A, 2)
    asym = np.linalg.norm(A - A.conj().T, 2)
    if asym > tol * max(scale, 1.0):
        raise NotHermitian(
            f"asymmetry {asym:.3e} exceeds {tol:.1e} * max(||A||, 1)")
    H = 0.5 * (A + A.conj().T)
    w, V = np.linalg.eigh(H)
    return HermitianEigenSystem(w, V)


def funm_hermitian(E, f):
    """Apply a scalar function through the spectral decomposition: V f(w) V*."""
    V = E.eigenvectors
    fw = np.asarray([f(x) for x in E.eigenvalues], dtype=complex)
    return (V * fw) @ V.conj().T


def spectral_radius(A):
    """max |lambda| over the eigenvalues of A."""
    A = _as_square(A)
    return float(np.max(np.abs(np.linalg.eigvals(A))))
