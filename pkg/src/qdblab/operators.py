"""Dense matrix substrate.

Every superoperator in the package acts on column-stacked matrices: entry
``M[i, j]`` of a d x d matrix lands at index ``j*d + i`` of its vector.  Under
this convention ``vec(A X B) = kron(B.T, A) @ vec(X)``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, InvalidParameterError, ShapeError

HERMITIAN_TOL = 1e-12


def as_square(M, name="matrix"):
    """Return ``M`` as a finite complex square array or raise ShapeError."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"{name} must be a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidParameterError(f"{name} has non-finite entries")
    return M


def dagger(M):
    return np.conj(np.swapaxes(M, -1, -2))


def hermiticity_residual(M):
    """Relative Frobenius distance between M and its adjoint."""
    M = np.asarray(M)
    scale = np.linalg.norm(M)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(M - dagger(M)) / scale)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Hermitian matrix with its eigendecomposition.

    Attributes:
        matrix: the d x d complex matrix.
        eigenvalues: real eigenvalues in ascending order.
        eigenvectors: unitary matrix whose columns are the eigenvectors.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, M, name="operator"):
        M = as_square(M, name)
        res = hermiticity_residual(M)
        if res > HERMITIAN_TOL:
            raise InvalidParameterError(f"{name} is not Hermitian (relative residual {res:.2e})")
        # exact symmetrization only removes rounding below the tolerance just checked
        evals, evecs = np.linalg.eigh(0.5 * (M + dagger(M)))
        M = M.copy()
        M.setflags(write=False)
        evals.setflags(write=False)
        evecs.setflags(write=False)
        return cls(M, evals, evecs)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def apply_function(self, f):
        return hermitian_function(self, f)


def as_hermitian(M, name="operator"):
    if isinstance(M, HermitianOperator):
        return M
    return HermitianOperator.from_matrix(M, name)


def hermitian_function(M, f):
    """Evaluate a real scalar function on a Hermitian matrix.

    :param M: HermitianOperator or Hermitian array
    :param f: vectorized real function of the eigenvalues
    :return: ``U diag(f(eps)) U*``
    :raises DomainError: if ``f`` is not finite at some eigenvalue
    """
    M = as_hermitian(M)
    with np.errstate(all="ignore"):
        vals = np.asarray(f(M.eigenvalues))
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise DomainError(f"function undefined at eigenvalue {float(M.eigenvalues[bad][0])!r}")
    U = M.eigenvectors
    return (U * vals) @ dagger(U)


def density_matrix(M, tol=1e-12):
    """Validate a unit-trace positive semidefinite Hermitian matrix and return it as an array."""
    M = as_square(M, "density matrix")
    if hermiticity_residual(M) > tol:
        raise InvalidParameterError("density matrix is not Hermitian")
    evals = np.linalg.eigvalsh(0.5 * (M + dagger(M)))
    if evals[0] < -tol:
        raise InvalidParameterError(f"density matrix has negative eigenvalue {evals[0]:.3e}")
    if abs(np.trace(M) - 1.0) > tol:
        raise InvalidParameterError(f"density matrix trace {np.trace(M).real:.15g} is not 1")
    return M


def schatten_norm(M, p=2):
    """Schatten p-norm from singular values; ``p=np.inf`` gives the operator norm."""
    if p < 1:
        raise InvalidParameterError(f"Schatten index p must be >= 1, got {p}")
    s = np.linalg.svd(np.asarray(M, dtype=complex), compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.sum(s**p) ** (1.0 / p))


def vec(M):
    """Column-stack a matrix into a vector."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise ShapeError(f"vec expects a matrix, got shape {M.shape}")
    return M.reshape(-1, order="F")


def unvec(v):
    """Inverse of :func:`vec` for square matrices."""
    v = np.asarray(v)
    n = v.shape[0]
    d = int(round(np.sqrt(n)))
    if v.ndim != 1 or d * d != n:
        raise ShapeError(f"vector of length {n} is not a vectorized square matrix")
    return v.reshape(d, d, order="F")


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Linear map on d x d matrices stored as a d^2 x d^2 matrix on column-stacked vectors."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = m.shape[0]
        d = int(round(np.sqrt(n)))
        if m.ndim != 2 or m.shape[1] != n or d * d != n:
            raise ShapeError(f"superoperator matrix has invalid shape {m.shape}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, X):
        X = np.asarray(X)
        if X.shape != (self.dim, self.dim):
            raise ShapeError(f"expected a {self.dim}x{self.dim} matrix, got {X.shape}")
        return unvec(self.matrix @ vec(X))

    __call__ = apply

    def expm(self, t=1.0):
        return SuperOperator(scipy.linalg.expm(t * self.matrix))

    def __add__(self, other):
        return SuperOperator(self.matrix + other.matrix)

    def __sub__(self, other):
        return SuperOperator(self.matrix - other.matrix)

    def __neg__(self):
        return SuperOperator(-self.matrix)

    def __mul__(self, c):
        return SuperOperator(c * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return SuperOperator(self.matrix @ other.matrix)

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d * d, dtype=complex))


def sandwich_superop(A, B):
    """Superoperator of ``X -> A X B``."""
    A = as_square(A, "A")
    B = as_square(B, "B")
    if A.shape != B.shape:
        raise ShapeError(f"dimension mismatch {A.shape} vs {B.shape}")
    return SuperOperator(np.kron(B.T, A))


def left_mult(A):
    return sandwich_superop(A, np.eye(np.shape(A)[0]))


def right_mult(B):
    return sandwich_superop(np.eye(np.shape(B)[0]), B)


def matrix_units(d):
    """Yield ``(a, b, E_ab)`` for all d^2 matrix units."""
    for b in range(d):
        for a in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[a, b] = 1.0
            yield a, b, E


def random_matrix(d, rng, hermitian=False):
    """Complex Gaussian matrix (Hermitian part if requested)."""
    M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    if hermitian:
        M = 0.5 * (M + dagger(M))
    return M


def random_density(d, rng, rank=None):
    """Random full-rank (or given rank) density matrix."""
    rank = d if rank is None else rank
    X = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = X @ dagger(X)
    return rho / np.trace(rho).real
