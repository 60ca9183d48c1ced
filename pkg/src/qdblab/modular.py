"""Modular structure of a faithful state on Hilbert-Schmidt space.

Matrices are vectors of the Hilbert-Schmidt space through column stacking.
The cyclic vector is ``rho^(1/2)``, the modular generator is the commutator with
``-ln rho`` and the conjugation ``J`` maps ``vec(k)`` to ``vec(k*)``.  ``J`` is
antilinear, so it is always applied as an explicit complex conjugation followed
by an index permutation.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConditioningError, InternalError, QdbViolationError
from .gibbs import MAX_CONDITION, as_gibbs
from .operators import SuperOperator, dagger, random_matrix, vec


def transpose_permutation(d):
    """Index map with ``vec(X.T) = vec(X)[perm]``."""
    idx = np.arange(d * d).reshape(d, d)  # idx[j, i] = j*d + i is the slot of X[i, j]
    return idx.T.reshape(-1)


@dataclass(frozen=True, eq=False)
class ModularData:
    """Cyclic vector, modular generator and conjugation for a Gibbs state.

    Attributes:
        omega: ``rho^(1/2)``.
        L_tau: ``kron(I, H_tau) - kron(H_tau.T, I)`` with ``H_tau = -ln rho``.
        perm: permutation used by :meth:`J`.
        residuals: construction checks (Hermiticity, kernel, involution, covariance).
    """

    gibbs: object
    omega: np.ndarray
    L_tau: SuperOperator
    perm: np.ndarray
    residuals: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.omega.shape[0]

    def J(self, v):
        """Antilinear conjugation on a vectorized matrix."""
        return np.conj(np.asarray(v))[self.perm]

    def modular_exp(self, s):
        """``exp(s L_tau)`` for complex ``s``.

        Uses ``exp(s L_tau) vec(A) = vec(rho^-s A rho^s)`` with powers of the
        d x d spectrum, which is more accurate than diagonalizing ``L_tau``.
        """
        g = self.gibbs
        U = g.basis
        p = g.spectrum.astype(complex)
        left = (U * p ** (-s)) @ dagger(U)
        right = (U * p**s) @ dagger(U)
        return np.kron(right.T, left)


def build_modular(gibbs, rng=None, n_random=20, times=(0.5, 1.0)):
    """Assemble and self-check the modular data of a Gibbs state."""
    g = as_gibbs(gibbs)
    if g.condition_number > MAX_CONDITION:
        raise ConditioningError(f"rho has condition number {g.condition_number:.3e}")
    d = g.dim
    I = np.eye(d)
    Ht = -g.log_rho.matrix
    L = np.kron(I, Ht) - np.kron(Ht.T, I)
    omega = g.power(0.5)
    perm = transpose_permutation(d)
    mod = ModularData(gibbs=g, omega=omega, L_tau=SuperOperator(L), perm=perm)
    rng = np.random.default_rng(0) if rng is None else rng
    res = mod.residuals
    res["hermitian"] = float(np.linalg.norm(L - dagger(L), 2))
    res["kernel"] = float(np.linalg.norm(L @ vec(omega)))
    w = vec(random_matrix(d, rng))
    res["involution"] = float(np.linalg.norm(mod.J(mod.J(w)) - w))
    res["fixes_omega"] = float(np.linalg.norm(mod.J(vec(omega)) - vec(omega)))
    cov = 0.0
    for t in times:
        U = scipy.linalg.expm(1j * t * Ht)
        E = mod.modular_exp(1j * t)
        for _ in range(n_random):
            A = random_matrix(d, rng)
            cov = max(cov, float(np.linalg.norm(vec(U @ A @ dagger(U)) - E @ vec(A))))
    res["covariance"] = cov
    if max(res.values()) > 1e-8 * max(1.0, float(np.abs(L).max(initial=0.0))):
        raise InternalError(f"modular data failed its construction checks: {res}")
    return mod


def check_S_operator(mod, A):
    """``|| J exp(-L_tau/2) vec(A Omega) - vec(A* Omega) ||``."""
    A = np.asarray(A, dtype=complex)
    lhs = mod.J(mod.modular_exp(-0.5) @ vec(A @ mod.omega))
    return float(np.linalg.norm(lhs - vec(dagger(A) @ mod.omega)))


def induced_generator(mod, gens):
    """Matrix of ``vec(A Omega) -> vec(Gp(A) Omega)``."""
    d = mod.dim
    I = np.eye(d)
    R = np.kron(mod.omega.T, I)
    Rinv = np.kron(np.linalg.inv(mod.omega).T, I)
    return R @ gens.Gp.matrix @ Rinv


@dataclass(frozen=True)
class ModularCommutation:
    modular_group: float
    self_adjoint: float
    s_operator: float

    def passed(self, tol=1e-9):
        return max(self.modular_group, self.self_adjoint, self.s_operator) <= tol


def check_modular_commutation(mod, gens, gibbs=None, strict=False):
    """Residuals of three commutation properties of the induced dissipator.

    (i) ``[Ghat, exp(-L_tau)]``; (ii) ``Ghat - Ghat^H``; (iii) commutation with
    the antilinear ``S = J exp(-L_tau/2)``.  For (iii) write ``S v = P conj(E v)``;
    then ``S Ghat v = Ghat S v`` for all ``v`` iff
    ``P conj(E Ghat) = Ghat P conj(E)``.
    """
    Gh = induced_generator(mod, gens)
    E1 = mod.modular_exp(-1.0)
    r1 = float(np.linalg.norm(Gh @ E1 - E1 @ Gh, 2))
    r2 = float(np.linalg.norm(Gh - dagger(Gh), 2))
    E = mod.modular_exp(-0.5)
    lhs = np.conj(E @ Gh)[mod.perm]
    rhs = Gh @ np.conj(E)[mod.perm]
    r3 = float(np.linalg.norm(lhs - rhs, 2))
    if strict and r2 > 1e-6:
        raise QdbViolationError(f"induced dissipator is not self-adjoint (residual {r2:.3e})")
    return ModularCommutation(modular_group=r1, self_adjoint=r2, s_operator=r3)
