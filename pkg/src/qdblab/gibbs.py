"""Gibbs states, the weighted inner products built on them, and the identification maps."""
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, InvalidParameterError, ShapeError
from .operators import (
    HermitianOperator,
    as_hermitian,
    as_square,
    dagger,
    hermitian_function,
    vec,
)

MAX_CONDITION = 1e12
UNDERFLOW_GUARD = 1e-300


@dataclass(frozen=True, eq=False)
class GibbsState:
    """Thermal state ``exp(-H/tau)/Z``.

    Attributes:
        H: the Hamiltonian.
        tau: temperature.
        Z: partition function.
        rho: density matrix.
        log_rho: HermitianOperator of ``ln rho``.
        spectrum: eigenvalues of ``rho`` in descending order.
        basis: unitary whose column s is the eigenvector for ``spectrum[s]``.
    """

    H: HermitianOperator
    tau: float
    Z: float
    rho: np.ndarray
    log_rho: HermitianOperator
    spectrum: np.ndarray
    basis: np.ndarray

    @property
    def dim(self):
        return self.rho.shape[0]

    @property
    def condition_number(self):
        return float(self.spectrum[0] / self.spectrum[-1])

    def power(self, s):
        """``rho**s`` through the eigendecomposition."""
        U = self.basis
        return (U * self.spectrum**s) @ dagger(U)


def make_gibbs(H, tau=1.0):
    """Build the Gibbs state of ``H`` at temperature ``tau``.

    :raises InvalidParameterError: tau <= 0
    :raises ConditioningError: an eigenvalue of rho underflows
    """
    if not tau > 0:
        raise InvalidParameterError(f"temperature tau must be positive, got {tau}")
    H = as_hermitian(H, "H")
    eps = H.eigenvalues
    # shift by the ground energy so the largest weight is exactly 1
    weights = np.exp(-(eps - eps[0]) / tau)
    total = weights.sum()
    spectrum = weights / total
    if spectrum[-1] <= UNDERFLOW_GUARD or not np.all(spectrum > 0):
        raise ConditioningError(
            "Gibbs state has a numerically vanishing eigenvalue; "
            "use a larger tau or a Hamiltonian with smaller spectral spread"
        )
    with np.errstate(over="ignore"):
        Z = float(total * np.exp(-eps[0] / tau))
    U = H.eigenvectors
    rho = (U * spectrum) @ dagger(U)
    log_rho = HermitianOperator.from_matrix((U * np.log(spectrum)) @ dagger(U), "log rho")
    rho.setflags(write=False)
    spectrum.setflags(write=False)
    return GibbsState(H=H, tau=float(tau), Z=Z, rho=rho, log_rho=log_rho, spectrum=spectrum, basis=U)


def reference_state(rho, tau=1.0):
    """Wrap a strictly positive density matrix as a GibbsState.

    The Hamiltonian is taken as ``-tau ln rho`` with zero chemical-potential
    shift, so ``Z = 1``.  Any other shift gives the same state.
    """
    rho = as_square(rho, "rho")
    R = as_hermitian(rho, "rho")
    if R.eigenvalues[0] <= 0:
        raise InvalidParameterError("reference state must be strictly positive")
    if abs(np.trace(rho).real - 1.0) > 1e-12:
        raise InvalidParameterError("reference state must have unit trace")
    H = HermitianOperator.from_matrix(-tau * hermitian_function(R, np.log), "H")
    g = make_gibbs(H, tau)
    # keep the caller's matrix rather than the exp(log(.)) round trip
    return GibbsState(H=g.H, tau=g.tau, Z=g.Z, rho=rho, log_rho=g.log_rho, spectrum=g.spectrum, basis=g.basis)


def as_gibbs(g):
    if isinstance(g, GibbsState):
        return g
    return reference_state(g)


def _check_condition(g):
    if g.condition_number > MAX_CONDITION:
        raise ConditioningError(
            f"rho has condition number {g.condition_number:.3e} > {MAX_CONDITION:.0e}"
        )


@dataclass(frozen=True, eq=False)
class WeightedMetric:
    """Gram matrix of a weighted inner product on vectorized matrices.

    State side with parameter r: ``Tr(X* rho^-r Y rho^(r-1))``.
    Observable side with parameter r: ``Tr(X* rho^r Y rho^(1-r))``.
    """

    side: str
    r: float
    gram: np.ndarray
    gibbs: GibbsState

    @property
    def dim(self):
        return self.gibbs.dim

    def inner(self, X, Y):
        return inner(self, X, Y)

    def norm(self, X):
        return float(np.sqrt(max(inner(self, X, X).real, 0.0)))


def weighted_metric(gibbs, side="observable", r=0.0):
    """Build the Gram matrix for one member of the weighted family.

    :param gibbs: GibbsState or strictly positive density matrix
    :param side: ``"state"`` or ``"observable"``
    :param r: interpolation parameter in [0, 1]
    """
    g = as_gibbs(gibbs)
    if not 0.0 <= r <= 1.0:
        raise InvalidParameterError(f"r must lie in [0, 1], got {r}")
    if side == "state":
        _check_condition(g)
        left, right = g.power(-r), g.power(r - 1.0)
    elif side == "observable":
        left, right = g.power(r), g.power(1.0 - r)
    else:
        raise InvalidParameterError(f"side must be 'state' or 'observable', got {side!r}")
    gram = np.kron(right.T, left)
    gram = 0.5 * (gram + dagger(gram))
    gram.setflags(write=False)
    return WeightedMetric(side=side, r=float(r), gram=gram, gibbs=g)


def state_metric(gibbs):
    """``Tr(l* m rho^-1)``."""
    return weighted_metric(gibbs, "state", 0.0)


def state_metric_transposed(gibbs):
    """``Tr(l* rho^-1 m)``."""
    return weighted_metric(gibbs, "state", 1.0)


def observable_metric(gibbs):
    """``Tr(A* B rho)``."""
    return weighted_metric(gibbs, "observable", 0.0)


def observable_metric_tau1(gibbs):
    """``Tr(A* rho B)``."""
    return weighted_metric(gibbs, "observable", 1.0)


def inner(metric, X, Y):
    d = metric.dim
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape != (d, d) or Y.shape != (d, d):
        raise ShapeError(f"expected {d}x{d} matrices, got {X.shape} and {Y.shape}")
    return complex(np.vdot(vec(X), metric.gram @ vec(Y)))


def phi_map(gibbs, A, r=0.0):
    """``rho^(r/2) A rho^(1-r/2)``: isometry from the observable r=0 space onto the state space r."""
    g = as_gibbs(gibbs)
    if not 0.0 <= r <= 1.0:
        raise InvalidParameterError(f"r must lie in [0, 1], got {r}")
    return g.power(r / 2) @ np.asarray(A) @ g.power(1.0 - r / 2)


def phi_inverse(gibbs, lam, r=0.0):
    g = as_gibbs(gibbs)
    if not 0.0 <= r <= 1.0:
        raise InvalidParameterError(f"r must lie in [0, 1], got {r}")
    _check_condition(g)
    return g.power(-r / 2) @ np.asarray(lam) @ g.power(r / 2 - 1.0)


def coupling(A, lam):
    """Bilinear pairing ``Tr(A lam)`` between observables and states."""
    A = np.asarray(A)
    lam = np.asarray(lam)
    if A.shape != lam.shape or A.ndim != 2:
        raise ShapeError(f"coupling needs matching square matrices, got {A.shape} and {lam.shape}")
    return complex(np.einsum("ij,ji->", A, lam))
