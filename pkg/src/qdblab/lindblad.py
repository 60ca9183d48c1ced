"""Lindblad generators on states and observables as dense superoperators."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, QdbViolationError, ShapeError
from .gibbs import as_gibbs, inner, observable_metric
from .operators import HermitianOperator, SuperOperator, as_hermitian, as_square, dagger


@dataclass(frozen=True, eq=False)
class JumpOperatorSet:
    """Ordered jump operators and ``Y = sum_j W_j* W_j``."""

    jumps: tuple
    Y: HermitianOperator

    @classmethod
    def from_list(cls, jumps, dim=None):
        mats = []
        for k, W in enumerate(jumps):
            W = as_square(W, f"jump {k}").copy()
            W.setflags(write=False)
            mats.append(W)
        if mats:
            d = mats[0].shape[0]
            if any(W.shape != (d, d) for W in mats):
                raise ShapeError("jump operators have different dimensions")
            if dim is not None and dim != d:
                raise ShapeError(f"jump operators are {d}x{d}, expected {dim}x{dim}")
        elif dim is None:
            raise InvalidParameterError("an empty jump set needs an explicit dimension")
        else:
            d = dim
        Y = np.zeros((d, d), dtype=complex)
        for W in mats:
            Y += dagger(W) @ W
        Y = 0.5 * (Y + dagger(Y))
        return cls(tuple(mats), HermitianOperator.from_matrix(Y, "Y"))

    @property
    def dim(self):
        return self.Y.dim

    def __len__(self):
        return len(self.jumps)

    def __iter__(self):
        return iter(self.jumps)


def as_jumps(jumps, dim=None):
    if isinstance(jumps, JumpOperatorSet):
        return jumps
    return JumpOperatorSet.from_list(list(jumps), dim)


@dataclass(frozen=True, eq=False)
class GeneratorPair:
    """State-side generator ``L = L0 + G`` and observable-side ``Lp = L0p + Gp``."""

    L: SuperOperator
    L0: SuperOperator
    G: SuperOperator
    Lp: SuperOperator
    L0p: SuperOperator
    Gp: SuperOperator
    H: HermitianOperator
    jumps: JumpOperatorSet

    @property
    def dim(self):
        return self.H.dim

    def replace_dissipator(self, G, Gp):
        """Copy with the dissipative parts replaced (used for mutation tests)."""
        return GeneratorPair(
            L=self.L0 + G, L0=self.L0, G=G, Lp=self.L0p + Gp, L0p=self.L0p, Gp=Gp,
            H=self.H, jumps=self.jumps,
        )


def hamiltonian_superops(H):
    H = as_hermitian(H, "H").matrix
    d = H.shape[0]
    I = np.eye(d)
    comm = np.kron(I, H) - np.kron(H.T, I)
    return SuperOperator(-1j * comm), SuperOperator(1j * comm)


def dissipator_superops(jumps):
    """Return ``(G, Gp, Phi, Phip)`` superoperators for a jump set."""
    jumps = as_jumps(jumps)
    d = jumps.dim
    I = np.eye(d)
    Y = jumps.Y.matrix
    phi = np.zeros((d * d, d * d), dtype=complex)
    phip = np.zeros((d * d, d * d), dtype=complex)
    for W in jumps:
        phi += np.kron(W.conj(), W)
        phip += np.kron(W.T, W.conj().T)
    anti = 0.5 * (np.kron(I, Y) + np.kron(Y.T, I))
    return (
        SuperOperator(phi - anti),
        SuperOperator(phip - anti),
        SuperOperator(phi),
        SuperOperator(phip),
    )


def build_generators(H, jumps):
    """Assemble every generator for Hamiltonian ``H`` and jump operators ``jumps``."""
    H = as_hermitian(H, "H")
    jumps = as_jumps(jumps, H.dim)
    if jumps.dim != H.dim:
        raise ShapeError(f"H is {H.dim}x{H.dim} but jumps are {jumps.dim}x{jumps.dim}")
    L0, L0p = hamiltonian_superops(H)
    G, Gp, _, _ = dissipator_superops(jumps)
    return GeneratorPair(L=L0 + G, L0=L0, G=G, Lp=L0p + Gp, L0p=L0p, Gp=Gp, H=H, jumps=jumps)


def phi_apply(jumps, X, side="observable"):
    """Completely positive part: ``sum W X W*`` (state) or ``sum W* X W`` (observable)."""
    jumps = as_jumps(jumps)
    X = np.asarray(X, dtype=complex)
    if X.shape != (jumps.dim, jumps.dim):
        raise ShapeError(f"expected a {jumps.dim}x{jumps.dim} matrix, got {X.shape}")
    out = np.zeros_like(X)
    if side == "state":
        for W in jumps:
            out += W @ X @ dagger(W)
    elif side == "observable":
        for W in jumps:
            out += dagger(W) @ X @ W
    else:
        raise InvalidParameterError(f"side must be 'state' or 'observable', got {side!r}")
    return out


def apply_Gp(jumps, A):
    """Observable-side dissipator applied directly, without superoperators."""
    jumps = as_jumps(jumps)
    Y = jumps.Y.matrix
    return phi_apply(jumps, A, "observable") - 0.5 * (Y @ A + A @ Y)


def dissipation(jumps, A, B):
    """``Gp(A* B) - Gp(A)* B - A* Gp(B)``."""
    jumps = as_jumps(jumps)
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    Ad = dagger(A)
    return apply_Gp(jumps, Ad @ B) - dagger(apply_Gp(jumps, A)) @ B - Ad @ apply_Gp(jumps, B)


def dissipation_commutators(jumps, A, B):
    """``sum_j [W_j, A]* [W_j, B]``."""
    jumps = as_jumps(jumps)
    out = np.zeros((jumps.dim, jumps.dim), dtype=complex)
    for W in jumps:
        out += dagger(W @ A - A @ W) @ (W @ B - B @ W)
    return out


def gram_form_G(gibbs, jumps, A, B, check=True):
    """``<A, Gp B>`` in ``Tr(A* B rho)`` via the commutator sum.

    The commutator form is only valid under detailed balance.  With ``check`` the
    value is compared with the direct evaluation and QdbViolationError is raised
    when they differ by more than 1e-6.
    """
    g = as_gibbs(gibbs)
    jumps = as_jumps(jumps)
    val = -0.5 * np.trace(dissipation_commutators(jumps, A, B) @ g.rho)
    if check:
        direct = inner(observable_metric(g), A, apply_Gp(jumps, B))
        if abs(val - direct) > 1e-6:
            raise QdbViolationError(
                f"commutator form {val:.6g} differs from direct value {direct:.6g}"
            )
    return complex(val)
