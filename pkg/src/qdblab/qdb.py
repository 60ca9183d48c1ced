"""Synthesis of jump operators obeying detailed balance, and its verification.

Families are built in the eigenbasis ``psi_s`` of the Gibbs state.  For every
ordered pair ``(r, r')`` the jump ``W_j`` carries the transition
``psi_r -> psi_r'`` with amplitude ``sqrt(K[r, r']) * A[j, r, r']``.  The rate
matrix ``K`` satisfies ``K[r, r'] rho_r = K[r', r] rho_r'`` and the amplitude
tensor makes different Bohr frequencies orthogonal across ``j``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConditionAViolationError,
    InsufficientJumpsError,
    InternalError,
    InvalidParameterError,
)
from .gibbs import GibbsState, as_gibbs, inner, make_gibbs, observable_metric
from .dynamics import choi_matrix
from .lindblad import JumpOperatorSet, build_generators, dissipator_superops
from .operators import (
    HermitianOperator,
    SuperOperator,
    as_square,
    dagger,
    random_matrix,
    unvec,
    vec,
)

FREQ_RTOL = 1e-9
KRAUS_CUT = 1e-12


@dataclass(frozen=True, eq=False)
class SpectrumSpec:
    """Strictly positive Gibbs eigenvalues summing to one."""

    rho_s: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.rho_s, dtype=float).copy()
        if p.ndim != 1 or p.size < 1:
            raise InvalidParameterError("spectrum must be a non-empty vector")
        if not np.all(p > 0):
            raise InvalidParameterError("spectrum entries must be strictly positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InvalidParameterError(f"spectrum sums to {p.sum():.15g}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "rho_s", p)

    @classmethod
    def from_weights(cls, w):
        w = np.asarray(w, dtype=float)
        return cls(w / w.sum())

    @classmethod
    def from_energies(cls, energies, tau=1.0):
        e = np.asarray(energies, dtype=float)
        w = np.exp(-(e - e.min()) / tau)
        return cls(w / w.sum())

    @property
    def dim(self):
        return self.rho_s.size

    @property
    def condition_A(self):
        return check_condition_A(self)[0]


def _close(x, y, rtol=FREQ_RTOL):
    return abs(x - y) <= rtol * max(abs(x), abs(y))


def check_condition_A(spec):
    """Check that eigenvalue ratios of distinct index pairs never collide.

    A pair ``(r, r')`` with ``r != r'`` collides with ``(s, s')`` when the two
    ratios agree to relative tolerance 1e-9.  A ratio equal to one (a
    degenerate eigenvalue) collides with every diagonal pair.

    :return: ``(ok, violations)`` with violations as ``(r, r', s, s')`` tuples
    """
    p = spec.rho_s
    d = p.size
    pairs = [(r, rp) for r in range(d) for rp in range(d) if r != rp]
    violations = []
    for r, rp in pairs:
        if _close(p[r] / p[rp], 1.0):
            violations.append((r, rp, r, r))
    for i, (r, rp) in enumerate(pairs):
        for s, sp in pairs[i + 1:]:
            if _close(p[r] / p[rp], p[s] / p[sp]):
                violations.append((r, rp, s, sp))
    return not violations, violations


@dataclass(frozen=True, eq=False)
class BohrTable:
    """Log-ratio frequencies ``omega[r, r'] = log(rho_r / rho_r')`` and integer labels."""

    omega: np.ndarray
    labels: np.ndarray
    n_positive: int


def build_bohr_table(spec):
    """Label distinct positive frequencies 1, 2, ... in ascending order; negatives get the opposite sign."""
    lp = np.log(spec.rho_s)
    omega = lp[:, None] - lp[None, :]
    d = spec.dim
    pos = sorted(omega[r, rp] for r in range(d) for rp in range(d) if omega[r, rp] > 0)
    distinct = []
    for w in pos:
        if not distinct or not _close(w, distinct[-1]):
            distinct.append(w)
    labels = np.zeros((d, d), dtype=int)
    for r in range(d):
        for rp in range(d):
            w = omega[r, rp]
            if w == 0 or _close(abs(w), 0.0):
                continue
            k = 1 + int(np.argmin([abs(abs(w) - x) for x in distinct]))
            labels[r, rp] = k if w > 0 else -k
    return BohrTable(omega=omega, labels=labels, n_positive=len(distinct))


def minimum_jump_count(bohr):
    return 2 * bohr.n_positive + 1


def frequency_vector(k, m):
    """Orthonormal vectors in C^m with ``conj(f_k) = f_{-k}``."""
    f = np.zeros(m, dtype=complex)
    if k == 0:
        f[0] = 1.0
    else:
        a = abs(k)
        f[2 * a - 1] = 1.0 / np.sqrt(2.0)
        f[2 * a] = (1j if k > 0 else -1j) / np.sqrt(2.0)
    return f


def build_A_tensors(bohr, m=None):
    """Amplitude tensor of shape ``(m, d, d)`` with ``A[j, r, r'] = f_{q(r, r')}[j]``."""
    need = minimum_jump_count(bohr)
    m = need if m is None else int(m)
    if m < need:
        raise InsufficientJumpsError(m, need)
    d = bohr.labels.shape[0]
    A = np.zeros((m, d, d), dtype=complex)
    for r in range(d):
        for rp in range(d):
            A[:, r, rp] = frequency_vector(int(bohr.labels[r, rp]), m)
    return A


def build_K(spec, upper):
    """Complete a rate matrix from its upper triangle so that ``K[r,r'] rho_r = K[r',r] rho_r'``.

    :param upper: d x d array (only entries with ``r' >= r`` are read) or the
        flat list of those entries in row-major order
    """
    d = spec.dim
    iu = np.triu_indices(d)
    u = np.asarray(upper, dtype=float)
    if u.ndim == 1:
        if u.size != iu[0].size:
            raise InvalidParameterError(
                f"upper triangle needs {iu[0].size} entries for d={d}, got {u.size}"
            )
        vals = u
    elif u.shape == (d, d):
        vals = u[iu]
    else:
        raise InvalidParameterError(f"upper must be a {d}x{d} matrix or flat list, got shape {u.shape}")
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise InvalidParameterError("upper-triangle rates must be finite and nonnegative")
    p = spec.rho_s
    K = np.zeros((d, d))
    K[iu] = vals
    for r in range(d):
        for rp in range(r):
            K[r, rp] = K[rp, r] * p[rp] / p[r]
    return K


@dataclass(frozen=True, eq=False)
class QdbJumpFamily:
    """Synthesized jump family with its ingredients."""

    K: np.ndarray
    A_tensors: np.ndarray
    jumps: JumpOperatorSet
    spec: SpectrumSpec
    basis: np.ndarray
    bohr: BohrTable


def synthesize(spec, upper, m=None, basis=None):
    """Build jump operators satisfying detailed balance for the spectrum ``spec``.

    :param spec: Gibbs eigenvalues, in the order of the columns of ``basis``
    :param upper: upper triangle of the rate matrix (see :func:`build_K`)
    :param m: number of jumps; defaults to the minimum for the frequency count
    :param basis: unitary whose columns are the Gibbs eigenvectors (identity by default)
    :raises ConditionAViolationError: if eigenvalue ratios collide
    """
    ok, violations = check_condition_A(spec)
    if not ok:
        raise ConditionAViolationError(violations)
    d = spec.dim
    U = np.eye(d, dtype=complex) if basis is None else as_square(basis, "basis")
    bohr = build_bohr_table(spec)
    A = build_A_tensors(bohr, m)
    K = build_K(spec, upper)
    coeff = np.sqrt(K)[None, :, :] * A
    # W_j has matrix element (r', r) equal to coeff[j, r, r'] in the eigenbasis
    local = np.swapaxes(coeff, 1, 2)
    jumps = [U @ Wj @ dagger(U) for Wj in local]
    return QdbJumpFamily(
        K=K, A_tensors=A, jumps=JumpOperatorSet.from_list(jumps, d), spec=spec, basis=U, bohr=bohr
    )


def hamiltonian_for_spectrum(spec, tau=1.0, basis=None):
    """Hamiltonian whose Gibbs state at ``tau`` has eigenvalues ``spec`` in ``basis``."""
    eps = -tau * np.log(spec.rho_s)
    eps = eps - eps.min()
    U = np.eye(spec.dim) if basis is None else np.asarray(basis)
    return HermitianOperator.from_matrix((U * eps) @ dagger(U), "H")


@dataclass(frozen=True, eq=False)
class QdbModel:
    """A Hamiltonian, its Gibbs state, a synthesized family and the generators."""

    H: HermitianOperator
    gibbs: GibbsState
    family: QdbJumpFamily
    gens: object


def build_qdb_model(spec, upper, tau=1.0, m=None, basis=None):
    """Convenience wrapper: Hamiltonian, Gibbs state, synthesized jumps and generators."""
    H = hamiltonian_for_spectrum(spec, tau, basis)
    g = make_gibbs(H, tau)
    fam = synthesize(spec, upper, m=m, basis=basis)
    gens = build_generators(H, fam.jumps)
    return QdbModel(H=H, gibbs=g, family=fam, gens=gens)


def random_condition_A_spectrum(d, rng, spread=2.0, tau=1.0, max_tries=100):
    """Random nondegenerate spectrum satisfying the ratio condition."""
    for _ in range(max_tries):
        spec = SpectrumSpec.from_energies(np.sort(rng.uniform(0.0, spread, d)), tau)
        if spec.condition_A:
            return spec
    raise InternalError("could not draw a spectrum satisfying the ratio condition")


def random_upper(d, rng, low=0.2, high=1.5):
    return rng.uniform(low, high, (d * (d + 1)) // 2)


def random_unitary(d, rng):
    Q, R = np.linalg.qr(random_matrix(d, rng))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


@dataclass(frozen=True)
class QdbReport:
    residual: float
    symmetry_residual: float
    scale: float
    tolerance: float

    @property
    def passed(self):
        return self.residual <= self.tolerance


def verify_qdb(gibbs_rho, gens, rng=None, n_random=10, rtol=1e-9):
    """Check ``G(A rho) = (Gp A) rho`` on all matrix units.

    Also reports the symmetry defect of ``Gp`` in ``Tr(A* B rho)`` over random
    unit-norm pairs.  PASS iff the residual is at most ``rtol * scale`` with
    ``scale = max(1, ||G||_2)``.
    """
    g = as_gibbs(gibbs_rho)
    rho = g.rho
    d = rho.shape[0]
    G = gens.G.matrix
    Gp = gens.Gp.matrix
    R = np.kron(rho.T, np.eye(d))  # right multiplication by rho
    diff = G @ R - R @ Gp
    # column (a, b) of diff is vec(G(E_ab rho) - (Gp E_ab) rho)
    residual = float(np.max(np.linalg.norm(diff, axis=0))) if d else 0.0
    rng = np.random.default_rng(0) if rng is None else rng
    metric = observable_metric(g)
    sym = 0.0
    for _ in range(n_random):
        A = random_matrix(d, rng)
        B = random_matrix(d, rng)
        A /= np.linalg.norm(A)
        B /= np.linalg.norm(B)
        lhs = inner(metric, A, unvec(Gp @ vec(B)))
        rhs = inner(metric, unvec(Gp @ vec(A)), B)
        sym = max(sym, abs(lhs - rhs))
    scale = max(1.0, float(np.linalg.norm(G, 2)))
    return QdbReport(residual=residual, symmetry_residual=float(sym), scale=scale, tolerance=rtol * scale)


def _eigenbasis_superop(S, U):
    """Superoperator ``S`` expressed in the basis where ``X = U X_e U*``."""
    V = np.kron(U.conj(), U)
    return dagger(V) @ S @ V


@dataclass(frozen=True, eq=False)
class CoefficientTables:
    """Four-index tables in the Gibbs eigenbasis, indexed ``[r, r', s, s']``."""

    K4: np.ndarray
    C4: np.ndarray
    K2: np.ndarray
    crr_residual: float
    balance_residual: float
    off_pattern_residual: float

    def balance_ok(self, tol=1e-9):
        return self.balance_residual <= tol


def _four_index(S_e, d):
    # T[r, r', s, s'] = S(E_{r's'})[r, s]; row index s*d + r, column s'*d + r'
    T = S_e.reshape(d, d, d, d)  # [s, r, s', r']
    return np.transpose(T, (1, 3, 0, 2))


def coefficient_tables(gens, gibbs):
    """Tables ``K[r,r',s,s'] = Tr(P_sr Phip(P_r's'))`` and the same with ``Gp``."""
    g = as_gibbs(gibbs)
    d = g.dim
    U = g.basis
    _, Gp, _, Phip = dissipator_superops(gens.jumps)
    K4 = _four_index(_eigenbasis_superop(Phip.matrix, U), d)
    C4 = _four_index(_eigenbasis_superop(Gp.matrix, U), d)
    idx = np.arange(d)
    K2 = K4[idx[:, None], idx[None, :], idx[:, None], idx[None, :]].real
    expected = K4.copy()
    rowsum = K2.sum(axis=1)
    for r in range(d):
        for s in range(d):
            expected[r, r, s, s] -= 0.5 * (rowsum[r] + rowsum[s])
    crr = float(np.max(np.abs(C4 - expected)))
    p = g.spectrum
    lhs = C4 * p[None, None, :, None]
    # C[s', s, r', r] * rho_s' rearranged to index [r, r', s, s']
    rhs = np.transpose(C4, (3, 2, 1, 0)) * p[None, None, None, :]
    balance = float(np.max(np.abs(lhs - rhs)))
    mask = np.ones((d, d, d, d), dtype=bool)
    for r in range(d):
        for rp in range(d):
            mask[r, rp, r, rp] = False
    for r in range(d):
        for s in range(d):
            mask[r, r, s, s] = False
    off = float(np.max(np.abs(K4[mask]), initial=0.0))
    return CoefficientTables(K4=K4, C4=C4, K2=K2, crr_residual=crr, balance_residual=balance,
                             off_pattern_residual=off)


@dataclass(frozen=True, eq=False)
class ModularAverage:
    """Frequency-projected completely positive part and a Kraus family realizing it."""

    phip: SuperOperator
    jumps: JumpOperatorSet
    choi_min_eigenvalue: float
    commutator_residual: float
    kraus_residual: float


def modular_average(gens, gibbs, rtol=FREQ_RTOL):
    """Keep only the components of ``Phip`` that connect equal Bohr frequencies.

    In the Gibbs eigenbasis the coefficient mapping ``P_cd`` to ``P_ab`` is kept
    iff ``log(rho_a/rho_b) = log(rho_c/rho_d)``.  Jump operators are recovered
    from the eigendecomposition of the Choi matrix.
    """
    g = as_gibbs(gibbs)
    d = g.dim
    U = g.basis
    _, _, _, Phip = dissipator_superops(gens.jumps)
    S_e = _eigenbasis_superop(Phip.matrix, U)
    lp = np.log(g.spectrum)
    w = vec(lp[:, None] - lp[None, :])  # frequency of each vectorized matrix unit
    diff = np.abs(w[:, None] - w[None, :])
    scale = np.maximum(np.abs(w[:, None]), np.abs(w[None, :]))
    keep = diff <= np.maximum(rtol * scale, 1e-14)
    V = np.kron(U.conj(), U)
    avg = V @ (S_e * keep) @ dagger(V)
    C = choi_matrix(avg).matrix
    evals, evecs = np.linalg.eigh(C)
    tr = float(np.trace(C).real)
    if evals[0] < -1e-8 * max(tr, 1.0):
        raise InternalError(f"averaged map is not completely positive (min eig {evals[0]:.3e})")
    # Choi eigenvector v gives K = unvec(v) with Phip(A) = sum K A K*, so W = K*
    new = [dagger(np.sqrt(lam) * unvec(v)) for lam, v in zip(evals, evecs.T) if lam > KRAUS_CUT * tr]
    fam = JumpOperatorSet.from_list(new, d)
    rebuilt = sum((np.kron(W.T, W.conj().T) for W in fam), np.zeros_like(avg))
    kraus_res = float(np.max(np.abs(rebuilt - avg), initial=0.0))
    Yt = fam.Y.matrix
    comm = float(np.linalg.norm(Yt @ g.rho - g.rho @ Yt))
    return ModularAverage(phip=SuperOperator(avg), jumps=fam, choi_min_eigenvalue=float(evals[0]),
                          commutator_residual=comm, kraus_residual=kraus_res)

