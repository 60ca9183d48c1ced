"""Weighted adjoints, kernels, commutants, spectral gaps and the convergence checks."""
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConditioningError, RankAmbiguityWarning, StructureViolationError
from .gibbs import (
    as_gibbs,
    observable_metric,
    observable_metric_tau1,
    state_metric,
    state_metric_transposed,
)
from .lindblad import as_jumps
from .operators import SuperOperator, dagger, random_density, random_matrix, unvec, vec

RANK_RTOL = 1e-10
AMBIGUITY_BAND = (1e-11, 1e-9)
MAX_CONDITION = 1e12


def _mat(S):
    return S.matrix if isinstance(S, SuperOperator) else np.asarray(S)


def _gram(metric):
    return metric.gram if hasattr(metric, "gram") else np.asarray(metric)


def _sqrt_pair(M):
    """``M^(1/2)`` and ``M^(-1/2)`` for a Hermitian positive definite Gram matrix."""
    evals, U = np.linalg.eigh(M)
    if evals[0] <= 0 or evals[-1] / evals[0] > MAX_CONDITION:
        raise ConditioningError(f"Gram matrix condition number {evals[-1] / evals[0]:.3e} too large")
    r = np.sqrt(evals)
    return (U * r) @ dagger(U), (U / r) @ dagger(U)


def weighted_adjoint(S, metric):
    """Adjoint ``M^-1 S^H M`` with respect to the Gram matrix ``M``."""
    M = _gram(metric)
    evals = np.linalg.eigvalsh(M)
    if evals[0] <= 0 or evals[-1] / evals[0] > MAX_CONDITION:
        raise ConditioningError("Gram matrix is not positive definite or is ill-conditioned")
    out = np.linalg.solve(M, dagger(_mat(S)) @ M)
    return SuperOperator(out)


def metric_symmetrize(S, metric):
    """``M^(1/2) S M^(-1/2)``: Hermitian iff ``S`` is self-adjoint in the metric."""
    h, hi = _sqrt_pair(_gram(metric))
    return h @ _mat(S) @ hi


def kernel_basis(A, rtol=RANK_RTOL, name="operator"):
    """Orthonormal kernel basis (columns) by SVD at threshold ``rtol * s_max``."""
    A = np.asarray(A)
    n = A.shape[1]
    if A.size == 0:
        return np.eye(n, dtype=complex)
    _, s, Vh = np.linalg.svd(A)
    s_full = np.zeros(n)
    s_full[: s.size] = s
    s_max = s_full.max(initial=0.0)
    if s_max == 0:
        return np.eye(n, dtype=complex)
    rel = s_full / s_max
    lo, hi = AMBIGUITY_BAND
    if np.any((rel >= lo) & (rel <= hi)):
        warnings.warn(f"rank of {name} is ambiguous: singular value in [{lo:g}, {hi:g}] * s_max",
                      RankAmbiguityWarning, stacklevel=2)
    return Vh[rel <= rtol].conj().T


def orth_projector(B):
    return B @ dagger(B)


def metric_projector(basis, metric):
    """Projector onto ``span(basis)`` that is orthogonal in the metric."""
    M = _gram(metric)
    n = M.shape[0]
    if basis.shape[1] == 0:
        return np.zeros((n, n), dtype=complex)
    gb = dagger(basis) @ M @ basis
    return basis @ np.linalg.solve(gb, dagger(basis) @ M)


@dataclass(frozen=True, eq=False)
class SpectralReport:
    """Spectrum of the metric-symmetrized observable-side dissipator."""

    eigenvalues: np.ndarray
    gap_theta: float
    null_dim: int
    null_basis: np.ndarray
    self_adjointness_residual: float
    negativity_slack: float


def spectral_report(gens, gibbs):
    """Eigen-analysis of ``Gp`` in ``Tr(A* B rho)``.

    The gap is the smallest modulus among nonzero eigenvalues; it is NaN when
    every eigenvalue is zero.
    """
    metric = observable_metric(as_gibbs(gibbs))
    h, hi = _sqrt_pair(metric.gram)
    Gs = h @ gens.Gp.matrix @ hi
    sa = float(np.linalg.norm(Gs - dagger(Gs), 2))
    evals, vecs = np.linalg.eigh(0.5 * (Gs + dagger(Gs)))
    scale = max(1.0, float(np.abs(evals).max(initial=0.0)))
    mags = np.abs(evals)
    null = mags <= RANK_RTOL * scale
    lo, hi_band = AMBIGUITY_BAND
    if np.any((mags >= lo * scale) & (mags <= hi_band * scale)):
        warnings.warn("eigenvalue of the dissipator lies in the rank ambiguity band",
                      RankAmbiguityWarning, stacklevel=2)
    rest = mags[~null]
    gap = float(rest.min()) if rest.size else float("nan")
    basis = hi @ vecs[:, null]
    return SpectralReport(eigenvalues=evals, gap_theta=gap, null_dim=int(null.sum()),
                          null_basis=basis, self_adjointness_residual=sa,
                          negativity_slack=float(evals.max(initial=0.0)))


@dataclass
class StructureReport:
    """Residuals of the structural identities, keyed by short item names."""

    residuals: dict = field(default_factory=dict)
    threshold: float = 1e-6

    @property
    def violations(self):
        return [k for k, v in self.residuals.items() if not v <= self.threshold]

    @property
    def passed(self):
        return not self.violations

    def raise_for_violation(self):
        bad = self.violations
        if bad:
            raise StructureViolationError(bad[0], self.residuals[bad[0]])


STRUCTURE_ITEMS = {
    "a": "Gp self-adjoint in Tr(A* B rho)",
    "b": "Gp negative semidefinite",
    "c": "L0p anti-self-adjoint in Tr(A* B rho)",
    "d": "G self-adjoint and nonpositive in Tr(l* m rho^-1)",
    "e": "exp(L0 t) commutes with G",
    "f": "Gp self-adjoint in Tr(A* rho B)",
}


def structure_check(gens, gibbs, times=(0.3, 1.0, np.pi), strict=False, threshold=1e-6):
    """Residuals for items (a)-(f) of the structure theorem.

    (b) and the nonpositivity half of (d) are reported as the positive part of
    the largest eigenvalue of the symmetrized operator.  With ``strict`` the
    first residual above ``threshold`` raises StructureViolationError.
    """
    g = as_gibbs(gibbs)
    obs = observable_metric(g)
    h, hi = _sqrt_pair(obs.gram)
    Gs = h @ gens.Gp.matrix @ hi
    L0s = h @ gens.L0p.matrix @ hi
    res = {}
    res["a"] = float(np.linalg.norm(Gs - dagger(Gs), 2))
    res["b"] = max(0.0, float(np.linalg.eigvalsh(0.5 * (Gs + dagger(Gs)))[-1]))
    res["c"] = float(np.linalg.norm(L0s + dagger(L0s), 2))
    sh, shi = _sqrt_pair(state_metric(g).gram)
    Gst = sh @ gens.G.matrix @ shi
    res["d"] = max(float(np.linalg.norm(Gst - dagger(Gst), 2)),
                   float(np.linalg.eigvalsh(0.5 * (Gst + dagger(Gst)))[-1]), 0.0)
    G = gens.G.matrix
    comm = 0.0
    for t in times:
        E = scipy.linalg.expm(t * gens.L0.matrix)
        comm = max(comm, float(np.linalg.norm(E @ G - G @ E, 2)))
    res["e"] = comm
    th, thi = _sqrt_pair(observable_metric_tau1(g).gram)
    G1 = th @ gens.Gp.matrix @ thi
    res["f"] = float(np.linalg.norm(G1 - dagger(G1), 2))
    report = StructureReport(residuals=res, threshold=threshold)
    if strict:
        report.raise_for_violation()
    return report


@dataclass(frozen=True, eq=False)
class NullSpaceReport:
    L: np.ndarray
    G: np.ndarray
    L0: np.ndarray
    intersection: np.ndarray
    intersection_residual: float
    stationary_residual: float

    @property
    def null_dim(self):
        return self.L.shape[1]


def null_spaces(gens, gibbs):
    """Kernels of ``L``, ``G``, ``L0`` and the check ``ker L = ker G & ker L0``."""
    g = as_gibbs(gibbs)
    NL = kernel_basis(gens.L.matrix, name="L")
    NG = kernel_basis(gens.G.matrix, name="G")
    N0 = kernel_basis(gens.L0.matrix, name="L0")
    both = kernel_basis(np.vstack([gens.G.matrix, gens.L0.matrix]), name="[G; L0]")
    res = float(np.linalg.norm(orth_projector(NL) - orth_projector(both), 2))
    stat = float(np.linalg.norm(gens.L.matrix @ vec(g.rho)))
    return NullSpaceReport(L=NL, G=NG, L0=N0, intersection=both, intersection_residual=res,
                           stationary_residual=stat)


def null_inclusion_residual(sub, sup):
    """``||(1 - P_sup) P_sub||``: zero iff span(sub) lies in span(sup)."""
    n = sub.shape[0]
    if sub.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm((np.eye(n) - orth_projector(sup)) @ orth_projector(sub), 2))


@dataclass(frozen=True, eq=False)
class CommutantReport:
    commutant_dim: int
    basis: list
    max_residual: float


def commutant(jumps, dim=None):
    """Matrices commuting with every ``W_j`` and ``W_j*``."""
    jumps = as_jumps(jumps, dim)
    d = jumps.dim
    I = np.eye(d)
    rows = []
    for W in jumps:
        for V in (W, dagger(W)):
            rows.append(np.kron(I, V) - np.kron(V.T, I))
    if not rows:
        B = np.eye(d * d, dtype=complex)
    else:
        B = kernel_basis(np.vstack(rows), name="commutant system")
    mats = [unvec(B[:, k]) for k in range(B.shape[1])]
    worst = 0.0
    for X in mats:
        for W in jumps:
            r = np.linalg.norm(W @ X - X @ W) + np.linalg.norm(dagger(W) @ X - X @ dagger(W))
            worst = max(worst, r / np.linalg.norm(X))
    return CommutantReport(commutant_dim=len(mats), basis=mats, max_residual=float(worst))


_METRICS = {
    "state": (state_metric, "L"),
    "tau1": (observable_metric_tau1, "Lp"),
    "tau": (observable_metric, "Lp"),
}


@dataclass(frozen=True)
class ErgodicRow:
    T: float
    err: float
    bound: float

    @property
    def within_bound(self):
        return self.err <= self.bound * (1 + 1e-9) + 1e-14


@dataclass(frozen=True, eq=False)
class ErgodicTable:
    space: str
    rows: list
    limit: np.ndarray
    ratio_ok: bool

    @property
    def passed(self):
        return self.ratio_ok and all(r.within_bound for r in self.rows)


def ergodic_limit_check(gens, gibbs, x0, T_list, space="state", ratio=0.75):
    """Distance of the time average from its limit against the ``2/T`` envelope.

    :param space: ``"state"`` (``Tr(l* m rho^-1)``, kernel of ``L``),
        ``"tau1"`` (``Tr(A* rho B)``) or ``"tau"`` (``Tr(A* B rho)``); the
        observable spaces use the kernel of ``Lp``
    :param ratio: required contraction ``err(2T) <= ratio * err(T)`` for
        consecutive doublings among the largest ``T``
    """
    g = as_gibbs(gibbs)
    make_metric, which = _METRICS[space]
    metric = make_metric(g)
    Lm = getattr(gens, which).matrix
    M = metric.gram
    P = metric_projector(kernel_basis(Lm, name=which), M)
    v = vec(np.asarray(x0, dtype=complex))
    perp = v - P @ v
    y = np.linalg.solve(Lm + P, perp)

    def mnorm(u):
        return float(np.sqrt(max(np.vdot(u, M @ u).real, 0.0)))

    bound_num = 2.0 * mnorm(y)
    rows = []
    for T in T_list:
        avg = P @ v + (scipy.linalg.expm(T * Lm) @ y - y) / T
        rows.append(ErgodicRow(T=float(T), err=mnorm(avg - P @ v), bound=bound_num / T))
    ok = True
    by_T = {r.T: r.err for r in rows}
    Ts = sorted(by_T)
    for T in Ts[-3:]:
        if 2 * T in by_T:
            ok &= by_T[2 * T] <= ratio * by_T[T] + 1e-15
    return ErgodicTable(space=space, rows=rows, limit=unvec(P @ v), ratio_ok=bool(ok))


@dataclass(frozen=True)
class DecayRow:
    t: float
    norm: str
    lhs: float
    rhs: float
    slack: float = 1e-6

    @property
    def ok(self):
        return self.lhs <= (1 + self.slack) * self.rhs + 1e-14


@dataclass(frozen=True, eq=False)
class DecayReport:
    status: str
    theta: float
    null_inclusion_residual: float
    rows: list
    note: str = ""

    @property
    def passed(self):
        return self.status == "ok" and all(r.ok for r in self.rows)

    @property
    def fitted_prefactor(self):
        """Smallest constant c with ``||exp(t Lp) A - Q'A|| <= c exp(-theta t) ||A||`` on the samples."""
        ratios = [r.lhs / r.rhs for r in self.rows if r.norm == "observable" and r.rhs > 0]
        return max(ratios) if ratios else float("nan")


def gap_decay_check(gens, gibbs, samples, rng=None, n_states=3, initial_states=None, slack=1e-6):
    """Exponential approach to the kernel of the dissipator at the spectral-gap rate.

    At finite dimension the spectrum is pure point, so only the gap case of the
    decay theorem arises.  Requires the kernel of ``G`` to lie in the kernel of
    ``L0``; otherwise the report status is ``"hypothesis-not-met"``.

    :param samples: times at which the bounds are checked
    :param slack: relative allowance on the exponential envelope
    """
    g = as_gibbs(gibbs)
    d = g.dim
    rep = spectral_report(gens, g)
    ns = null_spaces(gens, g)
    incl = null_inclusion_residual(ns.G, ns.L0)
    if not np.isfinite(rep.gap_theta) or rep.gap_theta <= 0:
        return DecayReport("hypothesis-not-met", float("nan"), incl, [], "dissipator has no nonzero spectrum")
    if incl > 1e-9:
        return DecayReport("hypothesis-not-met", rep.gap_theta, incl, [],
                           "kernel of G is not contained in kernel of L0")
    theta = rep.gap_theta
    rng = np.random.default_rng(0) if rng is None else rng
    st = state_metric(g)
    stT = state_metric_transposed(g)
    ob = observable_metric(g)
    Q = metric_projector(ns.G, st.gram)
    NGp = kernel_basis(gens.Gp.matrix, name="Gp")
    Qp = metric_projector(NGp, ob.gram)
    simple = ns.G.shape[1] == 1
    if initial_states is None:
        initial_states = [random_density(d, rng) for _ in range(n_states)]
        observables = [random_matrix(d, rng) for _ in range(n_states)]
    else:
        observables = [np.asarray(x) for x in initial_states]
    rows = []
    for t in samples:
        Et = scipy.linalg.expm(t * gens.L.matrix)
        Ept = scipy.linalg.expm(t * gens.Lp.matrix)
        env = float(np.exp(-theta * t))
        for rho0 in initial_states:
            v = vec(rho0)
            rows.append(DecayRow(t, "state", st.norm(unvec(Et @ v - Q @ v)), env * st.norm(rho0), slack))
            if simple:
                tr = np.trace(rho0)
                diff = unvec(Et @ v) - tr * g.rho
                rows.append(DecayRow(t, "state-to-gibbs", st.norm(diff), env * st.norm(rho0), slack))
                rows.append(DecayRow(t, "transposed", stT.norm(diff), env * stT.norm(rho0), slack))
        for A in observables:
            a = vec(A)
            rows.append(DecayRow(t, "observable", ob.norm(unvec(Ept @ a - Qp @ a)), env * ob.norm(A), slack))
    return DecayReport("ok", theta, incl, rows)
