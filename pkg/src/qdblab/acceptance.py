"""Acceptance suite shared by ``lab selftest`` and the pytest acceptance module.

Each ``criterion_*`` function returns a :class:`CriterionResult`.  Tolerances are
the documented defaults multiplied by ``tol_scale``.
"""
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import fixtures
from .dynamics import (
    choi_matrix,
    evolve_exact,
    evolve_trotter,
    split_discrepancy,
    transpose_superop,
    unravel,
)
from .errors import StructureViolationError
from .gibbs import (
    coupling,
    make_gibbs,
    observable_metric,
    observable_metric_tau1,
    state_metric,
    state_metric_transposed,
)
from .lindblad import phi_apply
from .modular import build_modular, check_modular_commutation, check_S_operator
from .operators import random_density, random_matrix, schatten_norm, unvec, vec
from .qdb import build_qdb_model, random_condition_A_spectrum, random_unitary, random_upper, verify_qdb
from .spectral import (
    commutant,
    ergodic_limit_check,
    gap_decay_check,
    kernel_basis,
    metric_projector,
    null_spaces,
    spectral_report,
    structure_check,
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d} {self.title}: {self.detail}"


@dataclass
class SuiteConfig:
    dims: tuple = (2, 3, 4)
    synth_dims: tuple = (2, 3, 4, 5, 6)  # the synthesis criterion always covers d = 2..6
    seed: int = 12345
    tol_scale: float = 1.0
    corrupt: object = None  # callable applied to the generators of every detailed-balanced fixture
    mc_paths: int = 20000
    mc_dt: float = 1e-3


def _apply_corruption(cfg, models):
    if cfg.corrupt is None:
        return models
    return [fixtures.Model(m.name, m.gibbs, cfg.corrupt(m.gens), m.qdb) for m in models]


def flip_dissipator_sign(gens):
    """Mutation used to prove the suite can fail: negate ``G`` and ``Gp``."""
    return gens.replace_dissipator(-gens.G, -gens.Gp)


def _synth_models(cfg):
    rng = np.random.default_rng(cfg.seed)
    out = []
    for d in cfg.synth_dims:
        for _ in range(20):
            spec = random_condition_A_spectrum(d, rng)
            qm = build_qdb_model(spec, random_upper(d, rng, 0.0, 2.0), basis=random_unitary(d, rng))
            out.append(fixtures.Model(f"synth-d{d}", qm.gibbs, qm.gens, True))
    return _apply_corruption(cfg, out)


def _qdb_models(cfg):
    return _apply_corruption(cfg, fixtures.qdb_fixtures(cfg.dims, seed=cfg.seed))


def _unique_models(cfg):
    """Detailed-balanced fixtures whose commutant is trivial."""
    return [m for m in _qdb_models(cfg) if commutant(m.jumps).commutant_dim == 1]


def criterion_1(cfg):
    tol = 1e-10 * cfg.tol_scale
    worst = max(verify_qdb(m.gibbs, m.gens).residual for m in _synth_models(cfg))
    return CriterionResult(1, "detailed-balance synthesis", worst <= tol,
                           f"max residual {worst:.2e} over 20 spectra per d in {list(cfg.synth_dims)} (tol {tol:.0e})")


def criterion_2(cfg):
    tol = 1e-11 * cfg.tol_scale
    worst = 0.0
    for m in _synth_models(cfg) + _qdb_models(cfg):
        worst = max(worst, float(np.linalg.norm(m.gens.L.apply(m.gibbs.rho))))
    return CriterionResult(2, "Gibbs stationarity", worst <= tol, f"max ||L rho|| {worst:.2e} (tol {tol:.0e})")


def criterion_3(cfg):
    tol = 1e-9 * cfg.tol_scale
    worst, failed = 0.0, None
    for m in _qdb_models(cfg):
        rep = structure_check(m.gens, m.gibbs)
        for k, v in rep.residuals.items():
            if v > worst:
                worst = v
            if v > tol and failed is None:
                failed = StructureViolationError(k, v)
    ctl = fixtures.sigma_x_control()
    neg = structure_check(ctl.gens, ctl.gibbs).residuals["a"]
    ok = failed is None and neg > 1e-3
    detail = f"max residual {worst:.2e} (tol {tol:.0e}); sigma_x self-adjointness residual {neg:.3f}"
    if failed is not None:
        detail = f"{failed}; " + detail
    return CriterionResult(3, "structure theorem", ok, detail)


def criterion_4(cfg):
    tol = 1e-9 * cfg.tol_scale
    ts = (0.3, 1.0, 3.0)
    worst = max(split_discrepancy(m.gens, t) for m in _qdb_models(cfg) for t in ts)
    ctl = fixtures.sigma_x_control()
    neg = min(split_discrepancy(ctl.gens, t) for t in ts)
    return CriterionResult(4, "splitting", worst <= tol and neg > 1e-4,
                           f"max gap {worst:.2e} (tol {tol:.0e}); control min gap {neg:.3e}")


def criterion_5(cfg):
    tol = 1e-9 * cfg.tol_scale
    worst = 0.0
    for m in _qdb_models(cfg):
        ns = null_spaces(m.gens, m.gibbs)
        worst = max(worst, ns.intersection_residual, ns.stationary_residual)
    return CriterionResult(5, "kernel intersection", worst <= tol, f"max projector residual {worst:.2e}")


def criterion_6(cfg):
    rng = np.random.default_rng(cfg.seed + 6)
    Ts = (10.0, 20.0, 40.0, 80.0)
    ok, worst_ratio, n = True, 0.0, 0
    for m in _unique_models(cfg):
        d = m.dim
        x_state = random_density(d, rng)
        A = random_matrix(d, rng, hermitian=True)
        for space, x0 in (("state", x_state), ("tau1", A), ("tau", A)):
            tab = ergodic_limit_check(m.gens, m.gibbs, x0, Ts, space)
            errs = {r.T: r.err for r in tab.rows}
            ok &= all(r.within_bound for r in tab.rows)
            if errs[20.0] > 0:
                ratio = errs[80.0] / errs[20.0]
                worst_ratio = max(worst_ratio, ratio)
                ok &= ratio <= 0.3
            n += 1
    return CriterionResult(6, "ergodic convergence", bool(ok),
                           f"{n} tables in three metrics; worst err(80)/err(20) {worst_ratio:.3f}")


def criterion_7(cfg):
    tol = 1e-8 * cfg.tol_scale
    rng = np.random.default_rng(cfg.seed + 7)
    ok, worst = True, 0.0
    for m in _unique_models(cfg):
        d = m.dim
        ns = null_spaces(m.gens, m.gibbs)
        ok &= ns.null_dim == 1
        rho0 = random_density(d, rng)
        A = random_matrix(d, rng)
        P = metric_projector(ns.L, state_metric(m.gibbs).gram)
        worst = max(worst, float(np.linalg.norm(unvec(P @ vec(rho0)) - m.gibbs.rho)))
        Pp = metric_projector(kernel_basis(m.gens.Lp.matrix), observable_metric_tau1(m.gibbs).gram)
        expect = np.trace(A @ m.gibbs.rho) * np.eye(d)
        worst = max(worst, float(np.linalg.norm(unvec(Pp @ vec(A)) - expect)))
        ok &= spectral_report(m.gens, m.gibbs).null_dim == 1
    blk = fixtures.block_diagonal()
    cdim = commutant(blk.jumps).commutant_dim
    ndim = null_spaces(blk.gens, blk.gibbs).null_dim
    ok &= worst <= tol and cdim >= 2 and ndim >= 2
    return CriterionResult(7, "uniqueness chain", bool(ok),
                           f"limit error {worst:.2e} (tol {tol:.0e}); block fixture commutant {cdim}, kernel {ndim}")


def thermal_gap_oracle(gamma_down, gamma_up, omega=1.0, tau=1.0):
    """Gap of the thermal qubit from an independently assembled symmetrized dissipator."""
    H = np.diag([0.0, omega])
    rho = scipy.linalg.expm(-H / tau)
    rho /= np.trace(rho)
    W = [np.sqrt(gamma_down) * fixtures.SIGMA_MINUS, np.sqrt(gamma_up) * fixtures.SIGMA_PLUS]
    Y = sum(w.conj().T @ w for w in W)
    cols = []
    for k in range(4):
        E = np.zeros(4, dtype=complex)
        E[k] = 1.0
        X = E.reshape(2, 2, order="F")
        out = sum(w.conj().T @ X @ w for w in W) - 0.5 * (Y @ X + X @ Y)
        cols.append(out.reshape(-1, order="F"))
    Gp = np.array(cols).T
    gram = np.kron(rho.T, np.eye(2))
    h = scipy.linalg.sqrtm(gram)
    S = h @ Gp @ np.linalg.inv(h)
    ev = np.linalg.eigvalsh(0.5 * (S + S.conj().T))
    nz = np.abs(ev)[np.abs(ev) > 1e-12]
    return float(nz.min())


def criterion_8(cfg):
    ok, worst = True, 0.0
    statuses = []
    for m in _qdb_models(cfg):
        theta = spectral_report(m.gens, m.gibbs).gap_theta
        samples = [s / theta for s in (0.5, 1.0, 2.0, 4.0)] if np.isfinite(theta) and theta > 0 else [1.0]
        rep = gap_decay_check(m.gens, m.gibbs, samples, rng=np.random.default_rng(cfg.seed + 8))
        statuses.append(rep.status)
        if rep.status != "ok":
            continue
        ok &= rep.passed
        worst = max([worst] + [r.lhs / r.rhs for r in rep.rows if r.rhs > 0])
    gd, gu = fixtures.thermal_rates(1.0, 1.0, 1.0)
    tq = fixtures.thermal_qubit(1.0, 1.0, 1.0)
    theta = spectral_report(tq.gens, tq.gibbs).gap_theta
    oracle = thermal_gap_oracle(gd, gu)
    dev = abs(theta - oracle)
    ok &= dev <= 1e-10 * cfg.tol_scale and abs(theta - 0.5 * (gd + gu)) <= 1e-10 * cfg.tol_scale
    ok &= statuses.count("ok") >= 1
    return CriterionResult(8, "gap decay", bool(ok),
                           f"max lhs/bound {worst:.6f}; thermal gap {theta:.12f} vs oracle {oracle:.12f}; "
                           f"hypothesis met on {statuses.count('ok')}/{len(statuses)} fixtures")


def criterion_9(cfg):
    worst = np.inf
    ok = True
    models = _qdb_models(cfg) + [fixtures.sigma_x_control()]
    for m in models:
        for t in (0.1, 1.0, 10.0):
            rep = choi_matrix(m.gens.L.expm(t), tol=1e-9 * cfg.tol_scale)
            worst = min(worst, rep.min_eigenvalue)
            ok &= rep.is_cp
    ctl = choi_matrix(transpose_superop(2))
    ok &= not ctl.is_cp
    return CriterionResult(9, "complete positivity", bool(ok),
                           f"min Choi eigenvalue {worst:.2e}; transpose map min eigenvalue {ctl.min_eigenvalue:.3f}")


def criterion_10(cfg):
    m = fixtures.thermal_qubit()
    rho0 = np.array([[0.2, 0.3 - 0.1j], [0.3 + 0.1j, 0.8]])
    exact = evolve_exact(m.gens, rho0, 1.0)
    err = {n: float(np.linalg.norm(evolve_trotter(m.gens.H, m.jumps, rho0, 1.0, n) - exact))
           for n in (32, 64, 128)}
    r1 = err[32] / err[64]
    r2 = err[64] / err[128]
    ok = 1.6 <= r1 <= 2.4 and 1.6 <= r2 <= 2.4
    return CriterionResult(10, "Trotter first order", ok, f"err ratios {r1:.3f} (n=32), {r2:.3f} (n=64)")


def criterion_11(cfg):
    m = fixtures.thermal_qubit()
    psi0 = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
    A = fixtures.SIGMA_Z
    t, dt, N = 1.0, cfg.mc_dt, cfg.mc_paths
    ens = unravel(m.gens.H, m.jumps, psi0, t, dt, N, cfg.seed, A)
    rho0 = np.outer(psi0, psi0.conj())
    exact = float(np.trace(A @ evolve_exact(m.gens, rho0, t)).real)
    dev = abs(ens.mean - exact)
    ok = dev <= 4 * ens.stderr + 5 * dt
    again = unravel(m.gens.H, m.jumps, psi0, t, dt, N, cfg.seed, A, block=777, workers=2)
    same = again.values.tobytes() == ens.values.tobytes() and again.mean == ens.mean
    return CriterionResult(11, "stochastic duality", bool(ok and same),
                           f"MC {ens.mean:.5f} vs exact {exact:.5f}, |diff| {dev:.2e} <= "
                           f"{4 * ens.stderr + 5 * dt:.2e}; rerun bit-identical: {same}")


def criterion_12(cfg):
    tol = 1e-9 * cfg.tol_scale
    rng = np.random.default_rng(cfg.seed + 12)
    worst = 0.0
    for m in _qdb_models(cfg):
        mod = build_modular(m.gibbs)
        worst = max([worst] + list(mod.residuals.values()))
        for _ in range(20):
            worst = max(worst, check_S_operator(mod, random_matrix(m.dim, rng)))
        mc = check_modular_commutation(mod, m.gens)
        worst = max(worst, mc.modular_group, mc.self_adjoint, mc.s_operator)
    return CriterionResult(12, "modular identities", worst <= tol, f"max residual {worst:.2e} (tol {tol:.0e})")


def criterion_13(cfg):
    rng = np.random.default_rng(cfg.seed + 13)
    slack = {"trace-norm": np.inf, "coupling-state": np.inf, "coupling-transposed": np.inf, "cp-bound": np.inf}
    for k in range(100):
        d = cfg.dims[k % len(cfg.dims)]
        g = make_gibbs(random_matrix(d, rng, hermitian=True), 1.0)
        lam = random_matrix(d, rng)
        A = random_matrix(d, rng)
        st = state_metric(g).norm(lam)
        stT = state_metric_transposed(g).norm(lam)
        a1 = observable_metric_tau1(g).norm(A)
        a0 = observable_metric(g).norm(A)
        c = abs(coupling(A, lam))
        slack["trace-norm"] = min(slack["trace-norm"], st * np.sqrt(np.trace(g.rho).real) - schatten_norm(lam, 1))
        slack["coupling-state"] = min(slack["coupling-state"], a1 * st - c)
        slack["coupling-transposed"] = min(slack["coupling-transposed"], a0 * stT - c)
        jumps = [random_matrix(d, rng) for _ in range(2)]
        Y = phi_apply(jumps, np.eye(d), "observable")
        bound = schatten_norm(A, np.inf) * schatten_norm(Y, np.inf)
        slack["cp-bound"] = min(slack["cp-bound"], bound - schatten_norm(phi_apply(jumps, A, "observable"), np.inf))
    worst = min(slack.values())
    ok = worst >= -1e-10 * cfg.tol_scale
    return CriterionResult(13, "norm inequalities", bool(ok),
                           ", ".join(f"{k} {v:.2e}" for k, v in slack.items()) + " (min slack)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13]


def run_suite(cfg=None, echo=print, timing=None):
    """Run every criterion; returns the list of results.

    :param echo: called with each result line (deterministic for a fixed seed)
    :param timing: optional callable receiving ``(number, seconds)``
    """
    cfg = SuiteConfig() if cfg is None else cfg
    results = []
    for crit in CRITERIA:
        t0 = time.perf_counter()
        try:
            res = crit(cfg)
        except Exception as exc:  # a crash is a failure of that criterion, not of the suite
            num = CRITERIA.index(crit) + 1
            res = CriterionResult(num, crit.__name__, False, f"{type(exc).__name__}: {exc}")
        results.append(res)
        if echo is not None:
            echo(res.line())
        if timing is not None:
            timing(res.number, time.perf_counter() - t0)
    return results

