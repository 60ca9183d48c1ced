import warnings

import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import solve_ivp

from oracles import lindblad_direct, rand_c, rand_density
from qdblab.dynamics import (
    choi_matrix,
    ergodic_average,
    evolve_exact,
    evolve_series,
    evolve_split,
    evolve_trotter,
    split_discrepancy,
    transpose_superop,
    unravel,
)
from qdblab.errors import InvalidParameterError, QdbViolationError, StabilityWarning
from qdblab.fixtures import SIGMA_Z, sigma_x_control, synthesized_qubit, thermal_qubit
from qdblab.gibbs import observable_metric
from qdblab.lindblad import build_generators
from qdblab.operators import SuperOperator
from qdblab.spectral import spectral_report


def _random_gens(d, m, rng):
    X = rand_c(d, rng)
    return build_generators(X + X.conj().T, [rand_c(d, rng) / d for _ in range(m)])


def test_evolve_exact_matches_ode_oracle(rng):
    gens = _random_gens(3, 2, rng)
    H, jumps = gens.H.matrix, list(gens.jumps)
    rho0 = rand_density(3, rng)

    def rhs(_, y):
        return lindblad_direct(H, jumps, y.reshape(3, 3)).reshape(-1)

    sol = solve_ivp(rhs, (0, 1.3), rho0.reshape(-1).astype(complex), rtol=1e-11, atol=1e-13)
    np.testing.assert_allclose(evolve_exact(gens, rho0, 1.3), sol.y[:, -1].reshape(3, 3), atol=1e-8)


def test_evolve_exact_examples(rng):
    gens = _random_gens(3, 0, rng)
    rho0 = rand_density(3, rng)
    assert np.array_equal(evolve_exact(gens, rho0, 0.0), rho0)
    U = scipy.linalg.expm(-1j * gens.H.matrix * 0.8)
    np.testing.assert_allclose(evolve_exact(gens, rho0, 0.8), U @ rho0 @ U.conj().T, atol=1e-11)
    with pytest.raises(InvalidParameterError):
        evolve_exact(gens, rho0, -1.0)


def test_long_time_limit_is_gibbs():
    m = synthesized_qubit()
    theta = spectral_report(m.gens, m.gibbs).gap_theta
    out = evolve_exact(m.gens, np.diag([0.0, 1.0]), 50 / theta)
    assert np.linalg.norm(out - m.gibbs.rho) <= 1e-8


def test_semigroup_duality_positivity_trace(rng):
    gens = _random_gens(3, 2, rng)
    rho0 = rand_density(3, rng)
    np.testing.assert_allclose(evolve_exact(gens, evolve_exact(gens, rho0, 0.4), 0.9),
                               evolve_exact(gens, rho0, 1.3), atol=1e-9)
    for t in (0.1, 1.0, 5.0):
        A, rho = rand_c(3, rng), rand_density(3, rng)
        lhs = np.trace(evolve_exact(gens, A, t, "observable") @ rho)
        rhs = np.trace(A @ evolve_exact(gens, rho, t))
        assert abs(lhs - rhs) <= 1e-9
        out = evolve_exact(gens, rho, t)
        assert np.linalg.eigvalsh(out)[0] >= -1e-9
        assert abs(np.trace(out) - 1) <= 1e-10
        np.testing.assert_allclose(evolve_exact(gens, np.eye(3), t, "observable"), np.eye(3), atol=1e-10)


def test_evolve_series_and_contractivity(rng):
    m = thermal_qubit()
    A = rand_c(2, rng)
    times = np.linspace(0, 5, 10)
    res = evolve_series(m.gens, A, times, "observable")
    assert res.method == "exact" and res.states.shape == (10, 2, 2)
    metric = observable_metric(m.gibbs)
    norms = [metric.norm(X) for X in res.states]
    assert all(b <= a + 1e-9 for a, b in zip(norms, norms[1:]))
    rs = evolve_series(m.gens, rand_density(2, rng), times)
    for X in rs.states:
        assert np.abs(X - X.conj().T).max() <= 1e-10
        assert abs(np.trace(X) - 1) <= 1e-9
    with pytest.raises(InvalidParameterError):
        evolve_series(m.gens, A, [1.0, 0.5])


def test_trotter_closed_system_exact(rng):
    gens = _random_gens(3, 0, rng)
    rho0 = rand_density(3, rng)
    for n in (1, 7):
        np.testing.assert_allclose(evolve_trotter(gens.H, [], rho0, 1.1, n),
                                   evolve_exact(gens, rho0, 1.1), atol=1e-12)


def test_trotter_first_order():
    m = synthesized_qubit()
    rho0 = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, 0.7]])
    exact = evolve_exact(m.gens, rho0, 1.0)
    errs = [np.linalg.norm(evolve_trotter(m.gens.H, m.jumps, rho0, 1.0, n) - exact) for n in (64, 128)]
    assert 1.6 <= errs[0] / errs[1] <= 2.4
    assert errs[0] <= 2 * errs[1] * 1.2
    # local error of one step is second order in t
    local = [np.linalg.norm(evolve_trotter(m.gens.H, m.jumps, rho0, t, 1) - evolve_exact(m.gens, rho0, t)) / t**2
             for t in (1e-2, 5e-3)]
    assert local[1] <= 1.2 * local[0] and local[0] < 10
    with pytest.raises(InvalidParameterError):
        evolve_trotter(m.gens.H, m.jumps, rho0, 1.0, 0)


def test_split_examples():
    m = synthesized_qubit()
    I = np.eye(2)
    np.testing.assert_allclose(evolve_split(m.gens, I, 2.0), I, atol=1e-12)
    A = np.array([[0.2, 1 - 1j], [1 + 1j, -0.5]])
    np.testing.assert_allclose(evolve_split(m.gens, A, 0.7), evolve_exact(m.gens, A, 0.7, "observable"),
                               atol=1e-11)
    c = sigma_x_control()
    assert split_discrepancy(c.gens, 0.7) > 1e-4
    with pytest.raises(QdbViolationError):
        evolve_split(c.gens, A, 0.7, check=True)


def test_choi_examples():
    rep = choi_matrix(SuperOperator(np.eye(4)))
    omega = np.zeros(4)
    omega[[0, 3]] = 1
    np.testing.assert_allclose(rep.matrix, np.outer(omega, omega), atol=0)
    assert rep.is_cp and abs(rep.min_eigenvalue) <= 1e-15
    rep = choi_matrix(transpose_superop(2))
    assert rep.min_eigenvalue == pytest.approx(-1.0) and not rep.is_cp
    m = synthesized_qubit()
    rep = choi_matrix(scipy.linalg.expm(m.gens.L.matrix))
    assert rep.is_cp and rep.min_eigenvalue >= -1e-11


def test_choi_against_kraus_oracle(rng):
    Ks = [rand_c(3, rng) for _ in range(2)]
    M = sum(np.kron(K.conj(), K) for K in Ks)
    rep = choi_matrix(M)
    ref = np.zeros((9, 9), dtype=complex)
    for K in Ks:
        v = sum(np.kron(np.eye(3)[:, [a]], K[:, [a]]) for a in range(3))
        ref += v @ v.conj().T
    np.testing.assert_allclose(rep.matrix, ref, atol=1e-12)
    assert rep.is_cp


def test_ergodic_average_stationary_and_quadrature(rng):
    m = thermal_qubit()
    for T in (0.5, 3.0, 40.0):
        np.testing.assert_allclose(ergodic_average(m.gens, m.gibbs.rho, T), m.gibbs.rho, atol=1e-12)
    rho0 = rand_density(2, rng)
    for T in (1.0, 4.0):
        a = ergodic_average(m.gens, rho0, T)
        b = ergodic_average(m.gens, rho0, T, method="quadrature", quad_points=64)
        np.testing.assert_allclose(a, b, atol=1e-8)
    with pytest.raises(InvalidParameterError):
        ergodic_average(m.gens, rho0, 0.0)


def test_ergodic_average_closed_system_dephases(rng):
    E = np.array([0.0, 0.9, 2.3])
    V = np.linalg.qr(rand_c(3, rng))[0]
    H = V @ np.diag(E) @ V.conj().T
    gens = build_generators(H, [])
    rho0 = rand_density(3, rng)
    T = 1e4
    avg = ergodic_average(gens, rho0, T)
    r = V.conj().T @ rho0 @ V
    # explicit phase average: (1/T) int e^{-i w t} dt on each coherence
    w = E[:, None] - E[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(w == 0, 1.0, (np.exp(-1j * w * T) - 1) / (-1j * w * T))
    np.testing.assert_allclose(V.conj().T @ avg @ V, r * factor, atol=1e-10)
    assert np.abs(r * factor - np.diag(np.diag(r))).max() <= 3 / T


def test_unravel_closed_system_deterministic():
    H = np.diag([0.0, 1.0])
    psi0 = np.array([1.0, 1.0]) / np.sqrt(2)
    X = np.array([[0, 1], [1, 0]])
    ens = unravel(H, [], psi0, 1.0, 1e-3, 4, 7, X)
    assert ens.stderr == 0.0
    # Euler steps grow the norm by (1 + dt^2)^(steps/2)
    assert ens.mean == pytest.approx(np.cos(1.0), abs=2e-3)


def test_unravel_duality_and_reproducibility():
    m = thermal_qubit()
    psi0 = np.array([0.6, 0.8])
    rho0 = np.outer(psi0, psi0)
    exact = np.trace(SIGMA_Z @ evolve_exact(m.gens, rho0, 1.0)).real
    ens = unravel(m.gens.H, m.jumps, psi0, 1.0, 1e-3, 4000, 99, SIGMA_Z, block=1000)
    assert abs(ens.mean - exact) <= 4 * ens.stderr + 5e-3
    again = unravel(m.gens.H, m.jumps, psi0, 1.0, 1e-3, 4000, 99, SIGMA_Z, block=333, workers=3)
    assert again.mean == ens.mean and again.stderr == ens.stderr
    assert np.array_equal(again.values, ens.values)
    norm = unravel(m.gens.H, m.jumps, psi0, 1.0, 1e-3, 4000, 5, np.eye(2))
    assert abs(norm.mean - 1.0) <= 4 * norm.stderr + 5e-3


def test_unravel_validation():
    m = thermal_qubit()
    with pytest.raises(InvalidParameterError):
        unravel(m.gens.H, m.jumps, np.array([1.0, 1.0]), 1.0, 1e-2, 10, 0, SIGMA_Z)
    with pytest.raises(InvalidParameterError):
        unravel(m.gens.H, m.jumps, np.array([1.0, 0.0]), 1.0, 2.0, 10, 0, SIGMA_Z)
    with pytest.raises(InvalidParameterError):
        unravel(m.gens.H, m.jumps, np.array([1.0, 0.0]), 1.0, 0.1, 0, 0, SIGMA_Z)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        unravel(m.gens.H, m.jumps, np.array([1.0, 0.0]), 1.0, 0.5, 2, 0, SIGMA_Z)
    assert any(issubclass(w.category, StabilityWarning) for w in rec)
