import numpy as np
import pytest
import scipy.linalg

from oracles import rand_c
from qdblab.dynamics import split_discrepancy
from qdblab.errors import QdbViolationError
from qdblab.fixtures import closed_system, qdb_fixtures, sigma_x_control, synthesized_qubit
from qdblab.gibbs import make_gibbs
from qdblab.modular import (
    build_modular,
    check_modular_commutation,
    check_S_operator,
    transpose_permutation,
)
from qdblab.operators import vec
from qdblab.qdb import verify_qdb


def test_transpose_permutation(rng):
    X = rand_c(4, rng)
    assert np.array_equal(vec(X)[transpose_permutation(4)], vec(X.T))


def test_maximally_mixed():
    mod = build_modular(make_gibbs(np.zeros((3, 3))))
    assert np.abs(mod.L_tau.matrix).max() <= 1e-14
    np.testing.assert_allclose(mod.omega, np.eye(3) / np.sqrt(3), atol=1e-15)
    X = rand_c(3, np.random.default_rng(0))
    np.testing.assert_array_equal(mod.J(vec(X)), vec(X.conj().T))


def test_qubit_bohr_frequencies():
    mod = build_modular(make_gibbs(np.diag([0.0, 1.0]), 1.0))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(mod.L_tau.matrix)), [-1, 0, 0, 1], atol=1e-14)
    assert max(mod.residuals.values()) <= 1e-12


def test_invariants_and_covariance(rng):
    X = rand_c(3, rng)
    g = make_gibbs(X + X.conj().T, 0.8)
    mod = build_modular(g, rng)
    L = mod.L_tau.matrix
    assert np.linalg.norm(L - L.conj().T) <= 1e-12
    assert np.linalg.norm(L @ vec(mod.omega)) <= 1e-12
    w = vec(rand_c(3, rng))
    np.testing.assert_allclose(mod.J(mod.J(w)), w)
    np.testing.assert_allclose(mod.J(vec(mod.omega)), vec(mod.omega), atol=1e-15)
    Ht = -scipy.linalg.logm(g.rho)
    for t in (0.5, 1.0):
        U = scipy.linalg.expm(1j * t * Ht)
        for _ in range(5):
            A = rand_c(3, rng)
            np.testing.assert_allclose(mod.modular_exp(1j * t) @ vec(A), vec(U @ A @ U.conj().T), atol=1e-11)
        x = vec(rand_c(3, rng))
        assert np.linalg.norm(mod.modular_exp(1j * t) @ x) == pytest.approx(np.linalg.norm(x), rel=1e-10)


def test_S_operator(rng):
    for d in (2, 3, 4):
        X = rand_c(d, rng)
        Hm = X + X.conj().T
        # unit spectral spread keeps rho well conditioned; rounding grows like sqrt(cond(rho))
        Hm /= np.ptp(np.linalg.eigvalsh(Hm))
        mod = build_modular(make_gibbs(Hm, 1.0), rng)
        assert check_S_operator(mod, np.eye(d)) <= 1e-14
        assert check_S_operator(mod, Hm) <= 1e-11
        worst = max(check_S_operator(mod, rand_c(d, rng)) for _ in range(50))
        assert worst <= 1e-10


def test_commutation_on_qdb_fixtures():
    for model in qdb_fixtures(dims=(2, 3, 4, 5), seed=8):
        assert verify_qdb(model.gibbs, model.gens).passed
        mod = build_modular(model.gibbs)
        rep = check_modular_commutation(mod, model.gens, model.gibbs)
        assert rep.passed(1e-9), (model.name, rep)
        assert split_discrepancy(model.gens, 1.0) <= 1e-9
    m = synthesized_qubit()
    rep = check_modular_commutation(build_modular(m.gibbs), m.gens)
    assert max(rep.modular_group, rep.self_adjoint, rep.s_operator) <= 1e-11


def test_commutation_control():
    c = sigma_x_control()
    mod = build_modular(c.gibbs)
    rep = check_modular_commutation(mod, c.gens)
    assert rep.modular_group > 1e-3 and rep.self_adjoint > 1e-3
    assert rep.s_operator <= 1e-12
    # modular commutation fails exactly when the splitting fails
    assert not rep.passed() and split_discrepancy(c.gens, 1.0) > 1e-4
    with pytest.raises(QdbViolationError):
        check_modular_commutation(mod, c.gens, strict=True)


def test_commutation_zero_dissipator():
    m = closed_system(np.diag([0.0, 0.3, 1.1]))
    rep = check_modular_commutation(build_modular(m.gibbs), m.gens)
    assert rep.modular_group == 0 and rep.self_adjoint == 0 and rep.s_operator == 0
