import numpy as np
import pytest
import scipy.linalg

from oracles import gibbs_direct, mpow, obs_inner, rand_c, rand_density, state_inner
from qdblab.errors import ConditioningError, InvalidParameterError, ShapeError
from qdblab.gibbs import (
    coupling,
    inner,
    make_gibbs,
    observable_metric,
    observable_metric_tau1,
    phi_inverse,
    phi_map,
    reference_state,
    state_metric,
    state_metric_transposed,
    weighted_metric,
)
from qdblab.operators import schatten_norm


def test_qubit_gibbs_values():
    g = make_gibbs(np.diag([0.0, 1.0]), 1.0)
    assert g.Z == pytest.approx(1 + np.exp(-1), abs=1e-14)
    ref = np.array([1.0, np.exp(-1)]) / (1 + np.exp(-1))
    np.testing.assert_allclose(np.diag(g.rho).real, ref, atol=1e-15)
    assert ref[0] == pytest.approx(0.731059, abs=1e-6)
    np.testing.assert_allclose(g.spectrum, ref, atol=1e-15)


def test_zero_hamiltonian_is_maximally_mixed():
    g = make_gibbs(np.zeros((4, 4)), 0.7)
    np.testing.assert_allclose(g.rho, np.eye(4) / 4, atol=1e-15)
    assert g.Z == pytest.approx(4.0)


def test_qutrit_gibbs_and_invariants(rng):
    g = make_gibbs(np.diag([0.0, 1.0, 2.0]), 0.5)
    w = np.array([1.0, np.exp(-2), np.exp(-4)])
    np.testing.assert_allclose(g.spectrum, w / w.sum(), atol=1e-15)
    assert np.trace(g.rho).real == pytest.approx(1.0, abs=1e-12)
    X = rand_c(4, rng)
    H = X + X.conj().T
    g = make_gibbs(H, 1.3)
    np.testing.assert_allclose(g.rho, gibbs_direct(H, 1.3), atol=1e-12)
    assert np.all(np.diff(g.spectrum) <= 0)
    Z = np.trace(scipy.linalg.expm(-H / 1.3)).real
    assert g.Z == pytest.approx(Z, rel=1e-12)


def test_make_gibbs_errors():
    with pytest.raises(InvalidParameterError):
        make_gibbs(np.eye(2), 0.0)
    with pytest.raises(ConditioningError, match="larger tau"):
        make_gibbs(np.diag([0.0, 1000.0]), 1.0)


@pytest.mark.parametrize("side,r", [("state", 0.0), ("state", 0.3), ("state", 1.0),
                                    ("observable", 0.0), ("observable", 0.6), ("observable", 1.0)])
def test_gram_reproduces_trace_formula(rng, side, r):
    rho = rand_density(3, rng)
    m = weighted_metric(rho, side, r)
    oracle = state_inner if side == "state" else obs_inner
    for _ in range(10):
        X, Y = rand_c(3, rng), rand_c(3, rng)
        ref = oracle(rho, X, Y, r)
        assert abs(inner(m, X, Y) - ref) <= 1e-10 * max(1.0, abs(ref))
    assert np.linalg.eigvalsh(m.gram)[0] > 0


def test_named_gram_matrices(rng):
    rho = rand_density(3, rng)
    I = np.eye(3)
    np.testing.assert_allclose(state_metric(rho).gram, np.kron(np.linalg.inv(rho).T, I), atol=1e-10)
    np.testing.assert_allclose(observable_metric(rho).gram, np.kron(rho.T, I), atol=1e-12)
    np.testing.assert_allclose(state_metric_transposed(rho).gram, np.kron(I, np.linalg.inv(rho)), atol=1e-10)
    np.testing.assert_allclose(observable_metric_tau1(rho).gram, np.kron(I, rho), atol=1e-12)


def test_inner_examples(rng):
    g = make_gibbs(np.diag([0.0, 1.0]), 1.0)
    I = np.eye(2)
    assert inner(observable_metric(g), I, I) == pytest.approx(1.0, abs=1e-14)
    assert inner(state_metric(g), g.rho, g.rho) == pytest.approx(1.0, abs=1e-14)
    for _ in range(10):
        A, B = rand_c(2, rng), rand_c(2, rng)
        lhs = inner(observable_metric_tau1(g), A, B)
        rhs = inner(observable_metric(g), B.conj().T, A.conj().T)
        assert abs(lhs - rhs) <= 1e-12 * max(1, abs(lhs))


def test_inner_sesquilinear_and_positive(rng):
    m = state_metric(rand_density(3, rng))
    X, Y = rand_c(3, rng), rand_c(3, rng)
    assert abs(inner(m, X, Y) - np.conj(inner(m, Y, X))) <= 1e-12 * abs(inner(m, X, Y))
    a = 0.4 + 2j
    assert abs(inner(m, a * X, Y) - np.conj(a) * inner(m, X, Y)) <= 1e-12 * abs(inner(m, X, Y)) * 3
    v = inner(m, X, X)
    assert abs(v.imag) <= 1e-12 * v.real and v.real > 0
    with pytest.raises(ShapeError):
        inner(m, np.eye(2), np.eye(3))


def test_metric_parameter_errors(rng):
    rho = rand_density(2, rng)
    with pytest.raises(InvalidParameterError):
        weighted_metric(rho, "state", 1.5)
    with pytest.raises(InvalidParameterError):
        weighted_metric(rho, "sideways", 0.0)
    with pytest.raises(ConditioningError):
        state_metric(make_gibbs(np.diag([0.0, 30.0]), 1.0))


def test_phi_map_examples_and_unitarity(rng):
    g = make_gibbs(np.diag([0.0, 1.0]), 1.0)
    np.testing.assert_allclose(phi_map(g, np.eye(2), 0.0), g.rho, atol=1e-15)
    np.testing.assert_allclose(phi_map(g, np.eye(2), 1.0), g.rho, atol=1e-15)
    rho = g.rho
    for r in (0.0, 0.25, 0.5, 1.0):
        m = weighted_metric(g, "state", r)
        for _ in range(5):
            A, B = rand_c(2, rng), rand_c(2, rng)
            ref = np.trace(A.conj().T @ B @ rho)
            assert abs(inner(m, phi_map(g, A, r), phi_map(g, B, r)) - ref) <= 1e-10 * max(1, abs(ref))
            np.testing.assert_allclose(phi_inverse(g, phi_map(g, A, r), r), A, atol=1e-10 * np.linalg.norm(A))
    with pytest.raises(InvalidParameterError):
        phi_map(g, np.eye(2), -0.1)


def test_coupling_and_duality_inequalities(rng):
    g = make_gibbs(np.diag([0.0, 0.4, 1.7]), 0.9)
    rho = g.rho
    assert coupling(np.eye(3), rho) == pytest.approx(1.0, abs=1e-14)
    st, stT = state_metric(g), state_metric_transposed(g)
    ob, ob1 = observable_metric(g), observable_metric_tau1(g)
    for _ in range(100):
        A, lam = rand_c(3, rng), rand_c(3, rng)
        c = abs(coupling(A, lam))
        assert c <= ob1.norm(A) * st.norm(lam) * (1 + 1e-10)
        assert c <= ob.norm(A) * stT.norm(lam) * (1 + 1e-10)
        # trace norm bounded by the weighted norm since Tr rho = 1
        assert schatten_norm(lam, 1) <= st.norm(lam) * np.sqrt(np.trace(rho).real) * (1 + 1e-10)
    lam = rand_c(3, rng)
    A = lam.conj().T @ np.linalg.inv(rho)
    assert abs(coupling(A, lam)) == pytest.approx(ob.norm(A) * stT.norm(lam), rel=1e-10)
    with pytest.raises(ShapeError):
        coupling(np.eye(2), np.eye(3))


def test_reference_state_accepts_any_positive_density(rng):
    rho = rand_density(3, rng)
    g = reference_state(rho)
    np.testing.assert_allclose(g.rho, rho)
    np.testing.assert_allclose(g.power(0.5) @ g.power(0.5), rho, atol=1e-12)
    np.testing.assert_allclose(g.power(-0.3), mpow(rho, -0.3), atol=1e-10)
