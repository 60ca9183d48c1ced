import numpy as np
import pytest

from oracles import heisenberg_direct, lindblad_direct, rand_c, rand_density, superop_from_map
from qdblab.errors import QdbViolationError, ShapeError
from qdblab.fixtures import SIGMA_MINUS, sigma_x_control, synthesized_qubit, thermal_qubit
from qdblab.gibbs import coupling, inner, make_gibbs, observable_metric
from qdblab.lindblad import (
    JumpOperatorSet,
    apply_Gp,
    build_generators,
    dissipation,
    dissipation_commutators,
    gram_form_G,
    phi_apply,
)
from qdblab.operators import unvec, vec


def _random_model(d, m, rng):
    X = rand_c(d, rng)
    return X + X.conj().T, [rand_c(d, rng) / d for _ in range(m)]


def test_generators_match_direct_formulas(rng):
    H, jumps = _random_model(3, 2, rng)
    gens = build_generators(H, jumps)
    L_ref = superop_from_map(lambda X: lindblad_direct(H, jumps, X), 3)
    Lp_ref = superop_from_map(lambda X: heisenberg_direct(H, jumps, X), 3)
    np.testing.assert_allclose(gens.L.matrix, L_ref, atol=1e-12)
    np.testing.assert_allclose(gens.Lp.matrix, Lp_ref, atol=1e-12)
    np.testing.assert_array_equal(gens.L.matrix, (gens.L0 + gens.G).matrix)
    np.testing.assert_array_equal(gens.Lp.matrix, (gens.L0p + gens.Gp).matrix)


def test_one_dimensional_generator_vanishes():
    gens = build_generators(np.array([[0.7]]), [np.array([[1.3 - 0.4j]])])
    assert np.abs(gens.L.matrix).max() <= 1e-15


def test_empty_jumps_closed_system(rng):
    H, _ = _random_model(3, 0, rng)
    gens = build_generators(H, [])
    assert np.abs(gens.G.matrix).max() == 0
    np.testing.assert_array_equal(gens.L.matrix, gens.L0.matrix)


def test_qubit_decay_hand_value():
    gens = build_generators(np.diag([0.0, 1.0]), [SIGMA_MINUS])
    out = unvec(gens.L.matrix @ vec(np.diag([0.0, 1.0]).astype(complex)))
    np.testing.assert_allclose(out, np.diag([1.0, -1.0]), atol=1e-15)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        build_generators(np.eye(2), [np.eye(3)])


def test_duality_of_all_parts(rng):
    H, jumps = _random_model(3, 2, rng)
    gens = build_generators(H, jumps)
    for _ in range(10):
        A, rho = rand_c(3, rng), rand_c(3, rng)
        for S, Sp in ((gens.L, gens.Lp), (gens.L0, gens.L0p), (gens.G, gens.Gp)):
            lhs = coupling(unvec(Sp.matrix @ vec(A)), rho)
            rhs = coupling(A, unvec(S.matrix @ vec(rho)))
            assert abs(lhs - rhs) <= 1e-10 * max(1, abs(lhs))


def test_zero_modes_trace_and_hermiticity(rng):
    H, jumps = _random_model(4, 3, rng)
    gens = build_generators(H, jumps)
    I = np.eye(4)
    assert np.abs(unvec(gens.Lp.matrix @ vec(I))).max() <= 1e-12
    assert np.abs(unvec(gens.Gp.matrix @ vec(I))).max() <= 1e-12
    for _ in range(100):
        rho = rand_density(4, rng)
        out = unvec(gens.L.matrix @ vec(rho))
        assert abs(np.trace(out)) <= 1e-11
        assert np.abs(out - out.conj().T).max() <= 1e-12


def test_jump_set_Y_psd(rng):
    js = JumpOperatorSet.from_list([rand_c(3, rng) for _ in range(3)])
    assert js.Y.eigenvalues[0] >= -1e-12
    np.testing.assert_allclose(phi_apply(js, np.eye(3), "observable"), js.Y.matrix, atol=1e-12)


def test_phi_apply_examples_and_positivity(rng):
    out = phi_apply([SIGMA_MINUS], np.diag([0.0, 1.0]), "state")
    np.testing.assert_allclose(out, np.diag([1.0, 0.0]))
    js = JumpOperatorSet.from_list([rand_c(3, rng) for _ in range(2)])
    Ynorm = np.linalg.norm(js.Y.matrix, 2)
    for _ in range(50):
        X = rand_c(3, rng)
        P = X @ X.conj().T
        for side in ("state", "observable"):
            assert np.linalg.eigvalsh(phi_apply(js, P, side))[0] >= -1e-10
        A = rand_c(3, rng)
        PA = phi_apply(js, A)
        assert np.linalg.norm(PA, 2) <= np.linalg.norm(A, 2) * Ynorm * (1 + 1e-12)
        diff = Ynorm * phi_apply(js, A.conj().T @ A) - PA.conj().T @ PA
        assert np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))[0] >= -1e-9


def test_dissipation_examples(rng):
    js = JumpOperatorSet.from_list([rand_c(3, rng) for _ in range(2)])
    I = np.eye(3)
    assert np.abs(dissipation(js, I, I)).max() <= 1e-12
    # a scalar multiple of the identity commutes with everything
    assert np.abs(dissipation(js, 2.5 * I, 2.5 * I)).max() <= 1e-11
    for _ in range(10):
        A, B = rand_c(3, rng), rand_c(3, rng)
        ref = sum((W @ A - A @ W).conj().T @ (W @ B - B @ W) for W in js)
        np.testing.assert_allclose(dissipation(js, A, B), ref, atol=1e-11 * max(1, np.abs(ref).max()))
        np.testing.assert_allclose(dissipation_commutators(js, A, B), ref, atol=1e-11 * max(1, np.abs(ref).max()))
        assert np.linalg.eigvalsh(dissipation(js, A, A))[0] >= -1e-10 * np.abs(ref).max()


def test_dissipation_vanishes_on_commutant():
    # diagonal jump: every diagonal matrix commutes with it
    js = JumpOperatorSet.from_list([np.diag([1.0, 2.0, 3.0])])
    A = np.diag([0.3, -1.0, 2.0])
    assert np.abs(dissipation(js, A, A)).max() <= 1e-12


def test_gram_form_on_qdb_models(rng):
    for model in (thermal_qubit(), synthesized_qubit()):
        g, js = model.gibbs, model.jumps
        for _ in range(10):
            A, B = rand_c(2, rng), rand_c(2, rng)
            direct = inner(observable_metric(g), A, apply_Gp(js, B))
            assert abs(gram_form_G(g, js, A, B) - direct) <= 1e-11 * max(1, abs(direct))
            assert abs(gram_form_G(g, js, A, np.eye(2))) <= 1e-12
            v = gram_form_G(g, js, A, A)
            assert abs(v.imag) <= 1e-12 and v.real <= 1e-12


def test_gram_form_flags_non_qdb(rng):
    m = sigma_x_control()
    A = SIGMA_MINUS
    with pytest.raises(QdbViolationError):
        gram_form_G(m.gibbs, m.jumps, A, A)


def test_gp_bounded_under_qdb(rng):
    m = thermal_qubit()
    metric = observable_metric(m.gibbs)
    Ynorm = np.linalg.norm(m.jumps.Y.matrix, 2)
    for _ in range(20):
        A = rand_c(2, rng)
        assert metric.norm(apply_Gp(m.jumps, A)) <= 2 * Ynorm * metric.norm(A) * (1 + 1e-12)
    assert make_gibbs(np.diag([0.0, 1.0])).dim == 2
