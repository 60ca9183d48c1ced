"""Ready-made models used by the tests, the acceptance suite, the CLI and the demos."""
from dataclasses import dataclass

import numpy as np

from .gibbs import GibbsState, make_gibbs
from .lindblad import GeneratorPair, build_generators
from .qdb import (
    SpectrumSpec,
    build_qdb_model,
    random_condition_A_spectrum,
    random_unitary,
    random_upper,
)

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SIGMA_PLUS = SIGMA_MINUS.T.copy()
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class Model:
    """Hamiltonian, Gibbs state and generators, plus whether detailed balance is expected."""

    name: str
    gibbs: GibbsState
    gens: GeneratorPair
    qdb: bool

    @property
    def dim(self):
        return self.gibbs.dim

    @property
    def jumps(self):
        return self.gens.jumps


def thermal_rates(gamma_down=1.0, omega=1.0, tau=1.0):
    return gamma_down, gamma_down * np.exp(-omega / tau)


def thermal_qubit(gamma_down=1.0, omega=1.0, tau=1.0):
    """Two-level system with decay and thermal excitation at the Gibbs rate ratio."""
    gd, gu = thermal_rates(gamma_down, omega, tau)
    H = np.diag([0.0, omega])
    jumps = [np.sqrt(gd) * SIGMA_MINUS, np.sqrt(gu) * SIGMA_PLUS]
    return Model("thermal-qubit", make_gibbs(H, tau), build_generators(H, jumps), True)


def sigma_x_control():
    """Qubit with ``H = diag(0, 1)`` and a single ``sigma_x`` jump: not detailed balanced."""
    H = np.diag([0.0, 1.0])
    return Model("sigma-x-control", make_gibbs(H, 1.0), build_generators(H, [SIGMA_X]), False)


def dephasing(H, gamma=1.0, tau=1.0):
    """Pure dephasing in the energy eigenbasis: one jump ``sqrt(gamma) * diag(0, 1, ..., d-1)``."""
    g = make_gibbs(H, tau)
    U = g.H.eigenvectors
    W = np.sqrt(gamma) * (U * np.arange(g.dim)) @ U.conj().T
    return Model("dephasing", g, build_generators(g.H, [W]), True)


def closed_system(H, tau=1.0):
    g = make_gibbs(H, tau)
    return Model("closed", g, build_generators(g.H, []), True)


def synthesized(spec, upper, tau=1.0, m=None, basis=None, name="synthesized"):
    qm = build_qdb_model(spec, upper, tau=tau, m=m, basis=basis)
    return Model(name, qm.gibbs, qm.gens, True)


def synthesized_qubit(gamma=1.0, tau=1.0):
    """Synthesized family for ``H = diag(0, 1)`` with upper rate ``gamma``."""
    spec = SpectrumSpec.from_energies([0.0, 1.0], tau)
    return synthesized(spec, [gamma, gamma, gamma], tau=tau, name="synthesized-qubit")


def random_synthesized(d, rng, rotate=True, low=0.5, high=1.5):
    spec = random_condition_A_spectrum(d, rng)
    basis = random_unitary(d, rng) if rotate else None
    return synthesized(spec, random_upper(d, rng, low, high), basis=basis, name=f"random-synthesized-d{d}")


def block_diagonal():
    """Two qubit blocks with no rates between them: stationary states are not unique."""
    spec = SpectrumSpec.from_energies([0.0, 0.37, 1.13, 1.9])
    upper = np.zeros((4, 4))
    upper[0, 0] = upper[1, 1] = upper[2, 2] = upper[3, 3] = 0.8
    upper[0, 1] = 1.0
    upper[2, 3] = 0.7
    return synthesized(spec, upper, name="block-diagonal")


def qdb_fixtures(dims=(2, 3, 4), seed=2024):
    """Detailed-balanced fixtures: the qubit families plus one rotated random family per dimension."""
    rng = np.random.default_rng(seed)
    out = [thermal_qubit(), synthesized_qubit()]
    out += [random_synthesized(d, rng) for d in dims if d >= 2]
    out.append(block_diagonal())
    return out
