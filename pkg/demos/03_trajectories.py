"""Stochastic pure-state trajectories reproduce the master equation on average.

Run with ``python demos/03_trajectories.py``.
"""
import numpy as np

from qdblab.dynamics import evolve_exact, evolve_trotter, unravel
from qdblab.fixtures import SIGMA_Z, thermal_qubit

model = thermal_qubit()
gens = model.gens
psi0 = np.array([1.0, 1.0]) / np.sqrt(2)
rho0 = np.outer(psi0, psi0.conj())

# %% Exact expectation of sigma_z at t=1
exact = np.trace(SIGMA_Z @ evolve_exact(gens, rho0, 1.0)).real
print(f"master equation: {exact:.5f}")

# %% Monte Carlo over independent paths; each path has its own random stream
ens = unravel(gens.H, gens.jumps, psi0, t=1.0, dt=1e-3, N=5000, seed=2024, A=SIGMA_Z)
print(f"trajectories:    {ens.mean:.5f} +- {ens.stderr:.5f}")

# %% Splitting the jump map from the no-jump flow converges at first order
for n in (16, 32, 64, 128):
    err = np.linalg.norm(evolve_trotter(gens.H, gens.jumps, rho0, 1.0, n) - evolve_exact(gens, rho0, 1.0))
    print(f"n={n:4d}  Trotter error {err:.3e}")
