"""Modular data of a Gibbs state and the commutation of a detailed-balanced dissipator.

Run with ``python demos/04_modular_structure.py``.
"""
import numpy as np

from qdblab.fixtures import sigma_x_control, synthesized_qubit
from qdblab.modular import build_modular, check_modular_commutation, check_S_operator

model = synthesized_qubit()
mod = build_modular(model.gibbs)

# %% The modular generator has the Bohr frequencies as eigenvalues
print("eigenvalues:", np.round(np.linalg.eigvalsh(mod.L_tau.matrix), 12))
print("construction residuals:", {k: f"{v:.1e}" for k, v in mod.residuals.items()})

# %% S maps A Omega to A* Omega
rng = np.random.default_rng(1)
A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
print(f"S residual on a random A: {check_S_operator(mod, A):.1e}")

# %% The induced dissipator commutes with the modular operator only under detailed balance
for m in (model, sigma_x_control()):
    rep = check_modular_commutation(build_modular(m.gibbs), m.gens)
    print(f"{m.name:18s} group {rep.modular_group:.1e}  self-adjoint {rep.self_adjoint:.1e}  "
          f"S {rep.s_operator:.1e}")
