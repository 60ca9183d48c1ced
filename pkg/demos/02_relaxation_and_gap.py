"""Return to equilibrium of a thermal qubit at the rate set by the spectral gap.

Run with ``python demos/02_relaxation_and_gap.py``.
"""
import numpy as np

from qdblab.dynamics import evolve_exact
from qdblab.fixtures import block_diagonal, thermal_qubit
from qdblab.gibbs import state_metric
from qdblab.spectral import commutant, ergodic_limit_check, gap_decay_check, spectral_report

model = thermal_qubit(gamma_down=1.0)
g, gens = model.gibbs, model.gens

# %% Gap of the dissipator: coherences decay at half the total rate
rep = spectral_report(gens, g)
print("eigenvalues of the symmetrized dissipator:", np.round(rep.eigenvalues, 6))
print(f"gap theta = {rep.gap_theta:.6f}, half total rate = {(1 + np.exp(-1)) / 2:.6f}")

# %% Distance to the Gibbs state in the weighted state norm against exp(-theta t)
metric = state_metric(g)
rho0 = np.diag([0.0, 1.0]).astype(complex)
n0 = metric.norm(rho0)
for t in np.array([0.0, 0.5, 1, 2, 4]) / rep.gap_theta:
    dist = metric.norm(evolve_exact(gens, rho0, t) - g.rho)
    print(f"t={t:6.3f}  distance {dist:.3e}  envelope {np.exp(-rep.gap_theta * t) * n0:.3e}")

dec = gap_decay_check(gens, g, [1.0, 2.0, 4.0])
print("decay bounds hold:", dec.passed)

# %% Time averages converge like 1/T
tab = ergodic_limit_check(gens, g, rho0, [10, 20, 40, 80])
for row in tab.rows:
    print(f"T={row.T:5.0f}  err {row.err:.3e}  bound {row.bound:.3e}")

# %% Two uncoupled blocks: the commutant is larger and stationary states are not unique
blocks = block_diagonal()
print("commutant dimension:", commutant(blocks.jumps).commutant_dim)
