# %% Open quantum systems: master equations and linear response
# Run: python demos/open_systems.py

import math

import numpy as np

from statmech.master_eq import gibbs_state, lindblad_generator, pauli_matrices
from statmech.response import PreparedSystem, detailed_balance_check, fd_check

sx, sy, sz = pauli_matrices()
sm = np.array([[0, 0], [1, 0]], dtype=complex)

# %% a qubit relaxing through thermal jumps with detailed-balance rates
Om, T, g = 1.0, 0.5, 0.3
H = 0.5 * Om * sz
jumps = [math.sqrt(g) * sm, math.sqrt(g * math.exp(-Om / T)) * sm.conj().T]
gen = lindblad_generator(H, jumps)
rho = gen.evolve(np.diag([0.0, 1.0]).astype(complex), np.linspace(0, 20, 6))
for r in rho:
    print(np.round(np.real(np.diag(r)), 6), "trace", round(float(np.trace(r).real), 12))
print("steady state populations", np.round(np.real(np.diag(gen.steady_state())), 6))
print("Gibbs state of H        ", np.round(np.real(np.diag(gibbs_state(H, T))), 6))

# %% fluctuation-dissipation in a 40-level random system
rng = np.random.default_rng(0)
X = rng.normal(size=(2, 40, 40))
Hr, A = (X[0] + X[0].T) / math.sqrt(80), (X[1] + X[1].T) / math.sqrt(80)
E = np.linalg.eigvalsh(Hr)
width = E[-1] - E[0]
for spacings in (3, 5, 8):
    sys = PreparedSystem.canonical(Hr, width, sigma=spacings * width / 39)
    db, fd = detailed_balance_check(sys, A), fd_check(sys, A)
    print(f"sigma = {spacings} spacings: detailed balance {db.residual:.3%} (bound {db.bound:.3%}), "
          f"2T eta / nu - 1 = {fd.ratio - 1:+.3%}")
