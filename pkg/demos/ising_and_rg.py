# %% Ising models from exact to mean field
# Run: python demos/ising_and_rg.py

import numpy as np

from statmech.ising_field import (ising1d_solve, lee_yang_zeros, mean_field_exponents_fit,
                                  mean_field_magnetization, onsager2d, onsager2d_tc, rg_fixed_points, rg_flow)

# %% 1D ring: free energy, magnetization and correlation length
for be in (0.1, 0.5, 1.0):
    r = ising1d_solve(be, 0.05, 1.0, 64)
    print(f"beta eps = {be:.1f}  lnZ/N = {r.lnZ / 64:.6f}  M = {r.M:.4f}  xi = {r.xi:.3f}")

# %% partition-function zeros in the fugacity plane sit on |z| = 1
z = lee_yang_zeros(8, 0.5, "ring")
print("Lee-Yang |z|:", np.round(np.abs(z), 12))

# %% square lattice: critical coupling and energy across it
ec, Tc = onsager2d_tc()
print(f"eps_c = {ec:.8f}  Tc/eps = {Tc:.6f}")
for x in (0.3, ec, 0.6):
    o = onsager2d(x)
    print(f"  eps/T = {x:.4f}  kappa = {o.kappa:.6f}  E/N = {o.energy_per_site:.6f}")

# %% mean field: spontaneous magnetization and fitted exponents (c = 4, Tc = 4 eps)
for T in (2.0, 3.5, 3.99, 4.5):
    print(f"T = {T}: m = {mean_field_magnetization(1.0, 1e-12, T, 4).m:.5f}")
print("beta, gamma, delta =", np.round(mean_field_exponents_fit(), 4))

# %% RG flow in d = 3
for fp in rg_fixed_points(3):
    print(f"{fp.name:10s} (r, u) = ({fp.r:+.4f}, {fp.u:.4f})  zero of flow r = {fp.r_stationary:+.4f}  "
          f"eigenvalues {np.round(fp.eigenvalues, 4)}")
traj = rg_flow(-0.19, 0.10, 3, 4.0, samples=5)
print(np.column_stack([traj.tau, traj.r, traj.u]))
