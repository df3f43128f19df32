# %% Ideal quantum gases with a power-law density of states
# Run: python demos/quantum_gases.py

import numpy as np

from statmech.ensembles import PowerLawDos
from statmech.quantum_gases import bec_tc, blackbody, fermi_energy, invert_mu, sommerfeld

dos = PowerLawDos(c=1.0, alpha=1.5)  # 3D non-relativistic

# %% Bose gas through condensation at fixed density
Tc = bec_tc(dos, 1.0)
print(f"Tc = {Tc:.6f}")
for r in (0.25, 0.5, 0.75, 1.0, 1.5):
    st = invert_mu(dos, "bose", 1.0, r * Tc)
    print(f"T/Tc = {r:4.2f}  mu = {st.mu:+.5f}  N0/N = {st.condensate_fraction:.5f}  P = {st.P:.5f}")

# %% degenerate Fermi gas: exact mu against the low-temperature expansion
eF = fermi_energy(dos, 1.0)
for t in (0.02, 0.05, 0.1, 0.2):
    s = sommerfeld(dos, 1.0, t * eF)
    print(f"T/eF = {t:4.2f}  mu exact = {s.mu_exact:.8f}  expansion = {s.mu_expansion:.8f}")

# %% photon gas
bb = blackbody(1.0)
print(f"int nu^3/(e^nu - 1) = {bb.planck_integral:.6f}  (pi^4/15 = {np.pi**4 / 15:.6f})")
print(f"spectral peak at nu = {bb.peak_nu:.4f} T")
