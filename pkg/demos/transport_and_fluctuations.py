# %% Scattering transport and fluctuation theorems
# Run: python demos/transport_and_fluctuations.py

import math

import numpy as np

from statmech.noneq import Protocol, TwoBathModel, crooks_check, heat_conduction_ft, work_distribution
from statmech.numerics import RandomStream
from statmech.transport import ScatteringMatrix, landauer_conductance, pumped_charge, random_unitary

# %% multi-terminal conductances from a random 6-channel S matrix
sm = ScatteringMatrix(random_unitary(6, RandomStream(0)), {"A": [0, 1], "B": [2, 3, 4], "C": [5]})
for a, b in (("A", "B"), ("A", "C"), ("B", "C")):
    r = landauer_conductance(sm, a, b)
    print(f"G_{a}{b} = {r.G:.6f} e^2/h  (trace route {r.G_trace:.6f})")

# %% adiabatic pumping: one charge per turn of the transmission phase
pump = lambda X: np.array([[0, np.exp(-1j * X)], [np.exp(1j * X), 0]])
print("pumped charge", pumped_charge(pump, lambda t: 2 * math.pi * t, [0]).Q)

# %% work statistics of a driven spin, from sudden to slow
sx, sz = np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([1.0, -1.0])
HA, HB = 0.5 * sz, 1.3 * (math.cos(0.9) * sz + math.sin(0.9) * sx)
for tf in (0.0, 1.0, 20.0):
    p = Protocol.linear(HA, HB, tf)
    k = work_distribution(p, 0.7)
    cr = crooks_check(k, work_distribution(p.reversed(), 0.7))
    mean = float(np.sum(k.weights * k.W))
    print(f"t_f = {tf:5.1f}  <W> = {mean:.5f}  dF = {k.dF:.5f}  Crooks residual {cr.residual:.1e}")

# %% heat conduction between two baths through a two-level conductor
w = np.array([[0.0, 1.0], [1.0, 0.0]])
model = TwoBathModel.from_couplings([0.0, 1.0], w, 1.5, w, 1.0)
res = heat_conduction_ft(model, 20.0, 10_000, RandomStream(1))
print(f"ln P(Q)/P(-Q) slope {res.slope:.4f} +- {res.slope_error:.4f}, expected {res.affinity:.4f}")
print(f"K = {res.K:.4f}, nu/2T^2 = {res.K_fd:.4f}")
