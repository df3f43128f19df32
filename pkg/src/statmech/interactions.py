"""
Cluster and virial expansions of weakly interacting gases.

Conventions: Z_N is the N-particle partition function without the Gibbs
factor, ln Zgrand = sum_n B_n z^n / n!, and B_n / n! = V lambda^(-3n) b_n, so
b_1 = 1 and b_n carries dimension volume^(n-1). The virial series is
P = T sum_l a_l (N/V)^l.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .ensembles import thermal_wavelength
from .errors import DomainError
from .numerics import DEFAULT_TOL, RandomStream, Tolerance, integrate


@dataclass(frozen=True)
class PairPotential:
    """
    Spherically symmetric pair potential.

    ``u(r)`` is only called for r > ``core``; inside the core the potential is
    taken as +inf. ``breaks`` lists radii where u jumps or has a kink, used as
    quadrature break points.
    """

    u: Callable[[float], float]
    core: float = 0.0
    breaks: Tuple[float, ...] = ()
    label: str = ""

    def mayer_f(self, r: float, T: float) -> float:
        if r < self.core:
            return -1.0
        return math.expm1(-self.u(r) / T)


def hard_sphere(R: float) -> PairPotential:
    """Spheres of radius R: the pair core is at separation 2R."""
    if R <= 0:
        raise DomainError("R must be positive")
    return PairPotential(lambda r: 0.0, 2 * R, (), "hard-sphere")


def square_well(sigma: float, depth: float, width: float = 1.5) -> PairPotential:
    """Hard core at sigma and u = -depth for sigma < r < width*sigma."""
    if sigma <= 0 or width <= 1:
        raise DomainError("need sigma > 0 and width > 1")
    edge = width * sigma
    return PairPotential(lambda r: -depth if r < edge else 0.0, sigma, (edge,), "square-well")


def lennard_jones(eps: float, sigma: float) -> PairPotential:
    """u = 4 eps [(sigma/r)^12 - (sigma/r)^6], no explicit core."""

    def u(r):
        if r == 0:
            return math.inf
        x = (sigma / r) ** 6
        return 4 * eps * (x * x - x)

    return PairPotential(u, 0.0, (sigma, 2 ** (1 / 6) * sigma), "lennard-jones")


POTENTIALS = {"hard-sphere": hard_sphere, "square-well": square_well, "lennard-jones": lennard_jones}


def sphere_volume(r: float, d: int = 3) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


def _radial_integral(g: Callable[[float], float], pot: PairPotential, tol: Tolerance) -> float:
    """int_core^inf g(r) 4 pi r^2 dr with the break points honoured."""
    w = lambda r: 4 * math.pi * r * r * g(r)
    edges = [pot.core] + sorted(b for b in pot.breaks if b > pot.core)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            total += integrate(w, a, b, tol)
    return total + integrate(w, edges[-1], np.inf, tol)


def mayer_b2(pot: PairPotential, T: float, tol: Tolerance = DEFAULT_TOL):
    """
    b2 = (1/2) int f(r) d^3r and a2 = -b2.

    The hard core (f = -1) contributes -V(core)/2 analytically; only the
    region outside it is integrated numerically.
    """
    if T <= 0:
        raise DomainError("T must be positive")
    core = -0.5 * sphere_volume(pot.core)
    tail = 0.5 * _radial_integral(lambda r: pot.mayer_f(r, T), pot, tol)
    b2 = core + tail
    return b2, -b2


def b2_monte_carlo(pot: PairPotential, T: float, L: float, n_samples: int = 200_000,
                   stream: Optional[RandomStream] = None):
    """
    b2 from the two-particle configuration integral in a periodic cube of side L.

    With periodic boundaries the minimum-image separation is uniform on the
    cube [-L/2, L/2]^3, so b2 = (L^3 / 2) <f(r)>. This equals the infinite-volume
    b2 only if f vanishes beyond L/2; otherwise the part of f outside the cube
    is missing (the finite-size correction). Returns (estimate, standard error).
    """
    rng = (stream or RandomStream(0)).generator()
    x = (rng.random((n_samples, 3)) - 0.5) * L
    r = np.sqrt(np.sum(x * x, axis=1))
    f = np.array([pot.mayer_f(ri, T) for ri in r])
    vol = L**3
    return 0.5 * vol * f.mean(), 0.5 * vol * f.std(ddof=1) / math.sqrt(n_samples)


def triangle_integral_monte_carlo(pot: PairPotential, T: float, r_cut: float, n_samples: int = 400_000,
                                  stream: Optional[RandomStream] = None):
    """
    int int f(|x|) f(|y|) f(|x-y|) d^3x d^3y by sampling x, y uniformly in a ball.

    ``r_cut`` must cover the range of f. Returns (estimate, standard error).
    """
    rng = (stream or RandomStream(0)).generator()

    def ball(n):
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        return v * (r_cut * rng.random(n) ** (1 / 3))[:, None]

    x, y = ball(n_samples), ball(n_samples)
    rx = np.linalg.norm(x, axis=1)
    ry = np.linalg.norm(y, axis=1)
    rxy = np.linalg.norm(x - y, axis=1)
    f = np.vectorize(lambda r: pot.mayer_f(r, T))
    vals = f(rx) * f(ry) * f(rxy)
    vol = sphere_volume(r_cut) ** 2
    return vol * vals.mean(), vol * vals.std(ddof=1) / math.sqrt(n_samples)


def mayer_b3(pot: PairPotential, T: float, triangle: Optional[Callable[[], float]] = None,
             r_cut: Optional[float] = None, n_samples: int = 400_000,
             stream: Optional[RandomStream] = None, tol: Tolerance = DEFAULT_TOL) -> float:
    """
    b3 = (1/3!) [3 (int f)^2 + int int f f f].

    The chain diagram (3 labellings) factorizes into b2; the triangle needs a
    user-supplied evaluator ``triangle()`` or falls back to Monte Carlo over a
    ball of radius ``r_cut``.
    """
    b2, _ = mayer_b2(pot, T, tol)
    if triangle is not None:
        tri = triangle()
    else:
        if r_cut is None:
            raise DomainError("r_cut is required for the Monte Carlo triangle integral")
        tri, _ = triangle_integral_monte_carlo(pot, T, r_cut, n_samples, stream)
    return (3 * (2 * b2) ** 2 + 1 * tri) / 6


def cumulants_from_moments(Z: Sequence) -> list:
    """B1 = Z1, B2 = Z2 - Z1^2, B3 = Z3 - 3 Z2 Z1 + 2 Z1^3 (works with Fractions)."""
    if not 1 <= len(Z) <= 3:
        raise DomainError("need 1 to 3 moments")
    out = [Z[0]]
    if len(Z) > 1:
        out.append(Z[1] - Z[0] ** 2)
    if len(Z) > 2:
        out.append(Z[2] - 3 * Z[1] * Z[0] + 2 * Z[0] ** 3)
    return out


def moments_from_cumulants(B: Sequence) -> list:
    """Z1 = B1, Z2 = B1^2 + B2, Z3 = B1^3 + 3 B1 B2 + B3."""
    if not 1 <= len(B) <= 3:
        raise DomainError("need 1 to 3 cumulants")
    out = [B[0]]
    if len(B) > 1:
        out.append(B[0] ** 2 + B[1])
    if len(B) > 2:
        out.append(B[0] ** 3 + 3 * B[0] * B[1] + B[2])
    return out


@dataclass(frozen=True)
class ClusterCoefficients:
    b: Tuple[float, ...]

    def __post_init__(self):
        if not self.b or abs(self.b[0] - 1) > 1e-12:
            raise DomainError("b_1 must equal 1")

    def B(self, V: float, lam: float) -> list:
        """Unscaled B_n = n! V lambda^(-3n) b_n."""
        return [math.factorial(n) * V * lam ** (-3 * n) * bn for n, bn in enumerate(self.b, start=1)]

    @classmethod
    def from_B(cls, B: Sequence[float], V: float, lam: float) -> "ClusterCoefficients":
        return cls(tuple(Bn * lam ** (3 * n) / (math.factorial(n) * V) for n, Bn in enumerate(B, start=1)))


def ideal_quantum_b(kind: str, lam: float, n_max: int = 3) -> ClusterCoefficients:
    """b_n = (+-1)^(n+1) n^(-5/2) lambda^(3(n-1)), upper sign for bosons."""
    sign = {"bose": 1.0, "fermi": -1.0}[kind.lower()]
    return ClusterCoefficients(tuple(sign ** (n + 1) * n**-2.5 * lam ** (3 * (n - 1))
                                     for n in range(1, n_max + 1)))


@dataclass(frozen=True)
class VirialSeries:
    a: Tuple[float, ...]

    def pressure(self, density, T: float):
        """P = T sum_l a_l n^l."""
        n = np.asarray(density, dtype=float)
        return T * sum(al * n**l for l, al in enumerate(self.a, start=1))


def virial_coefficients(coeffs: ClusterCoefficients) -> VirialSeries:
    """a1 = 1, a2 = -b2, a3 = 4 b2^2 - 2 b3 from eliminating the fugacity."""
    b = coeffs.b
    a = [1.0]
    if len(b) > 1:
        a.append(-b[1])
    if len(b) > 2:
        a.append(4 * b[1] ** 2 - 2 * b[2])
    return VirialSeries(tuple(a))


def vdw_constants(pot: PairPotential, tol: Tolerance = DEFAULT_TOL):
    """
    High-temperature identification a2 = b_bar - a_bar / T.

    b_bar = V(core)/2 and a_bar = -(1/2) int_{r > core} u(r) d^3r.
    """
    b_bar = 0.5 * sphere_volume(pot.core)
    a_bar = -0.5 * _radial_integral(pot.u, pot, tol)
    return a_bar, b_bar


def vdw_b_from_particle_volume(v_particle: float, d: int = 3) -> float:
    """b_bar = 2^(d-1) times the volume of one particle (equal to it only in 1D)."""
    return 2 ** (d - 1) * v_particle


def vdw_pressure(density, T: float, a_bar: float, b_bar: float):
    n = np.asarray(density, dtype=float)
    return n * T / (1 - n * b_bar) - a_bar * n * n


def z2_identical(kind: str, d: int, L_over_lambda: float) -> float:
    """Z2 = (Z1^2 +- 2^(-d/2) Z1)/2 with Z1 = (L/lambda)^d; + for bosons."""
    if L_over_lambda <= 0:
        raise DomainError("L/lambda must be positive")
    sign = {"bose": 1.0, "fermi": -1.0}[kind.lower()]
    Z1 = L_over_lambda**d
    return 0.5 * (Z1 * Z1 + sign * 2 ** (-d / 2) * Z1)


def z2_from_levels(kind: str, energies, beta: float) -> float:
    """Z2 = [Z1(beta)^2 +- Z1(2 beta)]/2 for a one-particle spectrum."""
    sign = {"bose": 1.0, "fermi": -1.0}[kind.lower()]
    e = np.asarray(energies, dtype=float)
    return 0.5 * (np.sum(np.exp(-beta * e)) ** 2 + sign * np.sum(np.exp(-2 * beta * e)))


def z2_interaction_shift(kind: str, T: float, m: float, V: float,
                         bound_states: Sequence[float] = (),
                         phase_shifts: Optional[Dict[int, Callable[[float], float]]] = None,
                         tol: Tolerance = DEFAULT_TOL) -> float:
    """
    Z2 - Z2^(0) = (2^(3/2) V / lambda^3) [sum_b e^(-E_b/T)
                  + (lambda^2 / pi^2) sum_l (2l+1) int k delta_l(k) e^(-k^2/(mT)) dk].

    lambda is the one-particle thermal wavelength for mass m. The prefactor
    counts centre-of-mass states of the pair (mass 2m); the relative motion has
    reduced mass m/2, hence the k^2/m kinetic energy. Only even l enter for
    bosons and odd l for fermions; other partial waves are rejected.
    """
    if T <= 0 or m <= 0 or V <= 0:
        raise DomainError("T, m and V must be positive")
    parity = {"bose": 0, "fermi": 1}[kind.lower()]
    lam = thermal_wavelength(m, T)
    total = sum(math.exp(-E / T) for E in bound_states)
    a = 1.0 / (m * T)
    for l, delta in (phase_shifts or {}).items():
        if l % 2 != parity:
            raise DomainError(f"partial wave l={l} is not allowed for {kind}")
        val = integrate(lambda k: k * delta(k) * math.exp(-a * k * k), 0.0, np.inf, tol)
        total += lam**2 / math.pi**2 * (2 * l + 1) * val
    return 2**1.5 * V / lam**3 * total
