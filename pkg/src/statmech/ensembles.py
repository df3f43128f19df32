"""
Canonical-ensemble engine.

Partition functions of discrete spectra, thermodynamic observables from
analytic weighted sums, the standard solvable systems (two-level, oscillator,
spin), occupation statistics, the Debye-type heat capacity, equipartition and
generalized forces. Units are hbar = k_B = 1, so temperatures are energies.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError, EmptyInput, OverflowGuard, StepError
from .numerics import DEFAULT_TOL, RandomStream, Tolerance, integrate


@dataclass(frozen=True)
class LevelSpectrum:
    energies: np.ndarray
    degeneracies: np.ndarray
    label: str = ""

    def __init__(self, energies, degeneracies=None, label: str = ""):
        E = np.atleast_1d(np.asarray(energies, dtype=float))
        g = np.ones_like(E) if degeneracies is None else np.atleast_1d(np.asarray(degeneracies, dtype=float))
        if E.size == 0:
            raise EmptyInput("spectrum has no levels")
        if E.shape != g.shape:
            raise DomainError("energies and degeneracies differ in length")
        if not np.all(np.isfinite(E)):
            raise DomainError("energies must be finite")
        if np.any(g < 1):
            raise DomainError("degeneracies must be >= 1")
        object.__setattr__(self, "energies", E)
        object.__setattr__(self, "degeneracies", g)
        object.__setattr__(self, "label", label)

    @classmethod
    def from_csv(cls, path) -> "LevelSpectrum":
        """Read a file with header ``energy,degeneracy``."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(rows[0]) != {"energy", "degeneracy"}:
            raise DomainError("spectrum CSV needs the header 'energy,degeneracy'")
        return cls([float(r["energy"]) for r in rows], [float(r["degeneracy"]) for r in rows])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["energy", "degeneracy"])
            for e, g in zip(self.energies, self.degeneracies):
                w.writerow([repr(float(e)), repr(float(g))])


@dataclass(frozen=True)
class PowerLawDos:
    """Density of one-particle states g(e) = c V e**(alpha-1) for e >= 0."""

    c: float
    alpha: float
    V: float = 1.0

    def __post_init__(self):
        if self.c <= 0 or self.V <= 0 or self.alpha <= 0:
            raise DomainError("PowerLawDos needs c > 0, V > 0, alpha > 0")

    def density(self, e):
        e = np.asarray(e, dtype=float)
        return np.where(e >= 0, self.c * self.V * np.abs(e) ** (self.alpha - 1), 0.0)

    def counting(self, e):
        """Number of states below e, i.e. e g(e)/alpha."""
        e = np.asarray(e, dtype=float)
        return np.where(e >= 0, self.c * self.V * np.abs(e) ** self.alpha / self.alpha, 0.0)


@dataclass(frozen=True)
class ThermoPoint:
    beta: float
    X: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError("beta must be positive")

    @property
    def T(self) -> float:
        return 1.0 / self.beta


@dataclass(frozen=True)
class ThermoObservables:
    lnZ: float
    F: float
    E: float
    S: float
    C: float
    VarE: float


def _observables(lnZ, E, VarE, beta) -> ThermoObservables:
    T = 1.0 / beta
    S = beta * E + lnZ
    return ThermoObservables(lnZ=lnZ, F=E - T * S, E=E, S=S, C=beta**2 * VarE, VarE=VarE)


def boltzmann_weights(spec: LevelSpectrum, pt: ThermoPoint) -> np.ndarray:
    """Occupation probabilities of each listed level (degeneracy included)."""
    x = -pt.beta * (spec.energies - spec.energies.min()) + np.log(spec.degeneracies)
    return np.exp(x - logsumexp(x))


def partition(spec: LevelSpectrum, pt: ThermoPoint, tol: Tolerance = DEFAULT_TOL) -> ThermoObservables:
    """
    Canonical observables of a discrete spectrum.

    The ground energy is factored out before exponentiation, and E, C are
    evaluated as weighted moments over the level probabilities.

    Raises
    ------
    OverflowGuard
        If the spectrum is so wide that the highest levels underflow while the
        probability they would carry at the given beta is not negligible.
    """
    E0 = spec.energies.min()
    shifted = spec.energies - E0
    span = pt.beta * shifted.max()
    x = -pt.beta * shifted + np.log(spec.degeneracies)
    lnz_shift = logsumexp(x)
    p = np.exp(x - lnz_shift)
    if span > 700 and p[np.argmax(shifted)] == 0 and np.sum(p[x > -745]) < 1 - tol.rel:
        raise OverflowGuard("spectrum tail underflows beyond tolerance")
    lnZ = lnz_shift - pt.beta * E0
    E = float(np.dot(p, spec.energies))
    d = spec.energies - E
    VarE = float(np.dot(p, d * d))
    return _observables(float(lnZ), E, VarE, pt.beta)


def two_level_spectrum(eps: float) -> LevelSpectrum:
    return LevelSpectrum([-eps / 2, eps / 2])


def two_spin_spectrum(eps: float) -> LevelSpectrum:
    """Singlet at -3 eps and a threefold triplet at +eps."""
    return LevelSpectrum([-3 * eps, eps], [1, 3])


def oscillator_observables(omega: float, pt: ThermoPoint) -> ThermoObservables:
    """Quantum harmonic oscillator, Z = 1/(2 sinh(beta omega/2))."""
    if omega <= 0:
        raise DomainError("omega must be positive")
    x = pt.beta * omega
    lnZ = -(x / 2 + math.log(-math.expm1(-x)))
    n = 1.0 / math.expm1(x) if x < 700 else 0.0
    E = omega * (0.5 + n)
    VarE = omega**2 * n * (1 + n)
    return _observables(lnZ, E, VarE, pt.beta)


def spin_observables(omega: float, pt: ThermoPoint) -> ThermoObservables:
    """Two states at 0 and omega, Z = 1 + exp(-beta omega)."""
    if omega <= 0:
        raise DomainError("omega must be positive")
    x = pt.beta * omega
    lnZ = math.log1p(math.exp(-x))
    f = 1.0 / (math.exp(x) + 1) if x < 700 else 0.0
    return _observables(lnZ, omega * f, omega**2 * f * (1 - f), pt.beta)


def heat_capacity_closed_form(omega: float, T: float, kind: str) -> float:
    """C(T) = e^{w/T}/(e^{w/T} -+ 1)^2 (w/T)^2; 'oscillator' takes -, 'spin' takes +."""
    x = omega / T
    if x > 700:
        return 0.0
    sign = {"oscillator": -1.0, "spin": 1.0}[kind]
    ex = math.exp(-x)
    return ex / (1 + sign * ex) ** 2 * x * x


def occupation_stats(kind: str, x: float):
    """
    Mean, variance and g2 of a single mode's occupation at x = beta*omega.

    Returns
    -------
    tuple
        (<n>, Var n, g2) with Var = (1 + <n>)<n> for bosons and (1 - <n>)<n>
        for fermions, and g2 = (<n^2> - <n>)/<n>^2.
    """
    kind = kind.lower()
    if kind == "bose":
        if x <= 0:
            raise DomainError("Bose occupation needs x > 0")
        n = 1.0 / math.expm1(x) if x < 700 else 0.0
        var = n * (1 + n)
        g2 = 2.0
    elif kind == "fermi":
        n = 1.0 / (math.exp(x) + 1) if x < 700 else 0.0
        var = n * (1 - n)
        g2 = 0.0
    else:
        raise DomainError(f"unknown kind {kind!r}")
    return n, var, g2


def debye_heat_capacity(alpha: float, wc: float, T: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """
    Heat capacity T**alpha * F(wc/T) with F(v) = int_0^v e^x x^(1+alpha)/(e^x-1)^2 dx.

    The normalisation is per unit mode constant, so the classical plateau is
    wc**alpha / alpha.
    """
    if alpha <= 0 or wc <= 0 or T <= 0:
        raise DomainError("alpha, wc and T must be positive")
    nu = wc / T

    def f(x):
        if x == 0:
            return 0.0 if alpha > 1 else (1.0 if alpha == 1 else math.inf)
        em = -math.expm1(-x)
        return math.exp(-x) * x ** (1 + alpha) / (em * em)

    upper = min(nu, 800.0)
    return T**alpha * integrate(f, 0.0, upper, tol)


def classical_quadratic_energy(n_dof: int, T: float) -> float:
    if n_dof < 0:
        raise DomainError("n_dof must be >= 0")
    return 0.5 * n_dof * T


def generalized_equipartition_check(
    grad_H: Callable[[np.ndarray], np.ndarray],
    H: Callable[[np.ndarray], float],
    x0: Sequence[float],
    T: float,
    n_samples: int = 20_000,
    step: float = 0.5,
    stream: Optional[RandomStream] = None,
    burn_in: int = 2_000,
) -> float:
    """
    Max residual of <q_i dH/dq_j> - T delta_ij from Metropolis sampling of exp(-H/T).

    ``H`` and ``grad_H`` act on the full phase-space vector.
    """
    rng = (stream or RandomStream(0)).generator()
    x = np.array(x0, dtype=float)
    n = len(x)
    e = H(x)
    acc = np.zeros((n, n))
    kept = 0
    for it in range(burn_in + n_samples):
        prop = x + step * rng.standard_normal(n)
        ep = H(prop)
        if ep <= e or rng.random() < math.exp(-(ep - e) / T):
            x, e = prop, ep
        if it >= burn_in:
            acc += np.outer(x, grad_H(x))
            kept += 1
    return float(np.max(np.abs(acc / kept - T * np.eye(n))))


def richardson_derivative(f: Callable[[float], float], x: float, h: float, levels: int = 4):
    """
    Central difference derivative refined by Richardson extrapolation.

    Returns (estimate, error estimate).
    """
    table = []
    for k in range(levels):
        hk = h / 2**k
        row = [(f(x + hk) - f(x - hk)) / (2 * hk)]
        for j in range(1, k + 1):
            row.append(row[j - 1] + (row[j - 1] - table[k - 1][j - 1]) / (4**j - 1))
        table.append(row)
    best = table[-1][-1]
    err = abs(best - table[-2][-2]) if levels > 1 else math.inf
    return best, err


def generalized_force(lnZ_of_X: Callable[[float], float], pt: ThermoPoint, X: float,
                      h: Optional[float] = None, rtol: float = 1e-6) -> float:
    """
    y = T d lnZ / dX at fixed temperature.

    Raises
    ------
    StepError
        If the Richardson error estimate is larger than ``rtol`` relative to the
        result (finite-difference noise dominates).
    """
    h = h if h is not None else 1e-2 * max(abs(X), 1.0)
    d, err = richardson_derivative(lnZ_of_X, X, h)
    scale = max(abs(d), abs(lnZ_of_X(X)) / max(abs(X), 1.0) * 1e-8, 1e-300)
    if not np.isfinite(d) or err > rtol * scale and err > 1e-10:
        raise StepError(f"finite-difference noise dominates (estimate {d}, error {err})")
    return d / pt.beta


def thermal_wavelength(m: float, T: float) -> float:
    return math.sqrt(2 * math.pi / (m * T))


def ideal_gas_lnZ(N: int, V: float, T: float, m: float = 1.0, d: int = 3) -> float:
    """ln of (V/lambda^d)^N / N!."""
    return N * math.log(V / thermal_wavelength(m, T) ** d) - float(gammaln(N + 1))


def polymer_lnZ(X: float, L0: float) -> float:
    """Gaussian end-to-end statistics of a long freely jointed chain."""
    return -0.5 * (X / L0) ** 2
