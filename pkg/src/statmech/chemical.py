"""
Chemical equilibrium in the Boltzmann/Gibbs approximation.

A reaction sum_i nu_i X_i = 0 is parametrized by a reaction coordinate n so that
species i holds N_i + nu_i n particles. Equilibrium is the root of
sum_i nu_i mu_i = 0 with mu_i = eps_i + T ln(N_i / Z1_i).
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Union

import numpy as np
from scipy.special import gammaln

from .ensembles import thermal_wavelength
from .errors import DomainError, Infeasible
from .numerics import DEFAULT_TOL, Tolerance, find_root


@dataclass(frozen=True)
class Species:
    """
    One reacting species.

    ``Z1`` is the one-particle partition function without the binding energy,
    either a number or a callable ``Z1(T, V)``. ``mu_fixed`` marks a species
    whose chemical potential is pinned (a bath such as the radiation field).
    """

    name: str
    Z1: Union[float, Callable[[float, float], float]] = 1.0
    eps0: float = 0.0
    mu_fixed: Optional[float] = None

    def z1(self, T: float, V: float) -> float:
        val = self.Z1(T, V) if callable(self.Z1) else float(self.Z1)
        if not val > 0:
            raise DomainError(f"Z1 of {self.name} must be positive")
        return val

    def mu(self, N: float, T: float, V: float) -> float:
        if self.mu_fixed is not None:
            return self.mu_fixed
        return self.eps0 + T * math.log(N / self.z1(T, V))


def volume_species(name: str, m: float, eps0: float = 0.0, degeneracy: float = 1.0) -> Species:
    """Ideal-gas species with Z1 = g V / lambda_T^3."""
    return Species(name, lambda T, V: degeneracy * V / thermal_wavelength(m, T) ** 3, eps0)


@dataclass
class Reaction:
    species: Dict[str, Species]
    stoichiometry: Dict[str, int]
    counts: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        nus = list(self.stoichiometry.values())
        if not (any(v < 0 for v in nus) and any(v > 0 for v in nus)):
            raise DomainError("a reaction needs both negative and positive coefficients")
        for k in self.stoichiometry:
            if k not in self.species:
                raise DomainError(f"unknown species {k!r}")
            if self.counts.get(k, 0.0) < 0:
                raise DomainError("initial counts must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "Reaction":
        """
        Build from ``{species: [...], stoichiometry: {...}, counts: {...}}``.

        Each species entry has ``name`` and either ``Z1`` or ``mass`` (a volume
        phase), plus optional ``eps0``, ``degeneracy`` and ``mu_fixed``.
        """
        species = {}
        for s in data["species"]:
            unknown = set(s) - {"name", "Z1", "mass", "eps0", "degeneracy", "mu_fixed"}
            if unknown:
                raise DomainError(f"unknown species keys {sorted(unknown)}")
            if "mass" in s:
                sp = volume_species(s["name"], s["mass"], s.get("eps0", 0.0), s.get("degeneracy", 1.0))
                if "mu_fixed" in s:
                    sp = Species(sp.name, sp.Z1, sp.eps0, s["mu_fixed"])
            else:
                sp = Species(s["name"], s.get("Z1", 1.0), s.get("eps0", 0.0), s.get("mu_fixed"))
            species[sp.name] = sp
        return cls(species, {k: int(v) for k, v in data["stoichiometry"].items()},
                   {k: float(v) for k, v in data.get("counts", {}).items()})


@dataclass(frozen=True)
class Equilibrium:
    n_bar: float
    counts: Dict[str, float]
    n_int: int
    counts_int: Dict[str, int]
    ln_kappa: float  # ln of prod_i (Z1_i e^{-eps_i/T} / V)^{nu_i} over free species


def feasible_interval(reaction: Reaction):
    lo, hi = -math.inf, math.inf
    for k, nu in reaction.stoichiometry.items():
        if reaction.species[k].mu_fixed is not None:
            continue
        N = reaction.counts.get(k, 0.0)
        if nu > 0:
            lo = max(lo, -N / nu)
        elif nu < 0:
            hi = min(hi, N / -nu)
    return lo, hi


def equilibrium_coordinate(reaction: Reaction, T: float, V: float = 1.0,
                           tol: Tolerance = DEFAULT_TOL) -> Equilibrium:
    """
    Most probable reaction coordinate n_bar from sum_i nu_i mu_i = 0.

    The affinity is strictly increasing in n, so the root is unique inside the
    open interval where every free species count stays positive.

    Raises
    ------
    Infeasible
        If no n keeps all counts non-negative.
    """
    if T <= 0 or V <= 0:
        raise DomainError("T and V must be positive")
    lo, hi = feasible_interval(reaction)
    if not lo < hi:
        raise Infeasible(f"no reaction coordinate keeps all counts >= 0 (interval [{lo}, {hi}])")
    free = [(k, nu) for k, nu in reaction.stoichiometry.items() if reaction.species[k].mu_fixed is None]
    fixed = sum(nu * reaction.species[k].mu_fixed for k, nu in reaction.stoichiometry.items()
                if reaction.species[k].mu_fixed is not None)
    logz = {k: math.log(reaction.species[k].z1(T, V)) for k, _ in free}

    def affinity(n):
        s = fixed
        for k, nu in free:
            N = reaction.counts.get(k, 0.0) + nu * n
            if N <= 0:
                # rounding at the edge of the feasible interval
                return -1e300 if nu > 0 else 1e300
            s += nu * (reaction.species[k].eps0 + T * (math.log(N) - logz[k]))
        return s

    # pull the open endpoints inward; unbounded sides are expanded until the sign flips
    width = hi - lo if math.isfinite(hi - lo) else None
    if width is not None:
        a, b = lo + width * 1e-15, hi - width * 1e-15
        k = 15
        while affinity(a) > 0 and k < 300:
            k += 15
            a = lo + width * 10.0**-k
        k = 15
        while affinity(b) < 0 and k < 300:
            k += 15
            b = hi - width * 10.0**-k
    else:
        base = lo if math.isfinite(lo) else hi
        scale = max(abs(base), 1.0)
        if math.isfinite(lo):
            a, step = lo + scale * 1e-15, scale
            b = lo + step
            while affinity(b) < 0:
                step *= 2
                b = lo + step
        else:
            b, step = hi - scale * 1e-15, scale
            a = hi - step
            while affinity(a) > 0:
                step *= 2
                a = hi - step
    # the affinity is cheap, so solve to machine precision regardless of tol.rel
    root_tol = Tolerance(abs=1e-300, rel=1e-15, max_evals=tol.max_evals)
    n_bar = find_root(affinity, [a, b], root_tol)
    counts = {k: reaction.counts.get(k, 0.0) + nu * n_bar for k, nu in reaction.stoichiometry.items()}
    n_int = int(round(n_bar))
    n_int = min(max(n_int, math.ceil(lo) if math.isfinite(lo) else n_int),
                math.floor(hi) if math.isfinite(hi) else n_int)
    counts_int = {k: int(round(reaction.counts.get(k, 0.0))) + nu * n_int
                  for k, nu in reaction.stoichiometry.items()}
    ln_kappa = sum(nu * (logz[k] - reaction.species[k].eps0 / T - math.log(V)) for k, nu in free)
    return Equilibrium(n_bar, counts, n_int, counts_int, ln_kappa)


def two_phase_equilibrium(N: float, Z1a: float, Z1b: float) -> float:
    """n_bar = N Z1b / (Z1a + Z1b) for A[a] <-> A[b]."""
    return N * Z1b / (Z1a + Z1b)


def two_phase_distribution(N: int, Z1a: float, Z1b: float) -> np.ndarray:
    """Exact p(n) proportional to Z^a_(N-n) Z^b_n with Z_k = Z1^k / k!."""
    n = np.arange(N + 1)
    logw = (gammaln(N + 1) - gammaln(N - n + 1) - gammaln(n + 1)
            + (N - n) * math.log(Z1a) + n * math.log(Z1b))
    w = np.exp(logw - logw.max())
    return w / w.sum()


@dataclass(frozen=True)
class PairCreation:
    product: float
    each: float


def pair_creation_density(m: float, T: float, V: float, c_light: float = 1.0) -> PairCreation:
    """n1 n2 = (V/lambda_T^3)^2 exp(-2 m c^2 / T) for photon-driven pair creation."""
    if T <= 0:
        raise DomainError("T must be positive")
    x = 2 * m * c_light**2 / T
    if x > 1400:
        return PairCreation(0.0, 0.0)
    prod = (V / thermal_wavelength(m, T) ** 3) ** 2 * math.exp(-x)
    return PairCreation(prod, math.sqrt(prod))


def pair_creation_reaction(m: float, c_light: float = 1.0) -> Reaction:
    """gamma + gamma <-> e+ + e- with the radiation field pinned at mu = 0."""
    rest = m * c_light**2
    return Reaction(
        {"gamma": Species("gamma", 1.0, 0.0, mu_fixed=0.0),
         "e+": volume_species("e+", m, rest),
         "e-": volume_species("e-", m, rest)},
        {"gamma": -2, "e+": 1, "e-": 1},
        {"e+": 0.0, "e-": 0.0},
    )


SITE_KINDS = ("fermi", "bose", "boltzmann")


def site_occupation(kind: str, M: float, eps: float, mu: float, T: float) -> float:
    """Most probable occupation of M equal sites of binding energy eps at given mu."""
    kind = kind.lower()
    x = (eps - mu) / T
    if kind == "fermi":
        return M / (math.exp(x) + 1) if x < 700 else 0.0
    if kind == "bose":
        if x <= 0:
            raise DomainError("Bose site needs eps > mu, otherwise the occupation diverges")
        return (M - 1) / math.expm1(x)
    if kind == "boltzmann":
        return M * math.exp(-x)
    raise DomainError(f"unknown site kind {kind!r}")


def site_mu(kind: str, M: float, n: float, eps: float, T: float) -> float:
    """Chemical potential of n particles on M sites (large-n Stirling form)."""
    kind = kind.lower()
    if n <= 0:
        raise DomainError("n must be positive")
    if kind == "fermi":
        if not n < M:
            raise DomainError("Fermi sites need n < M")
        return eps + T * math.log(n / (M - n))
    if kind == "bose":
        return eps + T * math.log(n / (M - 1 + n))
    if kind == "boltzmann":
        return eps + T * math.log(n / M)
    raise DomainError(f"unknown site kind {kind!r}")
