"""
Ideal quantum gases with a power-law density of states.

Densities follow from the integrals F_a(z) = int_0^inf x^(a-1)/(e^x/z -+ 1) dx,
which equal +-Gamma(a) Li_a(+-z). Also provided: chemical-potential inversion
with Bose condensation, the low-temperature Fermi expansion, blackbody
radiation and kinetic wall flux.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma, zeta

from .ensembles import PowerLawDos
from .errors import DomainError, NoBracket, NoCondensation, NonConvergence
from .numerics import DEFAULT_TOL, Tolerance, find_root, integrate

KINDS = ("bose", "fermi", "boltzmann")

# Robinson series in mu = ln z converges for |mu| < 2 pi; beyond |mu| ~ 3.5 the
# zeta(s - k) coefficients overflow before the terms are small enough
_ROBINSON_RADIUS = 3.5
_SERIES_MAX_Z = 0.5


def _kind(kind: str) -> str:
    k = kind.lower()
    if k not in KINDS:
        raise DomainError(f"unknown gas kind {kind!r}")
    return k


def _direct_series(s: float, z: float) -> float:
    k = np.arange(1, 90, dtype=float)
    return float(np.sum(z**k / k**s))


def _robinson(s: float, mu: complex) -> complex:
    """Li_s(e^mu) as a power series in mu, valid for |mu| < 2 pi (mu off the cut)."""
    n = round(s)
    # for positive integer s the Gamma(1-s) pole cancels against zeta(1)
    integer = abs(s - n) == 0 and n >= 1
    if integer:
        n = int(n)
        harmonic = sum(1.0 / j for j in range(1, n))
        head = mu ** (n - 1) / math.factorial(n - 1) * (harmonic - np.log(-mu + 0j))
    else:
        head = gamma(1 - s) * (-mu + 0j) ** (s - 1)
    total = 0j
    term_mu = 1.0 + 0j
    small = 0
    for k in range(0, 200):
        if k > 0:
            term_mu = term_mu * mu / k
        if integer and k == n - 1:
            continue
        t = zeta(s - k) * term_mu
        total += t
        # zeta vanishes at negative even integers, so require a run of small terms
        small = small + 1 if abs(t) < 1e-17 * max(abs(total), 1e-300) else 0
        if small >= 3:
            break
    return head + total


def _fd_quadrature(s: float, x: float, tol: Tolerance) -> float:
    """
    -Li_s(-e^x) = 1/Gamma(s+1) int_0^inf du / (exp(u^(1/s) - x) + 1), s > 0.

    The substitution t = u^(1/s) removes the t^(s-1) weight.
    """
    p = 1.0 / s

    def occupied(a):
        # 1/(e^a + 1) without overflow
        if a > 0:
            e = math.exp(-a) if a < 745 else 0.0
            return e / (1 + e)
        return 1.0 / (math.exp(a) + 1)

    brk = max(x, 0.0) ** s
    tight = Tolerance(abs=1e-14 * max(brk, 1.0), rel=max(tol.rel * 1e-2, 1e-13), max_evals=tol.max_evals)
    # occupation factors below e^-60 are dropped, which keeps both ranges finite
    top = (max(x, 0.0) + 60.0) ** s
    tail = integrate(lambda u: occupied(u**p - x), brk, top, tight)
    if brk == 0:
        return tail / gamma(s + 1)
    # below the step write f = 1 - hole occupation so only small pieces are integrated
    bottom = max(x - 60.0, 0.0) ** s
    holes = integrate(lambda u: occupied(x - u**p), bottom, brk, tight)
    return (brk - holes + tail) / gamma(s + 1)


def _bose_quadrature(s: float, z: float, tol: Tolerance) -> float:
    """Li_s(z) = 1/Gamma(s+1) int_0^inf du / (exp(u^(1/s))/z - 1), s > 0, 0 < z < 1."""
    p = 1.0 / s
    lz = math.log(z)

    def f(u):
        a = u**p - lz
        return 1.0 / math.expm1(a) if a < 700 else 0.0

    tight = Tolerance(abs=1e-300, rel=max(tol.rel * 1e-2, 1e-13), max_evals=tol.max_evals)
    return (integrate(f, 0.0, 1.0, tight) + integrate(f, 1.0, np.inf, tight)) / gamma(s + 1)


def fermi_dirac(s: float, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """
    Complete Fermi-Dirac function -Li_s(-e^x) for real x.

    Direct series for e^x <= 1/2, the Robinson expansion at mu = x + i pi for
    moderate x, and quadrature for large x.
    """
    if x <= math.log(_SERIES_MAX_Z):
        return -_direct_series(s, -math.exp(x))
    # near-integer s: the Gamma(1-s) and zeta(s-k) poles cancel catastrophically
    if 0 < abs(s - round(s)) < 1e-3 and s > 0:
        return _fd_quadrature(s, x, tol)
    if abs(complex(x, math.pi)) < _ROBINSON_RADIUS:
        return float(-_robinson(s, complex(x, math.pi)).real)
    if s == 0:
        return 1.0 / (1.0 + math.exp(-x))
    if s < 0:
        raise DomainError("Fermi branch for s < 0 is only available for x < 1.5")
    return _fd_quadrature(s, x, tol)


def bose_einstein(s: float, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """
    Complete Bose-Einstein function Li_s(e^x) for x <= 0.

    Taking ln z directly keeps full relative precision in x close to
    condensation, where z = e^x rounds to 1.
    """
    if x > 0:
        raise DomainError(f"Bose branch needs x = ln z <= 0, got {x}")
    if x == 0:
        return float(zeta(s)) if s > 1 else math.inf
    if x <= math.log(_SERIES_MAX_Z):
        return _direct_series(s, math.exp(x))
    if 0 < abs(s - round(s)) < 1e-3 and s > 0:
        return _bose_quadrature(s, math.exp(x), tol)
    return float(_robinson(s, complex(x, 0.0)).real)


def polylog(s: float, z: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """
    Polylogarithm Li_s(z) = sum_k z^k / k^s for real z <= 1.

    Negative z is the Fermi branch and is routed through ``fermi_dirac``.

    Raises
    ------
    DomainError
        For z > 1, where the Bose occupation is unphysical.
    """
    z = float(z)
    if z > 1:
        raise DomainError(f"polylog requires z <= 1 on the real axis, got {z}")
    if z == 0:
        return 0.0
    if z < 0:
        return -fermi_dirac(s, math.log(-z), tol)
    if z <= _SERIES_MAX_Z:
        return _direct_series(s, z)
    return bose_einstein(s, math.log(z), tol)


def f_integral(alpha: float, z: float, kind: str, tol: Tolerance = DEFAULT_TOL,
               check: bool = False) -> float:
    """
    F_alpha(z) = int_0^inf x^(alpha-1) / (e^x / z -+ 1) dx.

    Closed form +-Gamma(alpha) Li_alpha(+-z); the Boltzmann kind gives
    Gamma(alpha) z. With ``check=True`` the integral is also evaluated by
    direct quadrature and a NonConvergence is raised if the routes differ by
    more than 1e-8 relative.
    """
    kind = _kind(kind)
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if z < 0:
        raise DomainError("fugacity must be non-negative")
    if z == 0:
        return 0.0
    if kind == "boltzmann":
        return gamma(alpha) * z
    if kind == "bose":
        closed = gamma(alpha) * polylog(alpha, z, tol)
    else:
        closed = gamma(alpha) * fermi_dirac(alpha, math.log(z), tol)
    if check:
        quad = f_integral_quadrature(alpha, z, kind, tol)
        if not abs(quad - closed) <= 1e-8 * abs(closed):
            raise NonConvergence(f"closed form {closed} and quadrature {quad} disagree", partial=closed)
    return float(closed)


def f_integral_quadrature(alpha: float, z: float, kind: str, tol: Tolerance = DEFAULT_TOL) -> float:
    """Direct quadrature of F_alpha(z) in the original variable x."""
    kind = _kind(kind)
    sign = {"bose": -1.0, "fermi": 1.0, "boltzmann": 0.0}[kind]
    lz = math.log(z)

    def f(x):
        if x == 0:
            return 0.0 if alpha > 1 else (math.inf if alpha < 1 else 1.0 / (1.0 / z + sign))
        a = x - lz
        if a > 700:
            return 0.0
        return x ** (alpha - 1) / (math.exp(a) + sign)

    tight = Tolerance(abs=1e-300, rel=1e-12, max_evals=tol.max_evals)
    split = max(lz, 1.0)
    return integrate(f, 0.0, split, tight) + integrate(f, split, np.inf, tight)


@dataclass(frozen=True)
class GasState:
    n: float
    e: float
    P: float
    mu: float
    z: float
    T: float
    condensate_fraction: float = 0.0


def state_equations(dos: PowerLawDos, T: float, mu: float, kind: str,
                    condensate_density: float = 0.0, tol: Tolerance = DEFAULT_TOL) -> GasState:
    """
    Grand-canonical densities n = c T^a F_a(z), e = c T^(a+1) F_(a+1)(z), P = e/a.

    ``condensate_density`` is only allowed for bosons at mu = 0 and is added to
    n as a separate ground-state term.
    """
    kind = _kind(kind)
    if T <= 0:
        raise DomainError("T must be positive")
    if kind == "bose" and mu > 0:
        raise DomainError("Bose gas needs mu <= 0")
    if condensate_density and (kind != "bose" or mu != 0):
        raise DomainError("condensate only exists for bosons at mu = 0")
    a, c = dos.alpha, dos.c
    x = mu / T
    z = math.exp(x) if x < 700 else math.inf
    if kind == "fermi":
        Fa = gamma(a) * fermi_dirac(a, x, tol)
        Fa1 = gamma(a + 1) * fermi_dirac(a + 1, x, tol)
    elif kind == "bose":
        Fa = gamma(a) * bose_einstein(a, x, tol)
        Fa1 = gamma(a + 1) * bose_einstein(a + 1, x, tol)
    else:
        Fa = f_integral(a, z, kind, tol)
        Fa1 = f_integral(a + 1, z, kind, tol)
    n_thermal = c * T**a * Fa
    e = c * T ** (a + 1) * Fa1
    n = n_thermal + condensate_density
    frac = condensate_density / n if n > 0 else 0.0
    return GasState(n=n, e=e, P=e / a, mu=mu, z=z, T=T, condensate_fraction=frac)


def bec_tc(dos: PowerLawDos, n: float) -> float:
    """Condensation temperature (n / (c Gamma(a) zeta(a)))^(1/a)."""
    if dos.alpha <= 1:
        raise NoCondensation("no condensation: thermal density diverges at mu -> 0 for alpha <= 1")
    if n <= 0:
        raise DomainError("density must be positive")
    return (n / (dos.c * gamma(dos.alpha) * zeta(dos.alpha))) ** (1 / dos.alpha)


def fermi_energy(dos: PowerLawDos, n: float) -> float:
    return (dos.alpha * n / dos.c) ** (1 / dos.alpha)


def invert_mu(dos: PowerLawDos, kind: str, n: float, T: float, tol: Tolerance = DEFAULT_TOL) -> GasState:
    """
    Chemical potential that gives thermal density n at temperature T.

    For bosons with alpha > 1 and n above the saturation density the result is
    the condensed branch: mu = 0 and condensate_fraction = 1 - (T/Tc)^alpha.
    """
    kind = _kind(kind)
    if n <= 0 or T <= 0:
        raise DomainError("n and T must be positive")
    a, c = dos.alpha, dos.c
    scale = c * T**a
    if kind == "boltzmann":
        mu = T * math.log(n / (scale * gamma(a)))
        return state_equations(dos, T, mu, kind, tol=tol)
    if kind == "bose" and a > 1:
        n_sat = scale * gamma(a) * zeta(a)
        if n >= n_sat:
            return state_equations(dos, T, 0.0, kind, condensate_density=n - n_sat, tol=tol)
    target = n / scale

    if kind == "bose":
        def g(x):
            return gamma(a) * bose_einstein(a, x, tol) - target
        hi = -1e-300
        if not g(hi) > 0:
            raise NoBracket("target density above the saturation density")
        if g(-1e-12) > 0:
            hi = -1e-12
        lo = min(math.log(target / gamma(a)), -1.0)
        while g(lo) > 0:
            lo *= 2
    else:
        def g(x):
            return gamma(a) * fermi_dirac(a, x, tol) - target
        lo = min(math.log(target / gamma(a)), -1.0)
        while g(lo) > 0:
            lo = lo * 2 - 1
        hi = max((a * target) ** (1 / a), 1.0)
        while g(hi) < 0:
            hi = hi * 2 + 1
    root_tol = Tolerance(abs=1e-300, rel=1e-15, max_evals=tol.max_evals)
    x = find_root(g, [lo, hi], root_tol)
    return state_equations(dos, T, x * T, kind, tol=tol)


def power_law_dos_3d(m: float, spin_degeneracy: int = 1) -> PowerLawDos:
    """Non-relativistic particles in 3D: g(e) = g_s V m^(3/2) e^(1/2) / (sqrt(2) pi^2)."""
    return PowerLawDos(c=spin_degeneracy * m**1.5 / (math.sqrt(2) * math.pi**2), alpha=1.5)


@dataclass(frozen=True)
class SommerfeldResult:
    eps_F: float
    mu_expansion: float
    E_expansion: float  # energy per volume
    P_expansion: float
    mu_exact: float
    E_exact: float
    P_exact: float
    valid: bool  # T/eps_F < 0.3


def sommerfeld(dos: PowerLawDos, n: float, T: float, tol: Tolerance = DEFAULT_TOL) -> SommerfeldResult:
    """
    Second-order low-temperature expansion of a Fermi gas at fixed density.

    mu = eps_F [1 - (a-1)(pi^2/6)(T/eps_F)^2] and
    E/V = c eps_F^(a+1)/(a+1) [1 + (a+1)(pi^2/6)(T/eps_F)^2], compared with the
    exact values from numerical inversion of n(mu).
    """
    a = dos.alpha
    eF = fermi_energy(dos, n)
    t = T / eF
    mu_exp = eF * (1 - (a - 1) * math.pi**2 / 6 * t * t)
    e_exp = dos.c * eF ** (a + 1) / (a + 1) * (1 + (a + 1) * math.pi**2 / 6 * t * t)
    if T == 0:
        mu_ex, e_ex = eF, dos.c * eF ** (a + 1) / (a + 1)
    else:
        st = invert_mu(dos, "fermi", n, T, tol)
        mu_ex, e_ex = st.mu, st.e
    return SommerfeldResult(eF, mu_exp, e_exp, e_exp / a, mu_ex, e_ex, e_ex / a, t < 0.3)


def sommerfeld_general(g: Callable[[float], float], dg: Callable[[float], float], eps_F: float,
                       T: float) -> float:
    """mu(T) = eps_F - (pi^2/6) (g'/g) T^2 for an arbitrary smooth density of states."""
    return eps_F - math.pi**2 / 6 * dg(eps_F) / g(eps_F) * T * T


def planck_peak() -> float:
    """Maximum of x^3/(e^x-1): root of 3(1 - e^-x) = x."""
    return find_root(lambda x: 3 * (-math.expm1(-x)) - x, [1.0, 5.0])


def _planck_moment(p: int, tol: Tolerance) -> float:
    def f(x):
        if x == 0:
            return 0.0
        return x**p * math.exp(-x) / -math.expm1(-x) if x < 700 else 0.0
    return integrate(f, 0.0, np.inf, tol)


@dataclass(frozen=True)
class Blackbody:
    T: float
    spectral_flux: Callable[[float], float]
    planck_integral: float  # int_0^inf x^3/(e^x-1) dx
    sigma_eff: float
    total_flux: float
    peak_nu: float
    photon_density: float
    energy_density: float
    pressure: float


def blackbody(T: float, absorption: Optional[Callable[[float], float]] = None, c_light: float = 1.0,
              tol: Tolerance = DEFAULT_TOL) -> Blackbody:
    """
    Thermal radiation from a body of absorption coefficient a(w) (default 1).

    J(w) = a(w)/(4 pi^2 c^2) w^3/(e^(w/T) - 1). The total flux is
    sigma_eff T^4, with sigma_eff obtained by quadrature; for a = 1 it equals
    (pi^4/15)/(4 pi^2 c^2).
    """
    if T <= 0:
        raise DomainError("T must be positive")
    a = absorption if absorption is not None else (lambda w: 1.0)

    def J(w):
        x = w / T
        if x <= 0:
            return 0.0
        return a(w) / (4 * math.pi**2 * c_light**2) * w**3 * math.exp(-x) / -math.expm1(-x)

    I3 = _planck_moment(3, tol)
    if absorption is None:
        total = T**4 * I3 / (4 * math.pi**2 * c_light**2)
    else:
        total = integrate(lambda x: J(x * T), 0.0, np.inf, tol) * T
    I2 = _planck_moment(2, tol)
    # two polarizations
    energy = T**4 * I3 / (math.pi**2 * c_light**3)
    photons = T**3 * I2 / (math.pi**2 * c_light**3)
    return Blackbody(T, J, I3, total / T**4, total, planck_peak(), photons, energy, energy / 3)


def incident_flux(n: float, v: float, m: float = 1.0):
    """Wall flux J = n v/4 and pressure P = n m v^2/3 for a monospeed isotropic gas."""
    if n < 0 or v < 0:
        raise DomainError("n and v must be non-negative")
    return n * v / 4, n * m * v * v / 3


def incident_flux_distribution(n: float, speed_pdf: Callable[[float], float], m: float = 1.0,
                               tol: Tolerance = DEFAULT_TOL):
    """Wall flux and pressure for an isotropic gas with normalized speed distribution F(v)."""
    mean_v = integrate(lambda v: speed_pdf(v) * v, 0.0, np.inf, tol)
    mean_v2 = integrate(lambda v: speed_pdf(v) * v * v, 0.0, np.inf, tol)
    return n * mean_v / 4, n * m * mean_v2 / 3


def maxwell_speed_pdf(m: float, T: float) -> Callable[[float], float]:
    k = m / (2 * T)
    norm = 4 * math.pi * (m / (2 * math.pi * T)) ** 1.5
    return lambda v: norm * v * v * math.exp(-k * v * v)
