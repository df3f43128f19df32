"""
Fluctuations and linear response of finite quantum systems.

Spectral functions are built from exact diagonalization, with each delta
function replaced by a normalized Gaussian of width sigma. Conventions
(hbar = 1):

    S(omega) = sum_n p_n sum_m A_nm B_mn 2 pi delta(omega - (E_m - E_n))
    C(omega) = (S(omega) + S(-omega)) / 2
    K(omega) = i (S(omega) - S(-omega))

For a Gaussian kernel and canonical weights the broadened spectrum obeys
S(-omega) = e^{-beta omega} e^{beta^2 sigma^2 / 2} S(omega - beta sigma^2)
exactly, which is what the residual bounds below are built on.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegeneracyError, DomainError, GridError
from .numerics import integrate

SQRT_2PI = math.sqrt(2 * math.pi)


# ---------------------------------------------------------------- preparation

@dataclass(frozen=True)
class PreparedSystem:
    """
    Diagonalized Hamiltonian with occupations p_n and broadening sigma.

    Use the ``canonical``, ``microcanonical`` or ``custom`` constructors.
    ``T`` is set only for canonical preparations.
    """

    H: np.ndarray
    energies: np.ndarray
    basis: np.ndarray
    p: np.ndarray
    sigma: float
    T: Optional[float] = None

    @property
    def mean_spacing(self) -> float:
        E = self.energies
        return float((E[-1] - E[0]) / max(len(E) - 1, 1))

    @property
    def valid(self) -> bool:
        """Broadening at least 3 mean level spacings, so spectra are smooth."""
        return self.sigma >= 3 * self.mean_spacing

    def matrix_elements(self, A) -> np.ndarray:
        A = _hermitian(A, "observable")
        if A.shape != self.H.shape:
            raise DomainError("observable must match H")
        V = self.basis
        return V.conj().T @ A @ V

    @classmethod
    def _build(cls, H, weights_fn, sigma, T=None):
        H = _hermitian(H, "H")
        E, V = np.linalg.eigh(H)
        p = weights_fn(E)
        p = p / p.sum()
        spacing = (E[-1] - E[0]) / max(len(E) - 1, 1)
        if sigma is None:
            sigma = 5 * spacing
        if not sigma > 0:
            raise DomainError("sigma must be positive")
        return cls(H, E, V, p, float(sigma), T)

    @classmethod
    def canonical(cls, H, T: float, sigma: Optional[float] = None) -> "PreparedSystem":
        if not T > 0:
            raise DomainError("T must be positive")
        return cls._build(H, lambda E: np.exp(-(E - E[0]) / T), sigma, T)

    @classmethod
    def microcanonical(cls, H, E0: float, width: float, sigma: Optional[float] = None) -> "PreparedSystem":
        if not width > 0:
            raise DomainError("width must be positive")
        return cls._build(H, lambda E: np.exp(-0.5 * ((E - E0) / width) ** 2) + 1e-300, sigma)

    @classmethod
    def custom(cls, H, p, sigma: Optional[float] = None) -> "PreparedSystem":
        p = np.asarray(p, dtype=float)
        if np.any(p < 0) or not p.sum() > 0:
            raise DomainError("occupations must be non-negative and not all zero")
        return cls._build(H, lambda E: p.copy(), sigma)


def _hermitian(A, name):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"{name} must be square")
    if np.max(np.abs(A - A.conj().T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(A))):
        raise DomainError(f"{name} must be Hermitian")
    return A


# ---------------------------------------------------------------- spectra

@dataclass(frozen=True)
class SpectralTriple:
    """S, C and K on ``omega``; complex for cross-spectra, K = i(S(w) - S(-w))."""

    omega: np.ndarray
    S: np.ndarray
    C: np.ndarray
    K: np.ndarray
    valid: bool


def default_grid(sys: PreparedSystem, n_points: int = 801) -> np.ndarray:
    """Symmetric uniform grid over +-1.2 times the spectral range of H."""
    span = 1.2 * (sys.energies[-1] - sys.energies[0])
    return np.linspace(-span, span, n_points)


def _lines(sys: PreparedSystem, A, B=None, include_diagonal: bool = True):
    """Frequencies E_m - E_n and weights p_n A_nm B_mn of every transition n -> m."""
    a = sys.matrix_elements(A)
    b = a if B is None else sys.matrix_elements(B)
    E = sys.energies
    freq = E[None, :] - E[:, None]  # [n, m]
    weight = sys.p[:, None] * a * b.T  # A_nm B_mn
    if not include_diagonal:
        mask = ~np.eye(len(E), dtype=bool)
        return freq[mask], weight[mask]
    return freq.ravel(), weight.ravel()


def _broadened(freq, weight, omega, sigma, deriv: int = 0):
    """sum_j w_j 2 pi g^(deriv)(omega - freq_j) with a normalized Gaussian g."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.zeros(omega.shape, dtype=complex)
    for start in range(0, len(freq), 4096):
        f = freq[start:start + 4096]
        w = weight[start:start + 4096]
        x = (omega[:, None] - f[None, :]) / sigma
        g = np.exp(-0.5 * x * x) / (sigma * SQRT_2PI)
        if deriv == 1:
            g = g * (-x / sigma)
        elif deriv == 2:
            g = g * (x * x - 1) / sigma**2
        out += 2 * math.pi * (g @ w)
    return out


def spectral_functions(sys: PreparedSystem, A, B=None, omega=None,
                       include_diagonal: bool = True) -> SpectralTriple:
    """
    Broadened S, C and K for observables A and B (B defaults to A).

    With ``include_diagonal=False`` the elastic m = n lines are left out, which
    removes the static part of the correlation function.
    """
    omega = default_grid(sys) if omega is None else np.asarray(omega, dtype=float)
    freq, weight = _lines(sys, A, B, include_diagonal)
    S = _broadened(freq, weight, omega, sys.sigma)
    S_minus = _broadened(freq, weight, -omega, sys.sigma)
    if B is None:
        S, S_minus = S.real, S_minus.real
    return SpectralTriple(omega, S, 0.5 * (S + S_minus), 1j * (S - S_minus), sys.valid)


def _even_part_derivs(sys, A, omega):
    """E(w) = e^{-beta w / 2} S(w) and its first two derivatives (off-diagonal lines)."""
    beta = 1 / sys.T
    freq, weight = _lines(sys, A, None, include_diagonal=False)
    S0, S1, S2 = (_broadened(freq, weight, omega, sys.sigma, d).real for d in (0, 1, 2))
    e = np.exp(-0.5 * beta * np.asarray(omega))
    E0 = e * S0
    E1 = e * (S1 - 0.5 * beta * S0)
    E2 = e * (S2 - beta * S1 + 0.25 * beta * beta * S0)
    return E0, E1, E2


@dataclass(frozen=True)
class DetailedBalance:
    """Max relative residual of S(-w) = e^{-beta w} S(w) on the window and its a priori bound."""

    residual: float
    bound: float
    window: float


def detailed_balance_check(sys: PreparedSystem, A, window: Optional[float] = None,
                           n_points: int = 401) -> DetailedBalance:
    """
    Canonical detailed-balance residual with a broadening-controlled bound.

    The residual at w equals E(w - beta sigma^2)/E(w) - 1, with E the
    symmetrized spectrum e^{-beta w/2} S(w). The bound is
    exp(beta sigma^2 max|E'/E|) - 1 over the window widened by beta sigma^2.
    ``window`` defaults to half the spectral range.
    """
    if sys.T is None:
        raise DomainError("detailed balance needs a canonical preparation")
    beta = 1 / sys.T
    shift = beta * sys.sigma**2
    if window is None:
        window = 0.5 * (sys.energies[-1] - sys.energies[0])
    w = np.linspace(-window, window, n_points)
    freq, weight = _lines(sys, A, None, include_diagonal=False)
    S_plus = _broadened(freq, weight, w, sys.sigma).real
    S_minus = _broadened(freq, weight, -w, sys.sigma).real
    residual = float(np.max(np.abs(S_minus / (np.exp(-beta * w) * S_plus) - 1)))
    ww = np.linspace(-window - shift, window, n_points)
    E0, E1, _ = _even_part_derivs(sys, A, ww)
    bound = math.expm1(shift * float(np.max(np.abs(E1 / E0))))
    return DetailedBalance(residual, bound, float(window))


# ---------------------------------------------------------------- Kubo

@dataclass(frozen=True)
class Susceptibility:
    omega: np.ndarray
    chi: np.ndarray
    eta: np.ndarray


def kubo_susceptibility(omega, K, sigma_min: Optional[float] = None) -> Susceptibility:
    """
    chi(w) = int i K(w') / (w - w' + i0) dw'/2pi on a uniform grid.

    Writing K = i k with k real and odd, Im chi = k/2 and
    Re chi = PV int k(w') / (w' - w) dw'/2pi. The principal value is taken by
    subtracting k(w) at the pole (the subtracted integrand is regular) and adding
    back k(w) ln|(b - w)/(a - w)| analytically. eta = Im chi / w, with the w = 0
    value from the slope of k. ``sigma_min`` is the narrowest feature in K;
    a GridError is raised if the spacing exceeds half of it.
    """
    omega = np.asarray(omega, dtype=float)
    k = np.asarray(K)
    if np.iscomplexobj(k):
        k = k.imag
    k = np.asarray(k, dtype=float)
    if omega.ndim != 1 or len(omega) < 5 or omega.shape != k.shape:
        raise GridError("need matching 1D grids with at least 5 points")
    d = np.diff(omega)
    if np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
        raise GridError("grid must be uniform and increasing")
    h = d[0]
    if sigma_min is not None and h > 0.5 * sigma_min:
        raise GridError("grid too coarse to resolve the response kernel")
    a, b = omega[0], omega[-1]
    dk = _derivative(k, h)
    n = len(omega)
    re = np.empty_like(k)
    wts = np.full(n, h)
    wts[[0, -1]] *= 0.5
    for start in range(0, n, 512):
        rows = slice(start, min(start + 512, n))
        diff = omega[None, :] - omega[rows, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            f = (k[None, :] - k[rows, None]) / diff
        idx = np.arange(rows.start, rows.stop)
        f[idx - start, idx] = dk[idx]
        re[rows] = f @ wts
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs((b - omega) / (omega - a)))
    logs[[0, -1]] = 0.0  # endpoint poles: the log term is dropped with the edge value
    re = (re + k * logs) / (2 * math.pi)
    im = 0.5 * k
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = im / omega
    zero = np.abs(omega) < 0.5 * h
    eta[zero] = 0.5 * dk[zero]
    return Susceptibility(omega, re + 1j * im, eta)


def _derivative(k, h):
    """Fourth-order central differences, second order at the two outer points."""
    d = np.gradient(k, h, edge_order=2)
    d[2:-2] = (k[:-4] - 8 * k[1:-3] + 8 * k[3:-1] - k[4:]) / (12 * h)
    return d


def eta_fgr(sys: PreparedSystem, A, omega, include_diagonal: bool = False) -> np.ndarray:
    """eta(w) = (S(w) - S(-w)) / (2 w), with the analytic w -> 0 limit S'(0)."""
    omega = np.asarray(omega, dtype=float)
    freq, weight = _lines(sys, A, None, include_diagonal)
    S = _broadened(freq, weight, omega, sys.sigma).real
    Sm = _broadened(freq, weight, -omega, sys.sigma).real
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (S - Sm) / (2 * omega)
    zero = omega == 0
    if np.any(zero):
        out[zero] = _broadened(freq, weight, np.zeros(1), sys.sigma, 1).real[0]
    return out


def response_kernel(sys: PreparedSystem, A, tau, include_diagonal: bool = False) -> np.ndarray:
    """K(tau) = i<[A(tau), A]> for the broadened spectrum: sum_j 2 w_j sin(w_j tau) e^{-sigma^2 tau^2/2}."""
    tau = np.asarray(tau, dtype=float)
    freq, weight = _lines(sys, A, None, include_diagonal)
    return 2 * np.sin(np.multiply.outer(tau, freq)) @ weight.real * np.exp(-0.5 * (sys.sigma * tau) ** 2)


def eta_dc_time_domain(sys: PreparedSystem, A) -> float:
    """eta_DC = int_0^inf K(tau) tau dtau by adaptive quadrature."""
    cut = 12 / sys.sigma
    return integrate(lambda t: float(response_kernel(sys, A, t)) * t, 0.0, cut)


# ---------------------------------------------------------------- FD relation

@dataclass(frozen=True)
class FDCheck:
    """eta from Kubo, nu_T = C(0), ratio eta 2T / nu_T and the a priori bound on |ratio - 1|."""

    eta: float
    nu_T: float
    ratio: float
    bound: float


def fd_check(sys: PreparedSystem, A) -> FDCheck:
    """
    Canonical DC fluctuation-dissipation check on the off-diagonal spectrum.

    eta = S'(0) and nu_T = S(0) with the elastic lines excluded. Then
    2T eta / nu_T - 1 = 2T E'(0)/E(0), and since E is symmetric about
    -beta sigma^2 / 2 this is bounded by sigma^2 max|E''| / E(0).
    """
    if sys.T is None:
        raise DomainError("fd_check needs a canonical preparation")
    T = sys.T
    E0, E1, _ = _even_part_derivs(sys, A, np.zeros(1))
    nu = float(E0[0])
    eta = float(eta_fgr(sys, A, np.zeros(1))[0])
    shift = sys.sigma**2 / T
    ww = np.linspace(-0.5 * shift, 0.0, 41)
    _, _, E2 = _even_part_derivs(sys, A, ww)
    bound = sys.sigma**2 * float(np.max(np.abs(E2))) / nu
    return FDCheck(eta, nu, 2 * T * eta / nu, bound)


def microcanonical_eta(E, g, nu_E) -> np.ndarray:
    """eta(E) = (1 / 2g) d/dE [g nu_E] on an energy grid (second-order differences)."""
    E = np.asarray(E, dtype=float)
    g = np.asarray(g, dtype=float)
    nu_E = np.asarray(nu_E, dtype=float)
    if len(E) < 3:
        raise DomainError("need at least 3 energies")
    return 0.5 * np.gradient(g * nu_E, E, edge_order=2) / g


# ---------------------------------------------------------------- multi-parameter response

def _forces(H_of_X: Callable, X0, h: float):
    X0 = np.asarray(X0, dtype=float)
    F = []
    for j in range(len(X0)):
        dX = np.zeros_like(X0)
        dX[j] = h
        F.append(-(np.asarray(H_of_X(X0 + dX)) - np.asarray(H_of_X(X0 - dX))) / (2 * h))
    return F


def adiabatic_curvature(H_of_X: Callable, n: int, X0, h: float = 1e-6, tol: float = 1e-9) -> np.ndarray:
    """
    B^{kj}_n = sum_{m != n} 2 Im[F^k_nm F^j_mn] / (E_m - E_n)^2 with F^j = -dH/dX_j.

    The derivatives are central differences of H(X) with step h.
    """
    H0 = _hermitian(H_of_X(np.asarray(X0, dtype=float)), "H")
    E, V = np.linalg.eigh(H0)
    gaps = np.delete(E - E[n], n)
    scale = max(np.max(np.abs(E)), 1e-300)
    if np.min(np.abs(gaps)) < tol * scale:
        raise DegeneracyError(f"level {n} is degenerate")
    Fs = [V.conj().T @ F @ V for F in _forces(H_of_X, X0, h)]
    d = len(Fs)
    B = np.zeros((d, d))
    denom = np.delete((E - E[n]) ** 2, n)
    for k in range(d):
        for j in range(k + 1, d):
            prod = np.delete(Fs[k][n, :] * Fs[j][:, n], n)
            B[k, j] = float(np.sum(2 * prod.imag / denom))
            B[j, k] = -B[k, j]
    return B


def curvature_vector(B: np.ndarray) -> np.ndarray:
    """(B^23, B^31, B^12) for three parameters."""
    return np.array([B[1, 2], B[2, 0], B[0, 1]])


def kubo_dc_matrix(sys: PreparedSystem, forces: Sequence) -> tuple:
    """
    DC response G = eta + B for several generalized forces.

    eta^{kj} = -pi sum (f_n - f_m)/(E_n - E_m) F^k_nm F^j_mn delta_sigma(E_m - E_n) and
    B^{kj} = sum (f_n - f_m)(-i F^k_nm F^j_mn)/(E_m - E_n)^2, both over n != m.
    For a canonical preparation the ratio (f_n - f_m)/(E_n - E_m) is continued
    to -f_n / T at vanishing gaps. Returns (eta, B).
    """
    E, p, sigma = sys.energies, sys.p, sys.sigma
    Fs = [sys.matrix_elements(F) for F in forces]
    dE = E[:, None] - E[None, :]  # E_n - E_m
    dp = p[:, None] - p[None, :]
    off = ~np.eye(len(E), dtype=bool)
    small = np.abs(dE) < 1e-12 * max(1.0, np.max(np.abs(E)))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(small, 0.0, dp / np.where(small, 1.0, dE))
        inv2 = np.where(small, 0.0, 1 / np.where(small, 1.0, dE) ** 2)
    if sys.T is not None:
        ratio = np.where(small & off, -p[:, None] / sys.T, ratio)
    delta = np.exp(-0.5 * (dE / sigma) ** 2) / (sigma * SQRT_2PI)
    d = len(Fs)
    eta = np.zeros((d, d))
    B = np.zeros((d, d))
    for k in range(d):
        for j in range(d):
            prod = Fs[k] * Fs[j].T  # F^k_nm F^j_mn
            eta[k, j] = float(np.real(-math.pi * np.sum((ratio * prod * delta)[off])))
            B[k, j] = float(np.real(np.sum((dp * (-1j) * prod * inv2)[off])))
    return eta, B


# ---------------------------------------------------------------- closed forms

def drude_conductance(modes: float, ell: float, L: float) -> float:
    """G = M ell / L in units of e^2 / (2 pi hbar)."""
    if modes < 0 or ell < 0 or L <= 0:
        raise DomainError("need M >= 0, ell >= 0, L > 0")
    return modes * ell / L


def scatterer_ring(g: float) -> float:
    """ell / L = g / (1 - g) for a ring with one stochastic scatterer of transmission g."""
    if not 0 < g < 1:
        raise DomainError("transmission must lie in (0, 1)")
    return g / (1 - g)


def ring_correlation_sum(g: float, n_max: int) -> float:
    """Truncated sum over n in [-n_max, n_max] of (2g - 1)^|n|; tends to ell/L."""
    if not 0 < g < 1:
        raise DomainError("transmission must lie in (0, 1)")
    r = 2 * g - 1
    n = np.arange(1, n_max + 1)
    return 1.0 + 2.0 * float(np.sum(r**n))


def wall_friction(mass_density: float, v_T: float, area: float) -> float:
    """Friction on a moving wall in an ideal gas, eta = rho v_T A."""
    return mass_density * v_T * area


def wall_force_intensity(m: float, T: float, number_density: float, area: float) -> float:
    """nu_T = m^2 v_T^3 n A for the impulsive collision force, with v_T = sqrt(2T/m)."""
    v_T = math.sqrt(2 * T / m)
    return m * m * v_T**3 * number_density * area


def forced_oscillator_spectra(omega, m: float, eta: float, Omega: float, T: float,
                              quantum: bool = True):
    """
    chi = 1/(m Omega^2 - m w^2 - i eta w), C_xx = coth(w/2T) Im chi, C_vv = w^2 C_xx.

    With ``quantum=False`` coth(w/2T) is replaced by 2T/w. Returns (chi, C_xx, C_vv).
    """
    w = np.asarray(omega, dtype=float)
    chi = 1 / (m * Omega**2 - m * w * w - 1j * eta * w)
    if quantum:
        with np.errstate(divide="ignore", invalid="ignore"):
            Cxx = chi.imag / np.tanh(w / (2 * T))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            Cxx = 2 * T * chi.imag / w
    # w -> 0 limit of coth(w/2T) Im chi, equal to 2T eta / (m Omega^2)^2
    zero = w == 0
    if np.any(zero):
        Cxx[zero] = 2 * T * eta / (m * Omega**2) ** 2 if Omega > 0 else np.inf
    return chi, Cxx, w * w * Cxx


def fermion_many_body_noise(C_E, Delta: float, T: float, omega) -> np.ndarray:
    """
    S^[N](w) = (w/Delta) / (1 - e^{-w/T}) C_E(w) for non-interacting fermions.

    ``C_E`` is the single-particle spectrum near the Fermi energy (callable or
    array on ``omega``), assumed energy independent there. T = 0 gives
    (w/Delta) Theta(w) C_E(w); the w -> 0 limit is (T/Delta) C_E(0).
    """
    if Delta <= 0 or T < 0:
        raise DomainError("need Delta > 0 and T >= 0")
    w = np.asarray(omega, dtype=float)
    c = np.asarray(C_E(w) if callable(C_E) else C_E, dtype=float)
    if T == 0:
        factor = np.where(w > 0, w / Delta, 0.0)
    else:
        x = w / T
        small = np.abs(x) < 1e-8
        xs = np.where(small, 1.0, x)
        factor = np.where(small, (T / Delta) * (1 + x / 2), (w / Delta) / -np.expm1(-xs))
    return factor * c
