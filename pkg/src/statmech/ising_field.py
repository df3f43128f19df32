"""
Ising model and Landau-Ginzburg numerics.

Exact 1D transfer-matrix solution, the 2D zero-field free energy, mean-field
ferro- and antiferromagnets, Bragg-Williams free energies, Lee-Yang zeros of
small lattices, Ornstein-Zernike correlations, the one-loop RG flow of (r, u)
and scaling relations between critical exponents.

Couplings follow E[s] = -sum_<ij> eps s_i s_j - sum_i h s_i, with T in energy
units. Dimensionless couplings carry a tilde in the docs: eps~ = eps/T.
"""

import itertools
import math
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy import optimize
from scipy.special import gamma, kv

from .errors import DomainError, NonConvergence
from .numerics import DEFAULT_TOL, Tolerance, find_root, fourier_integrate, integrate, ode_advance


# ---------------------------------------------------------------- 1D chain

def transfer_matrix(eps_t: float, h_t: float) -> np.ndarray:
    """T[s, s'] = exp(eps~ s s' + h~ (s + s')/2) with index 0 for s=+1."""
    s = np.array([1.0, -1.0])
    return np.exp(eps_t * np.outer(s, s) + 0.5 * h_t * (s[:, None] + s[None, :]))


def transfer_eigenvalues(eps_t: float, h_t: float):
    """lambda_pm = e^eps~ cosh h~ +- sqrt(e^(2 eps~) sinh^2 h~ + e^(-2 eps~))."""
    root = math.sqrt(math.exp(2 * eps_t) * math.sinh(h_t) ** 2 + math.exp(-2 * eps_t))
    c = math.exp(eps_t) * math.cosh(h_t)
    return c + root, c - root


@dataclass(frozen=True)
class Ising1D:
    lnZ: float
    F: float
    M: float  # magnetization per site of the finite system
    M_bulk: float  # thermodynamic-limit magnetization per site
    chi: float  # bulk susceptibility per site, dM/dh
    xi: float  # correlation length in lattice units
    ratio: float  # lambda_- / lambda_+

    def g(self, r):
        """Connected bulk correlation <s_0 s_r> - M^2 = (1 - M^2)(lambda_-/lambda_+)^r."""
        r = np.abs(np.asarray(r))
        return (1 - self.M_bulk**2) * np.where(r == 0, 1.0, self.ratio ** np.maximum(r, 1))


def ising1d_solve(eps: float, h: float, T: float, N: int, ring: bool = True) -> Ising1D:
    """
    Exact solution of the 1D Ising model with N sites.

    Rings use Z = lambda_+^N + lambda_-^N. Open chains use
    Z = u^T T^(N-1) u with u_s = e^(h~ s / 2), which at h = 0 gives
    2 (2 cosh eps~)^(N-1).
    """
    if N < 2:
        raise DomainError("need N >= 2")
    if T <= 0:
        raise DomainError("T must be positive")
    et, ht = eps / T, h / T
    lp, lm = transfer_eigenvalues(et, ht)
    ratio = lm / lp
    root = math.sqrt(math.exp(2 * et) * math.sinh(ht) ** 2 + math.exp(-2 * et))
    dlp = math.exp(et) * math.sinh(ht) + math.exp(2 * et) * math.sinh(ht) * math.cosh(ht) / root
    dlm = math.exp(et) * math.sinh(ht) - math.exp(2 * et) * math.sinh(ht) * math.cosh(ht) / root
    if ring:
        rN = ratio**N
        lnZ = N * math.log(lp) + math.log1p(rN)
        M = (dlp / lp + rN * dlm / lm if lm != 0 else dlp / lp) / (1 + rN)
    else:
        lnZ = _open_chain_lnZ(et, ht, N)
        M = _open_chain_magnetization(et, ht, N, 1e-5)
    A = math.exp(-4 * et)
    sh = math.sinh(ht)
    M_bulk = sh / math.sqrt(sh * sh + A)
    chi = math.cosh(ht) * A / (sh * sh + A) ** 1.5 / T
    xi = 1.0 / math.log(1 / abs(ratio)) if ratio != 0 else 0.0
    return Ising1D(lnZ, -T * lnZ, M, M_bulk, chi, xi, ratio)


def _open_chain_lnZ(et, ht, N):
    Tm = transfer_matrix(et, ht)
    u = np.exp(0.5 * ht * np.array([1.0, -1.0]))
    w, v = np.linalg.eigh(Tm)
    coef = (v.T @ u) ** 2
    return (N - 1) * math.log(w.max()) + math.log(np.sum(coef * (w / w.max()) ** (N - 1)))


def _open_chain_magnetization(et, ht, N, hstep):
    return (_open_chain_lnZ(et, ht + hstep, N) - _open_chain_lnZ(et, ht - hstep, N)) / (2 * hstep * N)


# ---------------------------------------------------------------- 2D Onsager

def onsager_kappa(eps_t: float) -> float:
    """kappa = 2 sinh(2 eps~) / cosh^2(2 eps~); equals 1 only at the critical point."""
    return 2 * math.sinh(2 * eps_t) / math.cosh(2 * eps_t) ** 2


def onsager2d_tc(tol: Tolerance = DEFAULT_TOL):
    """Critical coupling from sinh(2 eps~) = 1; returns (eps~_c, Tc/eps)."""
    ec = find_root(lambda e: math.sinh(2 * e) - 1.0, [0.1, 1.0], Tolerance(abs=1e-300, rel=1e-15))
    return ec, 1.0 / ec


def _onsager_inner(eps_t: float, theta: float) -> float:
    # int_0^{2pi} dphi/2pi ln(a + b cos phi) = ln((a + sqrt(a^2 - b^2))/2) for a >= |b|
    c2, s2 = math.cosh(2 * eps_t), math.sinh(2 * eps_t)
    a = c2 * c2 + s2 * math.cos(theta)
    b = s2
    # a^2 - b^2 = (a - b)(a + b) computed without cancellation
    amb = (s2 - 1) ** 2 + s2 * (1 + math.cos(theta))
    return math.log((a + math.sqrt(max(amb * (a + b), 0.0))) / 2)


def _onsager_inner_deriv(eps_t: float, theta: float) -> float:
    c2, s2 = math.cosh(2 * eps_t), math.sinh(2 * eps_t)
    ct = math.cos(theta)
    a = c2 * c2 + s2 * ct
    b = s2
    da = 4 * c2 * s2 + 2 * c2 * ct
    db = 2 * c2
    amb = (s2 - 1) ** 2 + s2 * (1 + ct)
    root = math.sqrt(max(amb * (a + b), 0.0))
    if root == 0:
        return (da + 0.0) / a
    return (da + (a * da - b * db) / root) / (a + root)


@dataclass(frozen=True)
class Onsager:
    lnZ_per_site: float
    kappa: float
    energy_per_site: float  # -d(lnZ/N)/d beta in units of eps


def onsager2d(eps_t: float, tol: Tolerance = DEFAULT_TOL) -> Onsager:
    """
    Zero-field free energy of the square-lattice Ising model.

    lnZ/N = ln 2 + 1/2 int int dtheta dtheta'/(2pi)^2 ln[cosh^2(2 eps~) + sinh(2 eps~)(cos theta + cos theta')].
    The theta' integral is done in closed form; the remaining theta integral
    has its only non-smooth point at theta = pi (a kink at the critical point)
    and is split there.
    """
    if eps_t <= 0:
        raise DomainError("eps~ must be positive")
    half = integrate(lambda t: _onsager_inner(eps_t, t), 0.0, math.pi, tol)
    lnz = math.log(2) + 0.5 * half / math.pi
    dhalf = integrate(lambda t: _onsager_inner_deriv(eps_t, t), 0.0, math.pi, tol)
    return Onsager(lnz, onsager_kappa(eps_t), -0.5 * dhalf / math.pi)


def onsager_heat_capacity(eps_t: float, h: float = 1e-5, tol: Tolerance = DEFAULT_TOL) -> float:
    """C/N = eps~^2 d^2(lnZ/N)/d eps~^2, by central difference of the analytic first derivative."""
    up = onsager2d(eps_t + h, tol).energy_per_site
    dn = onsager2d(eps_t - h, tol).energy_per_site
    return -eps_t**2 * (up - dn) / (2 * h)


def onsager_heat_capacity_peak(lo: float = 0.40, hi: float = 0.48, h: float = 1e-5,
                               tol: Tolerance = DEFAULT_TOL) -> float:
    """Location of the maximum of the numerical heat capacity (golden-section search)."""
    res = optimize.minimize_scalar(lambda e: -onsager_heat_capacity(e, h, tol), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-7})
    return float(res.x)


# ---------------------------------------------------------------- mean field

@dataclass(frozen=True)
class MeanField:
    solutions: List[float]
    stable: List[float]
    m: float  # selected branch
    symmetry_broken: bool  # True when h = 0 below Tc and two minima are degenerate
    Tc: float
    E_per_site: float  # exchange energy -c eps <s>^2 / 2
    C_per_site: float


def _x_minus_tanh(x: float) -> float:
    # series below 1e-3, where x - tanh x would cancel to rounding
    if abs(x) < 1e-3:
        x2 = x * x
        return x * x2 * (1 / 3 - x2 * (2 / 15 - x2 * (17 / 315)))
    return x - math.tanh(x)


def _atanh_minus_x(x: float) -> float:
    if abs(x) < 1e-3:
        x2 = x * x
        return x * x2 * (1 / 3 + x2 * (1 / 5 + x2 / 7))
    return math.atanh(x) - x


def _mf_free_energy(m, h, Tc, T):
    u = (h + Tc * m) / T
    return 0.5 * Tc * m * m - T * (abs(u) + math.log1p(math.exp(-2 * abs(u))))


def mean_field_magnetization(eps: float, h: float, T: float, c: int) -> MeanField:
    """
    All solutions of <s> = tanh((h + c eps <s>)/T) and the selected stable branch.

    The selected branch minimizes the mean-field free energy; at h = 0 below Tc
    the two degenerate minima are both reported and the positive one selected.
    """
    if T <= 0:
        raise DomainError("T must be positive")
    Tc = c * eps

    def g(m):
        # m - tanh(u) split as (m - u) + (u - tanh u) so the cubic term survives near Tc
        return ((T - Tc) * m - h) / T + _x_minus_tanh((h + Tc * m) / T)

    grid = np.linspace(-1.0, 1.0, 4001)
    vals = np.array([g(m) for m in grid])
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(find_root(g, [grid[i], grid[i + 1]], Tolerance(abs=1e-300, rel=1e-15)))
    if vals[-1] == 0:
        roots.append(1.0)
    # small roots close to m = 0 can hide between grid points just below Tc
    if h == 0 and T < Tc and not any(r > 0 for r in roots):
        mp = find_root(g, [1e-300, 1.0], Tolerance(abs=1e-300, rel=1e-15))
        roots += [mp, -mp]
        if 0.0 not in roots:
            roots.append(0.0)
    roots = sorted(set(roots))

    def curvature(m):
        u = (h + Tc * m) / T
        return 1 - Tc / T / math.cosh(u) ** 2

    stable = [r for r in roots if curvature(r) > 0]
    if not stable:
        stable = roots
    fvals = [_mf_free_energy(r, h, Tc, T) for r in stable]
    fmin = min(fvals)
    best = [r for r, f in zip(stable, fvals) if abs(f - fmin) <= 1e-14 * max(1.0, abs(fmin))]
    broken = len(best) > 1
    m = max(best) if h >= 0 else min(best)
    u = (h + Tc * m) / T
    sech2 = 1 / math.cosh(u) ** 2
    # T - Tc sech^2 u written without cancellation at T = Tc; if it still underflows,
    # m is numerically the symmetric solution and C takes its T > Tc value of zero
    den = (T - Tc) + Tc * math.tanh(u) ** 2
    dmdT = -sech2 * u / den if den != 0 else 0.0
    E = -0.5 * Tc * m * m
    C = -Tc * m * dmdT
    return MeanField(roots, stable, m, broken, Tc, E, C)


def mean_field_susceptibility(eps: float, T: float, c: int, h: float = 0.0) -> float:
    """dM/dh from implicit differentiation of the self-consistency equation."""
    mf = mean_field_magnetization(eps, h, T, c)
    sech2 = 1 / math.cosh((h + mf.Tc * mf.m) / T) ** 2
    return sech2 / (T - mf.Tc * sech2)


def fit_power_law(x, y) -> float:
    """Log-log slope of y against x by least squares."""
    return float(np.polyfit(np.log(np.asarray(x)), np.log(np.abs(np.asarray(y))), 1)[0])


def mean_field_exponents_fit(eps: float = 1.0, c: int = 4, t_range=(1e-6, 1e-4), h_range=(1e-9, 1e-7)):
    """
    Fitted (beta, gamma, delta) from sweeps near Tc = c eps.

    beta from M(h=0) against Tc - T, gamma from chi against T - Tc and delta
    from M(T=Tc) against h.
    """
    Tc = c * eps
    ts = np.geomspace(*t_range, 8)
    m_below = [mean_field_magnetization(eps, 0.0, Tc * (1 - t), c).m for t in ts]
    chis = [mean_field_susceptibility(eps, Tc * (1 + t), c) for t in ts]
    hs = np.geomspace(*h_range, 8)
    m_crit = [mean_field_magnetization(eps, hh, Tc, c).m for hh in hs]
    beta = fit_power_law(ts, m_below)
    gamma_ = -fit_power_law(ts, chis)
    delta = 1.0 / fit_power_law(hs, m_crit)
    return beta, gamma_, delta


@dataclass(frozen=True)
class Antiferro:
    Ma: float
    Mb: float
    M: float  # uniform magnetization per site
    Ms: float  # staggered magnetization, >= 0
    chi: float  # zero-field closed form 1/(Tc + T cosh^2((Tc/T) Ms))
    f: float  # mean-field free energy per site


def _af_free_energy(Ma, Mb, h, Tc, T):
    def s(m):
        out = 0.0
        for p in ((1 + m) / 2, (1 - m) / 2):
            if p > 0:
                out -= p * math.log(p)
        return out
    return 0.5 * Tc * Ma * Mb - 0.5 * h * (Ma + Mb) - 0.5 * T * (s(Ma) + s(Mb))


def antiferro_mean_field(eps: float, h: float, T: float, c: int) -> Antiferro:
    """
    Two-sublattice mean field for an antiferromagnet with Tc = c eps.

    Solves Ma = tanh((h - Tc Mb)/T), Mb = tanh((h - Tc Ma)/T) from several
    starting points and keeps the solution of lowest free energy.
    """
    if T <= 0:
        raise DomainError("T must be positive")
    Tc = c * eps

    def eqs(v):
        a, b = v
        return [a - math.tanh((h - Tc * b) / T), b - math.tanh((h - Tc * a) / T)]

    best = None
    for start in ((0.999, -0.999), (0.5, -0.5), (0.1, -0.05), (0.0, 0.0), (0.999, 0.999), (-0.5, -0.5)):
        sol, info, ier, _ = optimize.fsolve(eqs, start, full_output=True, xtol=1e-14)
        if ier != 1 or max(abs(x) for x in eqs(sol)) > 1e-12:
            continue
        f = _af_free_energy(sol[0], sol[1], h, Tc, T)
        if best is None or f < best[0] - 1e-14:
            best = (f, sol)
    if best is None:
        raise NonConvergence("antiferromagnet self-consistency not solved")
    f, (a, b) = best[0], (float(best[1][0]), float(best[1][1]))
    if a < b:
        a, b = b, a
    Ms = 0.5 * (a - b)
    if Ms < 1e-12:
        Ms = 0.0
    chi = 1.0 / (Tc + T * math.cosh(Tc / T * Ms) ** 2)
    return Antiferro(a, b, 0.5 * (a + b), Ms, chi, float(f))


# ---------------------------------------------------------------- Bragg-Williams

def bragg_williams_action(M: float, eps: float, h: float, T: float, c: int) -> float:
    """Quartic Landau form A/N = (1 - beta c eps) M^2 / 2 + M^4 / 12 - beta h M."""
    beta = 1.0 / T
    return 0.5 * (1 - beta * c * eps) * M * M + M**4 / 12 - beta * h * M


def free_energy_A(T: float, M: float, eps: float, c: int, h: float = 0.0) -> float:
    """
    Free energy per site with the exact mixing entropy:
    T[(1+M)/2 ln((1+M)/2) + (1-M)/2 ln((1-M)/2)] - c eps M^2/2 - h M.
    """
    if abs(M) >= 1:
        raise DomainError("|M| must be < 1")
    p, q = (1 + M) / 2, (1 - M) / 2
    return T * (p * math.log(p) + q * math.log(q)) - 0.5 * c * eps * M * M - h * M


def bragg_williams_minimum(eps: float, h: float, T: float, c: int, form: str = "exact") -> float:
    """
    Minimizing M of either free-energy form.

    The exact form is stationary where h = T artanh M - c eps M; the quartic
    form agrees with it only to leading orders in M near Tc.
    """
    if form == "exact":
        def dA(M):
            return (T - c * eps) * M - h + T * _atanh_minus_x(M)
    elif form == "quartic":
        beta = 1.0 / T
        def dA(M):
            return (1 - beta * c * eps) * M + M**3 / 3 - beta * h
    else:
        raise DomainError("form must be 'exact' or 'quartic'")
    edge = 1 - 1e-15 if form == "exact" else 10.0
    # positive branch for h >= 0; the minimum lies where dA changes sign upward.
    # dA(0) = -h brackets any h != 0, however small; h = 0 needs to step off the zero root
    tiny = 1e-300 if h == 0 else 0.0
    lo = tiny if h >= 0 else -edge
    hi = edge if h >= 0 else -tiny
    if h == 0 and (T >= c * eps):
        return 0.0
    return find_root(dA, [lo, hi], Tolerance(abs=1e-300, rel=1e-15))


# ---------------------------------------------------------------- Lee-Yang

def _bonds(N: int, geometry: str):
    if geometry == "chain":
        return [(i, i + 1) for i in range(N - 1)]
    if geometry == "ring":
        return [(i, (i + 1) % N) for i in range(N)] if N > 2 else [(0, 1)]
    if geometry == "complete":
        return list(itertools.combinations(range(N), 2))
    raise DomainError(f"unknown geometry {geometry!r}")


def lee_yang_coefficients(N: int, beta_eps: float, geometry: str = "ring") -> np.ndarray:
    """
    Coefficients Z_k (k up spins) of Z(z) = sum_k Z_k z^k, with z = e^(2 beta h).

    Exhaustive enumeration; the overall factor e^(-beta h N) is dropped.
    """
    if not 1 <= N <= 20:
        raise DomainError("N must be between 1 and 20 for exact enumeration")
    bonds = np.array(_bonds(N, geometry)) if N > 1 else np.zeros((0, 2), int)
    configs = ((np.arange(2**N)[:, None] >> np.arange(N)) & 1).astype(np.int8)
    spins = 2 * configs - 1
    if len(bonds):
        bond_sum = np.sum(spins[:, bonds[:, 0]] * spins[:, bonds[:, 1]], axis=1)
    else:
        bond_sum = np.zeros(2**N)
    k = configs.sum(axis=1)
    logw = beta_eps * bond_sum
    shift = logw.max()
    coef = np.zeros(N + 1)
    np.add.at(coef, k, np.exp(logw - shift))
    return coef * math.exp(shift)


def _polish(coefs_high_first, z, iters=4):
    p = np.poly1d(coefs_high_first)
    dp = p.deriv()
    for _ in range(iters):
        d = dp(z)
        if d == 0:
            break
        z = z - p(z) / d
    return z


def lee_yang_zeros(N: int, beta_eps: float, geometry: str = "ring") -> np.ndarray:
    """
    Roots of the partition polynomial Z(z).

    For eps = 0 the polynomial is (1+z)^N, which is detected and returned as
    an exact N-fold root at -1 (the companion-matrix eigenvalues of a multiple
    root are only accurate to the N-th root of machine precision).
    """
    coef = lee_yang_coefficients(N, beta_eps, geometry)
    binom = np.array([math.comb(N, k) for k in range(N + 1)], dtype=float)
    if np.allclose(coef / coef[0], binom, rtol=1e-14, atol=0):
        return -np.ones(N, dtype=complex)
    high_first = coef[::-1] / coef[-1]
    roots = np.roots(high_first)
    return np.array([_polish(high_first, z) for z in roots])


# ---------------------------------------------------------------- Ornstein-Zernike

def ornstein_zernike(q, xi: float):
    """g~(q) = 1/(q^2 + xi^-2); xi = inf gives 1/q^2."""
    q = np.asarray(q, dtype=float)
    k2 = 0.0 if math.isinf(xi) else xi**-2
    return 1.0 / (q * q + k2)


def ornstein_zernike_real(r: float, xi: float, d: int = 3) -> float:
    """
    Real-space correlation (2pi)^(-d/2) (kappa/r)^(d/2-1) K_(d/2-1)(kappa r), kappa = 1/xi.

    For xi = inf this becomes Gamma(d/2-1) / (4 pi^(d/2) r^(d-2)).
    """
    if r <= 0:
        raise DomainError("r must be positive")
    nu = d / 2 - 1
    if math.isinf(xi):
        if d <= 2:
            raise DomainError("critical correlation needs d > 2")
        return gamma(nu) / (4 * math.pi ** (d / 2) * r ** (d - 2))
    k = 1.0 / xi
    return (2 * math.pi) ** (-d / 2) * (k / r) ** nu * kv(nu, k * r)


def ornstein_zernike_asymptotic(r: float, xi: float, d: int = 3) -> float:
    """Large-r form (1/2)(2pi)^(-(d-1)/2) xi^(-(d-3)/2) r^(-(d-1)/2) e^(-r/xi)."""
    return 0.5 * (2 * math.pi) ** (-(d - 1) / 2) * xi ** (-(d - 3) / 2) * r ** (-(d - 1) / 2) * math.exp(-r / xi)


def ornstein_zernike_3d_numeric(r: float, xi: float, tol: Tolerance = Tolerance(abs=1e-15, rel=1e-9)) -> float:
    """Inverse Fourier transform in 3D, (1/(2 pi^2 r)) int_0^inf q sin(qr)/(q^2 + xi^-2) dq."""
    k2 = xi**-2
    return fourier_integrate(lambda q: q / (q * q + k2), r, "sin", tol) / (2 * math.pi**2 * r)


def gaussian_fluctuation_integral(r: float, d: float, cutoff: float = 1.0,
                                  tol: Tolerance = DEFAULT_TOL) -> float:
    """int_0^cutoff k^(d-1) dk / (k^2 + r)^2, which scales as r^((d-4)/2) for d < 4 and r -> 0."""
    if r <= 0:
        raise DomainError("r must be positive")
    brk = min(math.sqrt(r), cutoff / 2)
    f = lambda k: k ** (d - 1) / (k * k + r) ** 2
    return integrate(f, 0.0, brk, tol) + integrate(f, brk, cutoff, tol)


# ---------------------------------------------------------------- RG

def rg_beta(tau: float, y: np.ndarray, d: float) -> np.ndarray:
    r, u = y
    return np.array([2 * r - 3 * r * u + 3 * u, (4 - d) * u - 9 * u * u])


@dataclass(frozen=True)
class RgTrajectory:
    tau: np.ndarray
    r: np.ndarray
    u: np.ndarray


def rg_flow(r0: float, u0: float, d: float, tau_end: float, step: float = 1e-3,
            samples: int = 101) -> RgTrajectory:
    """Integrate dr/dtau = 2r - 3ru + 3u, du/dtau = (4-d)u - 9u^2 with RK4."""
    taus = np.linspace(0.0, tau_end, samples)
    ys = [np.array([r0, u0], dtype=float)]
    for t0, t1 in zip(taus[:-1], taus[1:]):
        ys.append(ode_advance(lambda t, y: rg_beta(t, y, d), ys[-1], t0, t1, step))
    ys = np.array(ys)
    return RgTrajectory(taus, ys[:, 0], ys[:, 1])


@dataclass(frozen=True)
class FixedPoint:
    name: str
    r: float  # location to first order in 4 - d
    u: float
    r_stationary: float  # exact zero of the truncated beta function
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    stability: str  # e.g. "1 relevant, 1 irrelevant"


def rg_jacobian(r: float, u: float, d: float) -> np.ndarray:
    return np.array([[2 - 3 * u, 3 - 3 * r], [0.0, (4 - d) - 18 * u]])


def _classify(J):
    w, v = np.linalg.eig(J)
    order = np.argsort(-w.real)
    w, v = w[order].real, v[:, order].real
    rel = int(np.sum(w > 0))
    irr = int(np.sum(w < 0))
    marg = len(w) - rel - irr
    parts = [f"{rel} relevant", f"{irr} irrelevant"] + ([f"{marg} marginal"] if marg else [])
    return w, v, ", ".join(parts)


def rg_fixed_points(d: float) -> List[FixedPoint]:
    """
    Gaussian point (0, 0) and, for d < 4, the nontrivial point.

    The nontrivial point is reported at (-(4-d)/6, (4-d)/9), its location to
    first order in 4 - d. The flow equations as written vanish exactly at
    r = -(4-d)/(d+2), which differs by (4-d)^2/(6(d+2)); that value is kept in
    ``r_stationary`` and is where trajectories actually stall. The Jacobian
    eigenvalues do not depend on r, so the linearization is the same at both.
    """
    out = []
    w, v, s = _classify(rg_jacobian(0.0, 0.0, d))
    out.append(FixedPoint("gaussian", 0.0, 0.0, 0.0, w, v, s))
    if d < 4:
        rc, uc = -(4 - d) / 6, (4 - d) / 9
        r_flow = -(4 - d) / (d + 2)
        w, v, s = _classify(rg_jacobian(r_flow, uc, d))
        out.append(FixedPoint("nontrivial", rc, uc, r_flow, w, v, s))
    return out


@dataclass(frozen=True)
class CriticalExponents:
    nu: float
    eta: float
    alpha: float
    beta: float
    gamma: float
    delta: float


def exponents_from_scaling(nu: float, eta: float, d: float, delta_form: str = "minus") -> CriticalExponents:
    """
    Exponents from nu, eta and d via hyperscaling.

    alpha = 2 - nu d, beta = (d - 2 + eta) nu / 2, gamma = (2 - eta) nu and
    delta = (d + 2 - eta)/(d - 2 + eta). ``delta_form="plus"`` uses
    (d + 2 + eta)/(d - 2 + eta) instead.
    """
    den = d - 2 + eta
    if den == 0:
        raise DomainError("d - 2 + eta must be nonzero")
    if delta_form == "minus":
        delta = (d + 2 - eta) / den
    elif delta_form == "plus":
        delta = (d + 2 + eta) / den
    else:
        raise DomainError("delta_form must be 'minus' or 'plus'")
    return CriticalExponents(nu, eta, 2 - nu * d, den * nu / 2, (2 - eta) * nu, delta)


def rg_exponents(d: float) -> CriticalExponents:
    """nu = 1/y_t from the relevant eigenvalue at the nontrivial fixed point; eta = 0 at this order."""
    fps = rg_fixed_points(d)
    if len(fps) < 2:
        raise DomainError("no nontrivial fixed point for d >= 4")
    y_t = fps[1].eigenvalues.max()
    return exponents_from_scaling(1.0 / y_t, 0.0, d)
