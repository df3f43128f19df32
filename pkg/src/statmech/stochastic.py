"""
Classical stochastic dynamics.

Random-walk diffusion constants, Langevin ensembles with fluctuation-
dissipation diagnostics, a conservative 1D Fokker-Planck solver and
continuous-time rate equations (master equations over discrete states).
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import DomainError, SingularRateMatrix, StabilityError, StepError
from .numerics import RandomStream, autocorrelation_spectrum


# ---------------------------------------------------------------- random walks

def random_walk_diffusion(rates: Dict[float, float]) -> float:
    """D = (1/2) sum_r r^2 w(r) over signed hop distances r."""
    return 0.5 * sum(r * r * w for r, w in rates.items())


def random_walk_simulate(rates: Dict[float, float], t: float, n_walkers: int,
                         stream: Optional[RandomStream] = None) -> np.ndarray:
    """Positions at time t of independent walkers; hop counts per distance are Poisson(w t)."""
    rng = (stream or RandomStream(0)).generator()
    x = np.zeros(n_walkers)
    for r, w in rates.items():
        if w < 0:
            raise DomainError("rates must be non-negative")
        x += r * rng.poisson(w * t, n_walkers)
    return x


# ---------------------------------------------------------------- Langevin

@dataclass(frozen=True)
class LangevinParams:
    """
    m dv = (F(x) - eta v) dt + dW with <dW^2> = nu dt.

    ``force`` acts elementwise on an array of positions; None means a free
    particle. The implied temperature is nu / (2 eta).
    """

    m: float
    eta: float
    nu: float
    dt: float
    force: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.m <= 0 or self.eta <= 0 or self.dt <= 0 or self.nu < 0:
            raise DomainError("need m, eta, dt > 0 and nu >= 0")

    @property
    def T(self) -> float:
        return self.nu / (2 * self.eta)

    @property
    def tau(self) -> float:
        """Velocity relaxation time m / eta."""
        return self.m / self.eta

    @property
    def stable(self) -> bool:
        return self.dt < 0.1 * self.tau


@dataclass(frozen=True)
class LangevinStats:
    kinetic: float  # <m v^2 / 2>
    kinetic_err: float
    v2: float
    v2_err: float
    v4: float
    v4_err: float
    corr_rate: float  # fitted decay rate of C_vv
    D_msd: float
    D_msd_err: float
    D_vacf: float  # C~_vv(0) / 2
    D_vacf_err: float
    lags: np.ndarray  # lag times used for the MSD fit
    msd: np.ndarray
    t: np.ndarray  # recording times for v_mean
    v_mean: np.ndarray  # ensemble-mean velocity
    x_final: np.ndarray
    v_final: np.ndarray
    stable: bool


def _simulate_chunk(p: LangevinParams, n: int, n_steps: int, rng, x0, v0, scheme):
    x = np.full(n, float(x0))
    if v0 is None:
        v = rng.standard_normal(n) * math.sqrt(p.T / p.m) if p.nu > 0 else np.zeros(n)
    else:
        v = np.full(n, float(v0))
    X = np.empty((n_steps + 1, n))
    V = np.empty((n_steps + 1, n))
    X[0], V[0] = x, v
    g = p.eta / p.m
    if scheme == "euler":
        decay = 1 - g * p.dt
        kick = math.sqrt(p.nu * p.dt) / p.m
        fdt = p.dt / p.m
    else:
        # exact Ornstein-Uhlenbeck velocity update, forces held fixed over the step
        decay = math.exp(-g * p.dt)
        kick = math.sqrt(p.nu * -math.expm1(-2 * g * p.dt) / (2 * g)) / p.m
        fdt = -math.expm1(-g * p.dt) / p.eta
    for k in range(n_steps):
        xi = rng.standard_normal(n) if p.nu > 0 else 0.0
        F = p.force(x) if p.force is not None else 0.0
        x = x + v * p.dt
        v = decay * v + F * fdt + kick * xi
        X[k + 1], V[k + 1] = x, v
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise StepError("Langevin trajectory diverged")
    return X, V


def langevin_simulate(p: LangevinParams, n_traj: int, n_steps: int,
                      stream: Optional[RandomStream] = None, x0: float = 0.0,
                      v0: Optional[float] = None, msd_window=(5.0, 10.0),
                      vacf_window: float = 10.0, chunk: int = 250,
                      scheme: str = "euler") -> LangevinStats:
    """
    Ensemble of Langevin trajectories with fluctuation-dissipation diagnostics.

    The default scheme is Euler-Maruyama with a noise impulse sqrt(nu dt) per
    step; ``scheme="exact"`` uses the exact velocity propagator of the linear
    friction term. Velocities start from the Maxwell distribution at
    T = nu/(2 eta) unless ``v0`` is given. All averages are time averages per
    trajectory, and error bars are standard errors over trajectories.

    D is estimated twice: from the slope of the time-averaged mean-square
    displacement over lags ``msd_window`` (in units of m/eta), and as half the
    zero-frequency velocity power spectrum with lag window ``vacf_window``.
    The spectrum is taken without removing the sample mean of v, whose true
    value is zero; removing it would bias C~(0) low by about
    2 vacf_window tau / (n_steps dt).

    Raises
    ------
    StabilityError
        If eta dt / m >= 1, where the Euler update overshoots.
    StepError
        If any trajectory becomes non-finite.
    """
    if scheme not in ("euler", "exact"):
        raise DomainError("scheme must be 'euler' or 'exact'")
    if scheme == "euler" and p.dt >= p.tau:
        raise StabilityError("eta dt / m must be < 1")
    if n_traj < 2 or n_steps < 2:
        raise DomainError("need at least two trajectories and two steps")
    streams = (stream or RandomStream(0)).split(math.ceil(n_traj / chunk))
    dt = p.dt
    l1, l2 = (int(round(w * p.tau / dt)) for w in msd_window)
    l2 = min(l2, n_steps // 2)
    l1 = min(l1, l2 - 1) if l2 > 1 else 1
    lag_idx = np.unique(np.linspace(max(l1, 1), max(l2, 2), 6).astype(int))
    max_lag = max(2, min(int(round(vacf_window * p.tau / dt)), n_steps))
    ke, v2s, v4s, dmsd, dvacf, msd_all, vsum, rate_C = [], [], [], [], [], [], None, None
    xf, vf = [], []
    done = 0
    for s in streams:
        n = min(chunk, n_traj - done)
        X, V = _simulate_chunk(p, n, n_steps, s.generator(), x0, v0, scheme)
        done += n
        v2 = V * V
        ke.append(0.5 * p.m * v2.mean(axis=0))
        v2s.append(v2.mean(axis=0))
        v4s.append((v2 * v2).mean(axis=0))
        msd = np.array([((X[l:] - X[:-l]) ** 2).mean(axis=0) for l in lag_idx])
        msd_all.append(msd)
        dmsd.append(np.polyfit(lag_idx * dt, msd, 1)[0] / 2)
        vsum = V.sum(axis=1) if vsum is None else vsum + V.sum(axis=1)
        xf.append(X[-1])
        vf.append(V[-1])
        if p.nu > 0:
            for j in range(n):
                ac = autocorrelation_spectrum(V[:, j], dt, max_lag=max_lag, demean=False)
                dvacf.append(0.5 * ac.spectrum[0])
                c = ac.C[: max(2, int(round(p.tau / dt)))]
                rate_C = c if rate_C is None else rate_C + c
    ke = np.concatenate(ke)
    v2s, v4s = np.concatenate(v2s), np.concatenate(v4s)
    dmsd = np.concatenate(dmsd)
    msd_mean = np.concatenate(msd_all, axis=1).mean(axis=1)

    def se(a):
        return float(a.std(ddof=1) / math.sqrt(len(a)))

    if rate_C is not None and np.all(rate_C > 0):
        lags = np.arange(len(rate_C)) * dt
        corr_rate = float(-np.polyfit(lags, np.log(rate_C / rate_C[0]), 1)[0])
        dvacf = np.array(dvacf)
        D_vacf, D_vacf_err = float(dvacf.mean()), se(dvacf)
    else:
        corr_rate, D_vacf, D_vacf_err = math.nan, math.nan, math.nan
    return LangevinStats(
        kinetic=float(ke.mean()), kinetic_err=se(ke),
        v2=float(v2s.mean()), v2_err=se(v2s), v4=float(v4s.mean()), v4_err=se(v4s),
        corr_rate=corr_rate, D_msd=float(dmsd.mean()), D_msd_err=se(dmsd),
        D_vacf=D_vacf, D_vacf_err=D_vacf_err,
        lags=lag_idx * dt, msd=msd_mean,
        t=np.arange(n_steps + 1) * dt, v_mean=vsum / n_traj,
        x_final=np.concatenate(xf), v_final=np.concatenate(vf), stable=p.stable,
    )


# ---------------------------------------------------------------- Fokker-Planck

def _bernoulli(z):
    """B(z) = z / (e^z - 1) with B(0) = 1."""
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = np.abs(z) > 1e-12
    out[nz] = z[nz] / np.expm1(z[nz])
    return out


def _fp_faces(x, drift, D, potential, mu):
    """Face Peclet numbers u dx / D (or face velocities u when D = 0)."""
    dx = x[1] - x[0]
    if potential is not None:
        # node potential differences: the discrete stationary state is exactly e^(-mu V / D)
        dV = np.diff(potential(x))
        return (-mu * dV / D, dx) if D > 0 else (-mu * dV / dx, dx)
    xf = 0.5 * (x[1:] + x[:-1])
    u = drift(xf) if callable(drift) else np.broadcast_to(np.asarray(drift, float), xf.shape)
    if D == 0:
        return u, dx
    return u * dx / D, dx


def fokker_planck_max_step(x, D: float, drift=0.0, potential=None, mu: float = 1.0) -> float:
    """Largest explicit step that keeps the update positive."""
    peclet, dx = _fp_faces(np.asarray(x, float), drift, D, potential, mu)
    if D == 0:
        return dx / max(np.max(np.abs(peclet)), 1e-300)
    # diagonal entry 1 - dt D/dx^2 (B(-P_left) + B(P_right)) must stay >= 0
    out_rate = np.zeros(len(x))
    out_rate[:-1] += _bernoulli(-peclet)
    out_rate[1:] += _bernoulli(peclet)
    return dx * dx / (D * out_rate.max())


def fokker_planck_1d(x, rho0, t: float, D: float, drift=0.0, potential=None, T: float = 1.0,
                     dt: Optional[float] = None, mu: Optional[float] = None):
    """
    Propagate rho_t + d/dx [u rho - D d rho/dx] = 0 on a uniform grid.

    Finite volumes with reflecting walls and Scharfetter-Gummel (exponentially
    fitted) face fluxes, stepped explicitly in time. With ``potential`` given
    the drift is u = -mu V'(x), mu = D/T unless set explicitly, and the
    discrete stationary state is exactly proportional to e^(-mu V(x_i)/D).
    With D = 0 the flux reduces to first-order upwinding.

    Raises
    ------
    StabilityError
        If ``dt`` exceeds the positivity limit of the explicit update.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 3 or not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-9, atol=0):
        raise DomainError("x must be a uniform grid with at least 3 points")
    if D < 0:
        raise DomainError("D must be >= 0")
    if mu is None:
        if T <= 0:
            raise DomainError("T must be positive")
        mu = D / T
    rho = np.asarray(rho0, dtype=float).copy()
    peclet, dx = _fp_faces(x, drift, D, potential, mu)
    limit = fokker_planck_max_step(x, D, drift, potential, mu)
    if dt is None:
        dt = 0.9 * limit
    elif dt > limit * (1 + 1e-12):
        raise StabilityError(f"dt={dt} exceeds the stable step {limit}")
    if D > 0:
        a = D / dx * _bernoulli(-peclet)  # coefficient of rho_left in the face flux
        b = D / dx * _bernoulli(peclet)   # coefficient of rho_right
    else:
        a = np.maximum(peclet, 0.0)
        b = -np.minimum(peclet, 0.0)
    n = max(1, math.ceil(t / dt - 1e-12)) if t > 0 else 0
    h = t / n if n else 0.0
    for _ in range(n):
        J = a * rho[:-1] - b * rho[1:]
        div = np.zeros_like(rho)
        div[:-1] += J
        div[1:] -= J
        rho = rho - h / dx * div
    return rho


# ---------------------------------------------------------------- rate equations

@dataclass(frozen=True)
class RateMatrix:
    """W[n, m] is the rate m -> n; the diagonal holds -Gamma_m so columns sum to zero."""

    W: np.ndarray

    def __init__(self, W, check: bool = True):
        W = np.array(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise DomainError("W must be square")
        off = W - np.diag(np.diag(W))
        if check and np.any(off < 0):
            raise DomainError("off-diagonal rates must be non-negative")
        W = off - np.diag(off.sum(axis=0))
        object.__setattr__(self, "W", W)

    @classmethod
    def from_rates(cls, rates) -> "RateMatrix":
        """Build from off-diagonal rates only; the diagonal is filled in."""
        return cls(rates)

    @property
    def n(self) -> int:
        return self.W.shape[0]


def bath_rates(E, w_bath, T_B: float, w_drive=None) -> RateMatrix:
    """
    W_nm = w^eps_nm + 2 w^beta_nm / (1 + e^((E_n - E_m)/T_B)).

    ``w_bath`` is the symmetric coupling to the bath; ``w_drive`` is an optional
    symmetric driving-induced rate.
    """
    E = np.asarray(E, dtype=float)
    wb = np.asarray(w_bath, dtype=float)
    if not np.allclose(wb, wb.T):
        raise DomainError("bath couplings must be symmetric")
    dE = (E[:, None] - E[None, :]) / T_B
    W = 2 * wb * np.exp(-np.logaddexp(0.0, dE))
    if w_drive is not None:
        wd = np.asarray(w_drive, dtype=float)
        if not np.allclose(wd, wd.T):
            raise DomainError("driving rates must be symmetric")
        W = W + wd
    np.fill_diagonal(W, 0.0)
    return RateMatrix(W)


def _uniformized_propagator(W: np.ndarray, t: float) -> np.ndarray:
    """
    e^(W t) as a non-negative matrix: uniformization on a short interval
    followed by repeated squaring.
    """
    n = W.shape[0]
    lam = max(float(np.max(-np.diag(W))), 1e-300)
    k = max(0, math.ceil(math.log2(max(lam * t, 1e-300))) + 1)
    h = t / 2**k
    P = np.eye(n) + W / lam  # stochastic matrix, entries >= 0
    P = np.maximum(P, 0.0)
    a = lam * h  # <= 1
    term = np.eye(n)
    weight = math.exp(-a)
    M = weight * term
    j = 0
    while True:
        j += 1
        term = P @ term
        weight *= a / j
        M += weight * term
        if weight < 1e-18:
            break
    for _ in range(k):
        M = M @ M
        # columns of the exact propagator sum to one; stop rounding from doubling with each squaring
        M /= M.sum(axis=0)
    return M


def rate_evolve(W: RateMatrix, p0, t: float) -> np.ndarray:
    """
    p(t) = e^(W t) p0.

    The propagator is built from non-negative pieces only, so p stays
    non-negative, and its columns sum to one up to rounding.
    """
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (W.n,) or np.any(p0 < 0) or not math.isclose(p0.sum(), 1.0, abs_tol=1e-12):
        raise DomainError("p0 must be a probability vector of matching size")
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        return p0.copy()
    return _uniformized_propagator(W.W, t) @ p0


def closed_classes(W: RateMatrix) -> List[List[int]]:
    """Closed communicating classes; each supports exactly one stationary state."""
    adj = (W.W.T > 0).astype(int)  # adj[m, n] = 1 when m -> n is allowed
    np.fill_diagonal(adj, 0)
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    closed = []
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        outside = np.setdiff1d(np.arange(W.n), members)
        if not np.any(adj[np.ix_(members, outside)]):
            closed.append(members.tolist())
    return closed


def rate_steady_state(W: RateMatrix, tol: float = 1e-12) -> np.ndarray:
    """
    Normalized null vector of W.

    Raises
    ------
    SingularRateMatrix
        If the stationary space is not one dimensional; ``components`` lists
        the closed classes.
    """
    classes = closed_classes(W)
    if len(classes) != 1:
        raise SingularRateMatrix(f"{len(classes)} closed classes, stationary state not unique", classes)
    n = W.n
    if n <= 200:
        # replace one balance equation by the normalization
        A = W.W.copy()
        A[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        p = np.linalg.solve(A, rhs)
    else:
        lam = float(np.max(-np.diag(W.W)))
        M = _uniformized_propagator(W.W, 10.0 / lam)
        p = np.full(n, 1.0 / n)
        for _ in range(100_000):
            q = M @ p
            q /= q.sum()
            if np.max(np.abs(q - p)) < tol:
                p = q
                break
            p = q
    p = np.maximum(p, 0.0)
    return p / p.sum()


def kl_divergence(p, q) -> float:
    p, q = np.asarray(p, float), np.asarray(q, float)
    m = p > 0
    return float(np.sum(p[m] * np.log(p[m] / q[m])))


def two_level_polarization(w_up: float, w_down: float, s0: float, t: float) -> float:
    """S_z(t) solving dS/dt = (w_up - w_down) - (w_up + w_down) S, with w_up the rate - -> +."""
    g = w_up + w_down
    s_eq = (w_up - w_down) / g
    return s_eq + (s0 - s_eq) * math.exp(-g * t)
