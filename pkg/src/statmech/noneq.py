"""
Fluctuation theorems away from equilibrium.

Exact two-point-measurement work kernels for driven finite quantum systems,
Crooks and Jarzynski checks, utilities for beta-symmetric distributions, and
trajectory sampling of heat flow through a conductor between two baths.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, OverflowGuard, SupportMismatch
from .numerics import RandomStream
from .stochastic import RateMatrix, bath_rates, rate_steady_state


# ---------------------------------------------------------------- protocols

def _hermitian(H, what="H"):
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"{what} must be a square matrix")
    if np.max(np.abs(H - H.conj().T)) > 1e-12 * max(1.0, float(np.max(np.abs(H)))):
        raise DomainError(f"{what} must be Hermitian")
    return H


@dataclass(frozen=True)
class Protocol:
    """
    Driving H(lambda) with lambda(t) = schedule(t / t_f), schedule(0) = 0 and schedule(1) = 1.

    ``t_f = 0`` is a sudden quench. ``n_steps`` sets the piecewise-constant
    propagation grid (midpoint values of H).
    """

    H_of_lambda: Callable[[float], np.ndarray]
    t_f: float
    schedule: Callable[[float], float] = lambda u: u
    n_steps: Optional[int] = None

    def __post_init__(self):
        if self.t_f < 0:
            raise DomainError("t_f must be non-negative")
        if abs(self.schedule(0.0)) > 1e-12 or abs(self.schedule(1.0) - 1.0) > 1e-12:
            raise DomainError("schedule must map [0, 1] onto [0, 1]")
        _hermitian(self.H_of_lambda(0.0), "H(0)")
        _hermitian(self.H_of_lambda(1.0), "H(1)")

    @classmethod
    def linear(cls, HA, HB, t_f: float, schedule=None, n_steps: Optional[int] = None) -> "Protocol":
        """H(lambda) = (1 - lambda) H_A + lambda H_B."""
        HA, HB = _hermitian(HA, "H_A"), _hermitian(HB, "H_B")
        if HA.shape != HB.shape:
            raise DomainError("endpoint Hamiltonians differ in size")
        return cls(lambda lam: (1 - lam) * HA + lam * HB, t_f, schedule or (lambda u: u), n_steps)

    @property
    def HA(self) -> np.ndarray:
        return _hermitian(self.H_of_lambda(0.0))

    @property
    def HB(self) -> np.ndarray:
        return _hermitian(self.H_of_lambda(1.0))

    def reversed(self) -> "Protocol":
        """The time-reversed protocol: H*(lambda(t_f - t)), run from B to A."""
        H, s = self.H_of_lambda, self.schedule
        return Protocol(lambda lam: np.conj(np.asarray(H(1.0 - lam), dtype=complex)), self.t_f,
                        lambda u: 1.0 - s(1.0 - u), self.n_steps)

    def steps(self) -> int:
        if self.n_steps is not None:
            return int(self.n_steps)
        if self.t_f == 0:
            return 0
        # symmetric in the endpoints, so a protocol and its reverse share the grid
        scale = 1e-12
        for H in (self.HA, self.HB):
            w = np.linalg.eigvalsh(H)
            scale = max(scale, float(w[-1] - w[0]), float(np.max(np.abs(w))))
        return max(64, int(math.ceil(40 * self.t_f * scale)))

    def propagator(self) -> np.ndarray:
        """U = prod_k exp(-i H(lambda(t_k)) dt) over midpoints t_k, latest on the left."""
        n = self.HA.shape[0]
        N = self.steps()
        U = np.eye(n, dtype=complex)
        if N == 0:
            return U
        dt = self.t_f / N
        for k in range(N):
            H = _hermitian(self.H_of_lambda(self.schedule((k + 0.5) / N)))
            w, v = np.linalg.eigh(H)
            U = (v * np.exp(-1j * w * dt)) @ v.conj().T @ U
        return U


# ---------------------------------------------------------------- work statistics

@dataclass(frozen=True)
class WorkSampleSet:
    """Work samples (or support points with weights) at inverse temperature beta."""

    samples: np.ndarray
    beta: float
    dF: Optional[float] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size == 0:
            raise DomainError("no work samples")
        if not np.all(np.isfinite(s)):
            raise DomainError("work samples must be finite")
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        object.__setattr__(self, "samples", s)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape != s.shape or np.any(w < 0):
                raise DomainError("weights must be non-negative, one per sample")
            object.__setattr__(self, "weights", w / w.sum())

    @property
    def T(self) -> float:
        return 1.0 / self.beta


@dataclass(frozen=True)
class WorkKernel:
    """
    Exact distribution of W = E_m(B) - E_n(A): support ``W`` (merged, sorted)
    with ``weights``, plus the transition matrix ``P[m, n]`` and both spectra.
    """

    W: np.ndarray
    weights: np.ndarray
    P: np.ndarray
    EA: np.ndarray
    EB: np.ndarray
    T0: float

    @property
    def dF(self) -> float:
        """F(B) - F(A) = -T0 ln(Z_B / Z_A)."""
        b = 1.0 / self.T0
        return -self.T0 * (logsumexp(-b * self.EB) - logsumexp(-b * self.EA))

    def as_samples(self) -> WorkSampleSet:
        return WorkSampleSet(self.W, 1.0 / self.T0, self.dF, self.weights)

    def sample(self, n: int, stream: RandomStream) -> WorkSampleSet:
        rng = stream.generator()
        idx = rng.choice(self.W.size, size=n, p=self.weights)
        return WorkSampleSet(self.W[idx], 1.0 / self.T0, self.dF)


def canonical_probabilities(E, T: float) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    x = -(E - E.min()) / T
    return np.exp(x - logsumexp(x))


def merge_support(values, weights, tol: float = 1e-9):
    """Sort ``values`` and sum the weights of points closer than ``tol``."""
    order = np.argsort(values, kind="stable")
    v, w = np.asarray(values)[order], np.asarray(weights)[order]
    out_v, out_w = [v[0]], [w[0]]
    for x, y in zip(v[1:], w[1:]):
        if x - out_v[-1] <= tol * max(1.0, abs(x)):
            out_w[-1] += y
        else:
            out_v.append(x)
            out_w.append(y)
    return np.array(out_v), np.array(out_w)


def work_distribution(p: Protocol, T0: float, max_dim: int = 20) -> WorkKernel:
    """
    Two-point-measurement work kernel, starting canonical at T0 in H(0).

    Weights are p_n(A) |<m(B)|U|n(A)>|^2 at W = E_m(B) - E_n(A); coincident W
    values are merged.
    """
    if not T0 > 0:
        raise DomainError("T0 must be positive")
    HA, HB = p.HA, p.HB
    if HA.shape[0] > max_dim:
        raise DomainError(f"exact kernel limited to dimension {max_dim}")
    EA, VA = np.linalg.eigh(HA)
    EB, VB = np.linalg.eigh(HB)
    U = p.propagator()
    P = np.abs(VB.conj().T @ U @ VA) ** 2  # P[m, n]
    pA = canonical_probabilities(EA, T0)
    W = (EB[:, None] - EA[None, :]).ravel()
    w = (P * pA[None, :]).ravel()
    Wm, wm = merge_support(W, w)
    return WorkKernel(Wm, wm, P, EA, EB, T0)


@dataclass(frozen=True)
class CrooksCheck:
    """Pointwise log-ratio log P_F(W) / P_R(-W) against (W - dF) / T0."""

    W: np.ndarray
    log_ratio: np.ndarray
    expected: np.ndarray
    residual: float
    zscore: Optional[np.ndarray] = None


def crooks_check(forward, reverse, T0: Optional[float] = None, dF: Optional[float] = None,
                 tol: float = 1e-9, min_count: int = 20, bins=None) -> CrooksCheck:
    """
    Compare P_F(W) / P_R(-W) with exp[(W - dF) / T0].

    With two WorkKernel inputs the check is pointwise over the exact support
    (SupportMismatch if a forward point has no mirror). With two sampled
    WorkSampleSets the samples are histogrammed on mirrored bins and only
    bins with at least ``min_count`` counts on both sides are compared;
    ``zscore`` gives each deviation in units of its binomial error.
    """
    if isinstance(forward, WorkKernel) and isinstance(reverse, WorkKernel):
        T0 = forward.T0 if T0 is None else T0
        if abs(reverse.T0 - forward.T0) > 1e-12 * forward.T0:
            raise DomainError("forward and reverse kernels must share T0")
        dF = forward.dF if dF is None else dF
        Ws, lr = [], []
        for W, pf in zip(forward.W, forward.weights):
            if pf < 1e-300:
                continue
            j = np.flatnonzero(np.abs(reverse.W + W) <= tol * max(1.0, abs(W)))
            if j.size == 0 or reverse.weights[j[0]] < 1e-300:
                raise SupportMismatch(f"reverse kernel has no weight at W = {-W:.6g}")
            Ws.append(W)
            lr.append(math.log(pf) - math.log(reverse.weights[j[0]]))
        Ws, lr = np.array(Ws), np.array(lr)
        exp_ = (Ws - dF) / T0
        return CrooksCheck(Ws, lr, exp_, float(np.max(np.abs(lr - exp_))))

    f, r = forward, reverse
    if not (isinstance(f, WorkSampleSet) and isinstance(r, WorkSampleSet)):
        raise DomainError("give two WorkKernels or two WorkSampleSets")
    T0 = f.T if T0 is None else T0
    if dF is None:
        dF = f.dF
    if dF is None:
        raise DomainError("sampled mode needs dF")
    edges = _mirrored_edges(np.concatenate([f.samples, -r.samples]), bins)
    nf, _ = np.histogram(f.samples, edges)
    nr, _ = np.histogram(-r.samples, edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    ok = (nf >= min_count) & (nr >= min_count)
    if not np.any(ok):
        raise SupportMismatch("no bin has enough counts in both directions")
    lr = np.log(nf[ok] / f.samples.size) - np.log(nr[ok] / r.samples.size)
    exp_ = (centers[ok] - dF) / T0
    err = np.sqrt(1.0 / nf[ok] + 1.0 / nr[ok])
    return CrooksCheck(centers[ok], lr, exp_, float(np.max(np.abs(lr - exp_))), (lr - exp_) / err)


def lattice_spacing(x, tol: float = 1e-9) -> Optional[float]:
    """Spacing d if every value is an integer multiple of d (values on a lattice through 0)."""
    u = np.unique(np.abs(np.asarray(x, dtype=float)))
    u = u[u > tol]
    if u.size == 0:
        return None
    d = float(np.min(np.diff(np.concatenate([[0.0], u]))))
    if d <= tol:
        return None
    k = u / d
    return d if np.all(np.abs(k - np.round(k)) < 1e-6) else None


def _mirrored_edges(x, bins=None):
    """
    Freedman-Diaconis bins centred on multiples of the width, so bin k mirrors
    bin -k. For lattice-valued data the width is snapped to an odd multiple of
    the spacing, which centres every bin on a lattice point.
    """
    x = np.asarray(x, dtype=float)
    if bins is None:
        q75, q25 = np.percentile(x, [75, 25])
        width = 2 * (q75 - q25) * x.size ** (-1 / 3)
        if not width > 0:
            width = max(float(np.ptp(x)), 1.0) / 10
        d = lattice_spacing(x)
        if d is not None:
            j = max(1, int(round(width / d)))
            width = d * (j if j % 2 == 1 else j + 1)
    else:
        width = float(bins)
    kmax = int(math.ceil(np.max(np.abs(x)) / width)) + 1
    return (np.arange(-kmax, kmax + 2) - 0.5) * width


@dataclass(frozen=True)
class JarzynskiEstimate:
    """Free-energy estimate, its jackknife bias and error, and <W> - dF_hat."""

    dF: float
    error: float
    bias: float
    mean_work: float

    @property
    def dissipated(self) -> float:
        return self.mean_work - self.dF

    @property
    def max_work_ok(self) -> bool:
        return self.dissipated >= -3 * self.error - 1e-12


def jarzynski_estimate(w: WorkSampleSet) -> JarzynskiEstimate:
    """dF_hat = -T0 ln <exp(-W / T0)>; jackknife error for unweighted samples."""
    x = -w.beta * w.samples
    if w.weights is not None:
        mask = w.weights > 0
        lse = logsumexp(x[mask], b=w.weights[mask])
        return JarzynskiEstimate(-lse / w.beta, 0.0, 0.0, float(np.dot(w.weights, w.samples)))
    n = x.size
    lse = logsumexp(x) - math.log(n)
    dF = -lse / w.beta
    if n < 2:
        return JarzynskiEstimate(dF, math.inf, 0.0, float(w.samples.mean()))
    m = x.max()
    s = np.exp(x - m)
    total = s.sum()
    loo = m + np.log(np.maximum(total - s, total * 1e-300)) - math.log(n - 1)
    dF_loo = -loo / w.beta
    bias = (n - 1) * (dF_loo.mean() - dF)
    err = math.sqrt((n - 1) / n * np.sum((dF_loo - dF_loo.mean()) ** 2))
    return JarzynskiEstimate(dF, err, bias, float(w.samples.mean()))


# ---------------------------------------------------------------- beta symmetry

@dataclass(frozen=True)
class BetaSymmetry:
    """
    g(lambda) = ln <exp(-lambda s)> on ``lam``, with g(beta - lambda) - g(lambda),
    the convex average g(beta), and <s> - beta Var(s) / 2.
    """

    lam: np.ndarray
    g: np.ndarray
    symmetry_residual: np.ndarray
    convex_average: float
    gaussian_fd: float


def cumulant_generating(s, lam, weights=None, guard: float = 0.5) -> np.ndarray:
    """
    ln <exp(-lambda s)> for each lambda.

    For unweighted samples, OverflowGuard if a single sample carries more than
    ``guard`` of the exponential weight, since the estimate is then set by one
    extreme tail event.
    """
    s = np.asarray(s, dtype=float)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    X = -lam[:, None] * s[None, :]
    if weights is None:
        lse = logsumexp(X, axis=1)
        dominance = np.max(np.exp(X - lse[:, None]), axis=1)
        if s.size > 1 and np.any(dominance > guard):
            raise OverflowGuard("exponential average dominated by a single sample")
        return lse - math.log(s.size)
    w = np.asarray(weights, dtype=float)
    mask = w > 0
    return logsumexp(X[:, mask], b=w[mask][None, :], axis=1)


def beta_symmetry_tools(data, beta: float, lam=None, weights=None) -> BetaSymmetry:
    """
    Diagnostics of P(-s) = exp(-beta s) P(s).

    ``data`` is an array of samples, a WorkSampleSet (weights are used if
    present), or a pair (values, weights) for an exact discrete distribution.
    """
    if isinstance(data, WorkSampleSet):
        s, weights = data.samples, data.weights
    elif isinstance(data, tuple):
        s, weights = np.asarray(data[0], dtype=float), np.asarray(data[1], dtype=float)
    else:
        s = np.asarray(data, dtype=float)
    if lam is None:
        lam = np.linspace(0.0, beta, 21)
    lam = np.asarray(lam, dtype=float)
    g = cumulant_generating(s, lam, weights)
    g_mirror = cumulant_generating(s, beta - lam, weights)
    convex = float(cumulant_generating(s, [beta], weights)[0])
    if weights is None:
        mean, var = float(s.mean()), float(s.var(ddof=1)) if s.size > 1 else 0.0
    else:
        w = np.asarray(weights, dtype=float) / np.sum(weights)
        mean = float(np.dot(w, s))
        var = float(np.dot(w, (s - mean) ** 2))
    return BetaSymmetry(lam, g, g_mirror - g, convex, mean - 0.5 * beta * var)


# ---------------------------------------------------------------- two-bath heat conduction

@dataclass(frozen=True)
class TwoBathModel:
    """
    Conductor levels E coupled to a hot and a cold bath.

    ``rates[b]`` is the RateMatrix induced by bath b alone; each satisfies
    detailed balance at ``T[b]``. Baths are labelled "H" and "C".
    """

    E: np.ndarray
    rates: Dict[str, RateMatrix]
    T: Dict[str, float]

    @classmethod
    def from_couplings(cls, E, w_hot, T_hot: float, w_cold, T_cold: float) -> "TwoBathModel":
        E = np.asarray(E, dtype=float)
        if not (T_hot > 0 and T_cold > 0):
            raise DomainError("bath temperatures must be positive")
        return cls(E, {"H": bath_rates(E, w_hot, T_hot), "C": bath_rates(E, w_cold, T_cold)},
                   {"H": float(T_hot), "C": float(T_cold)})

    @property
    def total(self) -> RateMatrix:
        return RateMatrix(self.rates["H"].W + self.rates["C"].W)

    @property
    def mean_T(self) -> float:
        return 0.5 * (self.T["H"] + self.T["C"])

    @property
    def affinity(self) -> float:
        """1/T_C - 1/T_H."""
        return 1.0 / self.T["C"] - 1.0 / self.T["H"]

    def off_diagonal(self, bath: str) -> np.ndarray:
        W = self.rates[bath].W.copy()
        np.fill_diagonal(W, 0.0)
        return W


def sample_heat(model: TwoBathModel, t: float, n_traj: int, stream: RandomStream, p0=None,
                n_chunks: int = 4):
    """
    Gillespie trajectories of duration t.

    Returns (Q_H, Q_C): heat taken from each bath into the conductor, where a
    jump m -> n induced by bath b adds E_n - E_m to Q_b. Initial states are
    drawn from p0 (default: the steady state). Trajectories are split over
    ``n_chunks`` independent sub-streams.
    """
    if t <= 0 or n_traj < 1:
        raise DomainError("need t > 0 and at least one trajectory")
    n = model.E.size
    p0 = rate_steady_state(model.total) if p0 is None else np.asarray(p0, dtype=float)
    WH, WC = model.off_diagonal("H"), model.off_diagonal("C")
    # per source state m: flat table of (bath, target) transitions
    R = np.concatenate([WH.T, WC.T], axis=1)  # R[m, b*n + k]
    escape = R.sum(axis=1)
    cum = np.cumsum(R, axis=1) / np.where(escape > 0, escape, 1.0)[:, None]
    dE = model.E[None, :] - model.E[:, None]  # dE[m, k] = E_k - E_m
    sizes = [n_traj // n_chunks + (1 if i < n_traj % n_chunks else 0) for i in range(n_chunks)]
    QH, QC = [], []
    for size, sub in zip(sizes, stream.split(n_chunks)):
        if size == 0:
            continue
        rng = sub.generator()
        s = rng.choice(n, size=size, p=p0 / p0.sum())
        clock = np.zeros(size)
        qh, qc = np.zeros(size), np.zeros(size)
        active = np.flatnonzero(escape[s] > 0)
        while active.size:
            m = s[active]
            clock[active] += rng.exponential(1.0 / escape[m])
            active = active[clock[active] < t]
            if not active.size:
                break
            m = s[active]
            u = rng.random(active.size)
            j = np.minimum((cum[m] < u[:, None]).sum(axis=1), 2 * n - 1)
            bath, k = np.divmod(j, n)
            q = dE[m, k]
            qh[active] += np.where(bath == 0, q, 0.0)
            qc[active] += np.where(bath == 1, q, 0.0)
            s[active] = k
            active = active[escape[k] > 0]
        QH.append(qh)
        QC.append(qc)
    return np.concatenate(QH), np.concatenate(QC)


def heat_counting_statistics(model: TwoBathModel, lam) -> np.ndarray:
    """
    Long-time cumulant generating rate g(lambda) = lim ln <exp(-lambda Q)> / t
    for Q = (Q_H - Q_C) / 2, from the largest eigenvalue of the tilted rate matrix.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    WH, WC = model.off_diagonal("H"), model.off_diagonal("C")
    diag = np.diag(model.total.W)
    dE = model.E[:, None] - model.E[None, :]  # dE[n, m] = E_n - E_m for m -> n
    out = np.empty(lam.size)
    for i, l in enumerate(lam):
        L = WH * np.exp(-l * dE / 2) + WC * np.exp(l * dE / 2) + np.diag(diag)
        out[i] = np.max(np.linalg.eigvals(L).real)
    return out


def heat_transport_coefficients(model: TwoBathModel, h: float = 1e-3):
    """(<dQ/dt>, nu) in the long-time limit: -g'(0) and g''(0) by fourth-order differences."""
    g = heat_counting_statistics(model, np.array([-2 * h, -h, 0.0, h, 2 * h]))
    d1 = (g[0] - 8 * g[1] + 8 * g[3] - g[4]) / (12 * h)
    d2 = (-g[0] + 16 * g[1] - 30 * g[2] + 16 * g[3] - g[4]) / (12 * h * h)
    return -d1, d2


@dataclass(frozen=True)
class HeatFT:
    """
    Heat-transfer statistics from sampled trajectories.

    ``slope`` (with ``slope_error``) is the fitted log P(Q)/P(-Q) slope, to be
    compared with ``affinity`` = 1/T_C - 1/T_H. ``residual`` is the largest
    deviation of the log-ratio from affinity * Q plus the fitted offset.
    ``K`` = <Q>/(eps t) and ``nu`` = Var(Q)/t; ``K_fd`` = nu / (2 T^2).
    """

    Q: np.ndarray
    edges: np.ndarray
    counts: np.ndarray
    centers: np.ndarray
    log_ratio: np.ndarray
    slope: float
    slope_error: float
    affinity: float
    residual: float
    K: float
    nu: float
    K_fd: float


def heat_conduction_ft(model: TwoBathModel, t: float, n_traj: int, stream: RandomStream,
                       min_count: int = 20, window: float = 2.0, bins=None) -> HeatFT:
    """
    Sample Q = (Q_H - Q_C) / 2 and test P(Q)/P(-Q) = exp[(1/T_C - 1/T_H) Q].

    The log-ratio is fitted by weighted least squares over mirrored bins with at
    least ``min_count`` counts on both sides, inside <Q> +- ``window`` sigma.
    """
    QH, QC = sample_heat(model, t, n_traj, stream)
    Q = 0.5 * (QH - QC)
    mu, sd = float(Q.mean()), float(Q.std(ddof=1))
    edges = _mirrored_edges(Q, bins)
    counts, _ = np.histogram(Q, edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    mirror = counts[::-1]  # bins are symmetric about zero
    ok = (counts >= min_count) & (mirror >= min_count) & (centers > 0) & (np.abs(centers - mu) <= window * sd)
    eps = model.T["H"] - model.T["C"]
    nu = sd**2 / t
    T = model.mean_T
    K = mu / (eps * t) if eps != 0 else math.nan
    aff = model.affinity
    if np.count_nonzero(ok) >= 2:
        x = centers[ok]
        y = np.log(counts[ok] / mirror[ok])
        var = 1.0 / counts[ok] + 1.0 / mirror[ok]
        w = 1.0 / var
        A = np.vstack([x, np.ones_like(x)]).T
        cov = np.linalg.inv(A.T @ (A * w[:, None]))
        slope, icpt = cov @ (A.T @ (w * y))
        slope_err = math.sqrt(cov[0, 0])
        off = np.sum(w * (y - aff * x)) / np.sum(w)
        residual = float(np.max(np.abs(y - aff * x - off)))
    else:
        x = y = np.array([])
        slope = slope_err = residual = math.nan
    return HeatFT(Q, edges, counts, x, y, float(slope), float(slope_err), aff, residual,
                  K, nu, nu / (2 * T * T))


# ---------------------------------------------------------------- trajectory entropy

def path_log_probability(model: TwoBathModel, states: Sequence[int], baths: Sequence[str],
                         dwell: Sequence[float]) -> float:
    """
    ln of the probability density of a path that sits dwell[k] in states[k]
    and then jumps to states[k+1] through baths[k]; the initial-state
    probability is not included.
    """
    if len(dwell) != len(states) or len(baths) != len(states) - 1:
        raise DomainError("need one dwell time per state and one bath per jump")
    escape = -np.diag(model.total.W)
    lp = -float(np.dot(escape[list(states)], dwell))
    for k, b in enumerate(baths):
        m, n = states[k], states[k + 1]
        lp += math.log(model.rates[b].W[n, m])
    return lp


def path_entropy_production(model: TwoBathModel, states: Sequence[int], baths: Sequence[str]) -> float:
    """Sum over jumps m -> n through bath b of (E_m - E_n) / T_b."""
    return float(sum((model.E[states[k]] - model.E[states[k + 1]]) / model.T[b] for k, b in enumerate(baths)))


def reversed_path(states, baths, dwell):
    return list(states)[::-1], list(baths)[::-1], list(dwell)[::-1]
