"""
Scattering-matrix transport.

Units are e = hbar = 1. Conductances are dimensionless, in units of
e^2/(2 pi hbar); currents carry the explicit 1/(2 pi), so a two-lead
conductor gives I_B = -(G / 2 pi)(V_B - V_A).
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy import constants

from .errors import BranchError, DomainError, StepError, UnitarityError
from .numerics import RandomStream, Tolerance, integrate

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class ScatteringMatrix:
    """Unitary S with a partition of channel indices into named leads."""

    S: np.ndarray
    leads: Dict[str, tuple]

    def __init__(self, S, leads: Dict[str, Sequence[int]], tol: float = UNITARITY_TOL):
        S = np.asarray(S, dtype=complex)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DomainError("S must be square")
        check_unitary(S, tol)
        leads = {name: tuple(int(i) for i in idx) for name, idx in leads.items()}
        used = sorted(i for idx in leads.values() for i in idx)
        if used != list(range(S.shape[0])):
            raise DomainError("leads must partition the channels exactly once")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "leads", leads)

    def projector(self, lead: str) -> np.ndarray:
        P = np.zeros(self.S.shape[0])
        P[list(self.leads[lead])] = 1.0
        return np.diag(P)

    @property
    def g(self) -> np.ndarray:
        """Transmission probabilities g_ba = |S_ba|^2."""
        return np.abs(self.S) ** 2


def check_unitary(S, tol: float = UNITARITY_TOL) -> float:
    """||S^+ S - 1|| (max entry); UnitarityError above tol."""
    S = np.asarray(S, dtype=complex)
    dev = float(np.max(np.abs(S.conj().T @ S - np.eye(S.shape[0]))))
    if dev > tol:
        raise UnitarityError(f"S is not unitary (deviation {dev:.3g})")
    return dev


def random_unitary(n: int, stream: Optional[RandomStream] = None) -> np.ndarray:
    """Haar unitary from the QR factorization of a complex Gaussian matrix."""
    rng = (stream or RandomStream(0)).generator()
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def to_siemens(G: float) -> float:
    """Convert a conductance in units of e^2/(2 pi hbar) to siemens."""
    return G * constants.e**2 / constants.h


# ---------------------------------------------------------------- Landauer

@dataclass(frozen=True)
class Landauer:
    """G with its two evaluations: the double sum of |S_ba|^2 and trace(P_B S P_A S^+)."""

    G: float
    G_sum: float
    G_trace: float


def landauer_conductance(sm: ScatteringMatrix, lead_a: str, lead_b: str) -> Landauer:
    A, B = list(sm.leads[lead_a]), list(sm.leads[lead_b])
    g_sum = float(np.sum(sm.g[np.ix_(B, A)]))
    PA, PB = sm.projector(lead_a), sm.projector(lead_b)
    tr = np.trace(PB @ sm.S @ PA @ sm.S.conj().T)
    return Landauer(g_sum, g_sum, float(tr.real))


def multi_lead_currents(sm: ScatteringMatrix, potentials: Dict[str, float]) -> Dict[str, float]:
    """
    I_b = -(1/2pi) sum_{b in lead} sum_a g_ba (V_b - V_a), summed per lead.

    Every lead needs a potential. Unitarity makes the currents sum to zero.
    """
    if set(potentials) != set(sm.leads):
        raise DomainError("give one potential per lead")
    n = sm.S.shape[0]
    V = np.empty(n)
    for name, idx in sm.leads.items():
        V[list(idx)] = potentials[name]
    g = sm.g
    per_channel = -(g * (V[:, None] - V[None, :])).sum(axis=1) / (2 * math.pi)
    return {name: float(per_channel[list(idx)].sum()) for name, idx in sm.leads.items()}


def channel_current(S_of_E: Callable, leads: Dict[str, Sequence[int]], occupations: Dict[str, Callable],
                    E_range, points=None, tol: Tolerance = Tolerance(abs=1e-12, rel=1e-10)) -> Dict[str, float]:
    """
    I_b = (1/2pi) int dE sum_{b in lead} sum_a g_ba(E) (f_a(E) - f_b(E)).

    ``occupations`` maps each lead to f(E) in [0, 1]. ``points`` lists energies
    where an occupation jumps, so the quadrature splits there.
    """
    E1, E2 = E_range
    names = list(leads)
    chan_lead = {}
    for name, idx in leads.items():
        for i in idx:
            chan_lead[int(i)] = name

    def integrand(E, name):
        S = np.asarray(S_of_E(E), dtype=complex)
        g = np.abs(S) ** 2
        f = np.array([occupations[chan_lead[i]](E) for i in range(S.shape[0])], dtype=float)
        rows = list(leads[name])
        return float(np.sum(g[rows, :] * (f[None, :] - f[rows, None])))

    pts = sorted(p for p in (points or ()) if E1 < p < E2)
    edges = [E1] + pts + [E2]
    out = {}
    for name in names:
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            total += integrate(lambda E: integrand(E, name), a, b, tol)
        out[name] = total / (2 * math.pi)
    return out


# ---------------------------------------------------------------- derivatives

def richardson_derivative(F: Callable, x: float, step: Optional[float] = None, scale: float = 1.0,
                          noise_tol: float = 1e-6, levels: int = 8) -> np.ndarray:
    """
    dF/dx by central differences extrapolated in a Richardson tableau.

    The initial step is 1e-4 * scale and is halved at each level. Each new
    tableau entry comes with an error estimate; the entry with the smallest one
    is returned, and the loop stops once rounding noise makes the estimates
    worse. StepError if the best error exceeds ``noise_tol`` relative to
    max(|dF/dx|, |F| / scale), which flags a noisy or non-smooth F.
    """
    h = step if step is not None else 1e-4 * scale
    if not h > 0:
        raise DomainError("step must be positive")

    def central(hh):
        # use the step the floating-point grid actually takes
        xp, xm = x + hh, x - hh
        return (np.asarray(F(xp)) - np.asarray(F(xm))) / (xp - xm)

    F0 = float(np.max(np.abs(np.asarray(F(x)))))
    table = [[central(h)]]
    best, best_err = table[0][0], np.inf
    for i in range(1, levels):
        h /= 2
        row = [central(h)]
        for j in range(1, i + 1):
            f4 = 4.0**j
            row.append((f4 * row[j - 1] - table[i - 1][j - 1]) / (f4 - 1))
            err = max(float(np.max(np.abs(row[j] - row[j - 1]))),
                      float(np.max(np.abs(row[j] - table[i - 1][j - 1]))))
            if err < best_err:
                best, best_err = row[j], err
        table.append(row)
        if float(np.max(np.abs(row[i] - table[i - 1][i - 1]))) >= 2 * best_err:
            break
    size = max(float(np.max(np.abs(best))), F0 / scale, 1e-300)
    if best_err > noise_tol * size:
        raise StepError(f"finite-difference derivative did not settle (relative error {best_err / size:.2g}); "
                        "S(X) may be noisy or non-smooth")
    return best


# ---------------------------------------------------------------- BPT pumping

@dataclass(frozen=True)
class BPT:
    """G(X) with the discarded imaginary part and the anti-Hermitian residue of i dS S^+."""

    G: float
    imag_residue: float
    hermiticity: float


def _generator(S_of_X, X, step, scale):
    S = np.asarray(S_of_X(X), dtype=complex)
    dS = richardson_derivative(lambda x: np.asarray(S_of_X(x), dtype=complex), X, step, scale)
    return 1j * dS @ S.conj().T


def bpt_conductance(S_of_X: Callable, X0: float, channels: Sequence[int], step: Optional[float] = None,
                    scale: float = 1.0) -> BPT:
    """G(X) = -(1/2pi) trace(P_A H), with H = i dS/dX S^+ (Hermitian for unitary S)."""
    Hgen = _generator(S_of_X, X0, step, scale)
    idx = list(channels)
    tr = np.trace(Hgen[np.ix_(idx, idx)])
    herm = float(np.max(np.abs(Hgen - Hgen.conj().T)))
    return BPT(float(-tr.real / (2 * math.pi)), float(abs(tr.imag) / (2 * math.pi)), herm)


@dataclass(frozen=True)
class PumpedCharge:
    """Q over one cycle with n samples, and the change from the n/2 estimate."""

    Q: float
    n: int
    convergence: float


def pumped_charge(S_of_X: Callable, path: Callable, channels: Sequence[int], n: int = 256,
                  scale: float = 1.0) -> PumpedCharge:
    """
    Q = -oint G dX for a cycle t in [0, 1] -> X(t) (scalar or vector) along
    which S(X(1)) = S(X(0)); X itself may wind, as a phase does.

    The integrand is G along the path, -(1/2pi) trace(P_A i dS/dt S^+), sampled at
    n equally spaced t; for a periodic integrand the trapezoid rule is spectrally
    accurate. ``convergence`` is |Q(n) - Q(n/2)|.
    """
    if n < 8:
        raise DomainError("need at least 8 samples per cycle")
    S_t = lambda t: np.asarray(S_of_X(path(t)), dtype=complex)
    if np.max(np.abs(S_t(0.0) - S_t(1.0))) > 1e-10:
        raise DomainError("S must return to itself at the end of the cycle")
    idx = list(channels)

    def g_t(t):
        Hgen = _generator(S_t, t, None, scale=1e-2)
        return -np.trace(Hgen[np.ix_(idx, idx)]).real / (2 * math.pi)

    vals = np.array([g_t(t) for t in np.arange(n) / n])
    Q = -float(vals.mean())
    Q_half = -float(vals[::2].mean())
    return PumpedCharge(Q, n, abs(Q - Q_half))


def pumped_charge_sampled(S_samples, channels: Sequence[int]) -> PumpedCharge:
    """
    Pumped charge from S sampled at n equally spaced points of one cycle.

    dS/dt comes from periodic spectral differentiation of the samples, so a
    smooth cycle converges quickly in n. ``convergence`` compares with every
    second sample.
    """
    S = np.asarray(S_samples, dtype=complex)
    if S.ndim != 3 or S.shape[1] != S.shape[2] or S.shape[0] < 8:
        raise DomainError("need at least 8 square S matrices along the cycle")
    for Sk in S:
        check_unitary(Sk)
    idx = list(channels)

    def charge(Sc):
        n = Sc.shape[0]
        k = np.fft.fftfreq(n, d=1.0 / n)
        if n % 2 == 0:
            k[n // 2] = 0.0
        dS = np.fft.ifft(2j * math.pi * k[:, None, None] * np.fft.fft(Sc, axis=0), axis=0)
        Hgen = 1j * dS @ np.conj(np.transpose(Sc, (0, 2, 1)))
        G = -np.trace(Hgen[:, idx][:, :, idx], axis1=1, axis2=2).real / (2 * math.pi)
        return -float(G.mean())

    Q = charge(S)
    return PumpedCharge(Q, S.shape[0], abs(Q - charge(S[::2])))


# ---------------------------------------------------------------- Friedel

@dataclass(frozen=True)
class Friedel:
    """Change in the number of states from the trace integral and from eigenphase winding."""

    trace_route: float
    eigenphase_route: float

    @property
    def difference(self) -> float:
        return abs(self.trace_route - self.eigenphase_route)


def eigenphase_winding(S_of_E: Callable, E1: float, E2: float, n: int = 2000, min_width: float = 1e-13) -> float:
    """
    Sum of eigenphase changes over (E1, E2) divided by 2 pi.

    Follows arg det S along an n-point grid, bisecting any interval where the
    phase moves by more than pi/4. BranchError if an interval shrinks below
    ``min_width`` times the range without resolving the phase, which happens
    when det S jumps or vanishes.
    """
    def phase(E):
        return float(np.angle(np.linalg.det(np.asarray(S_of_E(E), dtype=complex))))

    def step(a, b, pa, pb, depth=0):
        d = math.remainder(pb - pa, 2 * math.pi)
        if abs(d) < math.pi / 4:
            return d
        if b - a < min_width * (E2 - E1) or depth > 60:
            raise BranchError(f"eigenphase unwrapping failed near E = {a:.12g}")
        m = 0.5 * (a + b)
        pm = phase(m)
        return step(a, m, pa, pm, depth + 1) + step(m, b, pm, pb, depth + 1)

    E = np.linspace(E1, E2, n + 1)
    ph = [phase(e) for e in E]
    total = sum(step(E[i], E[i + 1], ph[i], ph[i + 1]) for i in range(n))
    return total / (2 * math.pi)


def friedel_counting(S_of_E: Callable, E1: float, E2: float, points=None, scale: float = 1.0,
                     tol: Tolerance = Tolerance(abs=1e-11, rel=1e-10, max_evals=200_000)) -> Friedel:
    """
    dN = -(i/2pi) trace(dS/dE S^+) dE integrated over (E1, E2), and the
    eigenphase-winding count of the same change.

    ``points`` marks narrow resonances for the quadrature; ``scale`` sets the
    finite-difference step (1e-4 * scale).
    """
    if not E1 < E2:
        raise DomainError("need E1 < E2")

    def density(E):
        # -(i/2pi) tr(dS S^+) = -(1/2pi) tr(i dS S^+)
        Hgen = _generator(S_of_E, E, None, scale)
        return -float(np.trace(Hgen).real) / (2 * math.pi)

    pts = sorted(p for p in (points or ()) if E1 < p < E2)
    edges = [E1] + pts + [E2]
    total = sum(integrate(density, a, b, tol) for a, b in zip(edges[:-1], edges[1:]))
    return Friedel(total, eigenphase_winding(S_of_E, E1, E2))


def wall_delta_s_matrix(k: float, a: float, u: float) -> np.ndarray:
    """
    1x1 S for a half line with a hard wall at 0 and a delta barrier of strength
    u at x = a, in units with E = k^2.

    Phases are referred to the barrier: outside, psi ~ e^{-ik(x-a)} + S e^{ik(x-a)}.
    A strong barrier gives sharp cavity resonances near ka = n pi, each winding
    the phase of S once.
    """
    ka = k * a
    s = math.sin(ka)
    return np.array([[-(k * np.exp(1j * ka) + u * s) / (k * np.exp(-1j * ka) + u * s)]])
