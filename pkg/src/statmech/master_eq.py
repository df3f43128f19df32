"""
Markovian quantum master equations for finite-dimensional systems.

Density matrices are stored as dense complex arrays and superoperators act on
the row-major flattening of rho, so that vec(A rho B) = (A kron B^T) vec(rho).
The system couples to its bath through -W F, with the bath force correlation
spectrum S(omega) setting the transition rates.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegeneracyError, DomainError, PositivityWarning
from .stochastic import RateMatrix

DENSE_LIMIT = 40


# ---------------------------------------------------------------- baths

@dataclass(frozen=True)
class BathSpectrum:
    """
    Spectrum of the bath force F.

    Parameters
    ----------
    kind : {"ohmic_harmonic", "ohmic_spin", "white_noise", "custom"}
    T : float
        Bath temperature (ignored for white noise).
    eta : float
        Ohmic friction, J(omega) = eta omega e^{-|omega|/omega_c}.
    omega_c : float
        Smooth exponential cutoff.
    nu : float
        White-noise intensity.
    func : callable, optional
        S(omega) for ``kind="custom"``.
    """

    kind: str
    T: float = math.inf
    eta: float = 0.0
    omega_c: float = math.inf
    nu: float = 0.0
    func: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("ohmic_harmonic", "ohmic_spin", "white_noise", "custom"):
            raise DomainError(f"unknown bath kind {self.kind!r}")
        if self.kind == "custom" and self.func is None:
            raise DomainError("custom bath needs func")
        if self.kind.startswith("ohmic") and not self.T > 0:
            raise DomainError("Ohmic bath needs T > 0")

    def J(self, omega):
        """Antisymmetric spectral density eta omega e^{-|omega|/omega_c}."""
        w = np.asarray(omega, dtype=float)
        return self.eta * w * np.exp(-np.abs(w) / self.omega_c)

    def S(self, omega):
        """Fourier transform of <F(t) F(0)>; this is the rate-setting spectrum."""
        w = np.asarray(omega, dtype=float)
        if self.kind == "white_noise":
            return np.full_like(w, self.nu)
        if self.kind == "custom":
            return np.asarray(np.vectorize(self.func)(w), dtype=float)
        x = w / self.T
        small = np.abs(x) < 1e-8
        xs = np.where(small, 1.0, x)
        if self.kind == "ohmic_harmonic":
            # 2 J(w) / (1 - e^{-w/T}); the w -> 0 limit is 2 eta T
            val = 2 * self.J(w) / -np.expm1(-xs)
            return np.where(small, 2 * self.eta * self.T * (1 + x / 2), val)
        # spin bath: 2 J(|w|) / (1 + e^{-w/T})
        return 2 * self.J(np.abs(w)) * np.exp(-np.logaddexp(0.0, -x))


def bath_spectrum_eval(b: BathSpectrum, omega):
    """
    Returns (S(omega), C(omega), A(omega)).

    C is the symmetric part (S(omega) + S(-omega))/2 and A the antisymmetric part
    (S(omega) - S(-omega))/2, which is J(omega) for the harmonic bath.
    """
    s_plus = b.S(omega)
    s_minus = b.S(-np.asarray(omega, dtype=float))
    return s_plus, 0.5 * (s_plus + s_minus), 0.5 * (s_plus - s_minus)


# ---------------------------------------------------------------- superoperators

def _check_hermitian(A, name: str, tol: float = 1e-12) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"{name} must be square")
    if np.max(np.abs(A - A.conj().T), initial=0.0) > tol * max(1.0, np.max(np.abs(A))):
        raise DomainError(f"{name} must be Hermitian")
    return A


def left(A) -> np.ndarray:
    """Superoperator of rho -> A rho."""
    return np.kron(A, np.eye(A.shape[0]))


def right(B) -> np.ndarray:
    """Superoperator of rho -> rho B."""
    return np.kron(np.eye(B.shape[0]), B.T)


def commutator_super(A) -> np.ndarray:
    return left(A) - right(A)


def anticommutator_super(A) -> np.ndarray:
    return left(A) + right(A)


def dissipator_super(L) -> np.ndarray:
    """L rho L^+ - {L^+ L, rho}/2."""
    LdL = L.conj().T @ L
    return np.kron(L, L.conj()) - 0.5 * anticommutator_super(LdL)


@dataclass(frozen=True)
class Generator:
    """
    Linear generator d rho/dt = L rho.

    ``matrix`` is the n^2 x n^2 superoperator. ``jumps`` lists Lindblad jump
    operators when the generator has that form; ``diagnostic`` carries
    generator-specific numbers (for example the Lindblad deviation).
    """

    H: np.ndarray
    matrix: np.ndarray
    jumps: tuple = ()
    diagnostic: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.H.shape[0]

    def apply(self, rho) -> np.ndarray:
        n = self.n
        return (self.matrix @ np.asarray(rho, dtype=complex).reshape(n * n)).reshape(n, n)

    def norm(self) -> float:
        """Induced 1-norm, an upper bound on the spectral radius."""
        return float(np.linalg.norm(self.matrix, 1))

    def evolve(self, rho0, t, step: Optional[float] = None, monitor_every: int = 10):
        return propagate(self, rho0, t, step=step, monitor_every=monitor_every)

    def steady_state(self) -> np.ndarray:
        return steady_state(self)


def lindblad_generator(H, jumps: Sequence = ()) -> Generator:
    """-i[H, rho] + sum_r (W_r rho W_r^+ - {W_r^+ W_r, rho}/2)."""
    H = _check_hermitian(H, "H")
    n = H.shape[0]
    M = -1j * commutator_super(H)
    Ls = []
    for L in jumps:
        L = np.asarray(L, dtype=complex)
        if L.shape != (n, n):
            raise DomainError("jump operators must match H")
        M = M + dissipator_super(L)
        Ls.append(L)
    return Generator(H, M, tuple(Ls))


def white_noise_generator(H, W, nu: float) -> Generator:
    """-i[H, rho] - (nu/2)[W, [W, rho]] for a delta-correlated bath force."""
    H = _check_hermitian(H, "H")
    W = _check_hermitian(W, "W")
    if nu < 0:
        raise DomainError("nu must be >= 0")
    cW = commutator_super(W)
    M = -1j * commutator_super(H) - 0.5 * nu * (cW @ cW)
    return Generator(H, M, (math.sqrt(nu) * W,))


def quantum_fokker_planck_generator(H, W, nu: float, eta: float) -> Generator:
    """
    -i[H, rho] - (nu/2)[X, [X, rho]] - i(eta/2)[X, {P, rho}] with X = W, P = i[H, W].

    This is the high-temperature Ohmic limit with eta = nu/(2T). It is not of
    Lindblad form; the term (eta/16T)[P, [P, rho]] would complete it. Its Frobenius norm
    relative to the friction term is stored in ``diagnostic["lindblad_deviation"]``
    and scales as Omega/T.
    """
    H = _check_hermitian(H, "H")
    X = _check_hermitian(W, "W")
    if nu < 0 or eta < 0:
        raise DomainError("nu and eta must be >= 0")
    P = 1j * (H @ X - X @ H)
    cX = commutator_super(X)
    friction = -0.5j * eta * (cX @ anticommutator_super(P))
    M = -1j * commutator_super(H) - 0.5 * nu * (cX @ cX) + friction
    diag = {}
    if eta > 0:
        T = nu / (2 * eta)
        cP = commutator_super(P)
        missing = eta / (16 * T) * (cP @ cP)
        diag["T"] = T
        diag["missing_norm"] = float(np.linalg.norm(missing))
        diag["lindblad_deviation"] = diag["missing_norm"] / float(np.linalg.norm(friction))
    return Generator(H, M, (), diag)


# ---------------------------------------------------------------- propagation

def propagate(gen: Generator, rho0, t, step: Optional[float] = None, monitor_every: int = 10):
    """
    RK4 with step 0.01/||L|| (1-norm) on the vectorized generator.

    For n <= 40 one step is precomputed as the RK4 polynomial in hL; larger
    systems apply the generator stage by stage.

    ``t`` may be a scalar (returns rho(t)) or an increasing array of output
    times starting at or after 0 (returns a stack of density matrices). rho is
    made Hermitian after every step. The smallest eigenvalue is checked every
    ``monitor_every`` steps; a PositivityWarning is issued if it falls below -1e-8.
    """
    n = gen.n
    rho = np.array(rho0, dtype=complex)
    if rho.shape != (n, n):
        raise DomainError("rho0 has the wrong shape")
    if abs(np.trace(rho) - 1) > 1e-10 or np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise DomainError("rho0 must be Hermitian with unit trace")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise DomainError("output times must be non-negative and increasing")
    h_max = step if step is not None else 0.01 / max(gen.norm(), 1e-300)

    dense = n <= DENSE_LIMIT
    if dense:
        # one RK4 step of a linear system is a fixed polynomial in h L
        def make_step(h):
            A = h * gen.matrix
            S = np.eye(n * n, dtype=complex)
            term = np.eye(n * n, dtype=complex)
            for k in range(1, 5):
                term = term @ A / k
                S = S + term
            return S
    else:
        f = gen.apply

    out = []
    now = 0.0
    min_eig = np.inf
    count = 0
    cache = {}
    for target in times:
        span = target - now
        if span > 0:
            k = max(1, math.ceil(span / h_max - 1e-9))
            h = span / k
            if dense:
                key = round(h, 15)
                if key not in cache:
                    cache.clear()
                    cache[key] = make_step(h)
                S = cache[key]
            v = rho.reshape(n * n)
            for _ in range(k):
                if dense:
                    v = S @ v
                    r = v.reshape(n, n)
                else:
                    r = v.reshape(n, n)
                    k1 = f(r)
                    k2 = f(r + 0.5 * h * k1)
                    k3 = f(r + 0.5 * h * k2)
                    k4 = f(r + h * k3)
                    r = r + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                r = 0.5 * (r + r.conj().T)
                v = r.reshape(n * n)
                count += 1
                if count % monitor_every == 0:
                    min_eig = min(min_eig, float(np.linalg.eigvalsh(r)[0]))
            rho = v.reshape(n, n)
            now = target
        min_eig = min(min_eig, float(np.linalg.eigvalsh(rho)[0]))
        out.append(rho.copy())
    if min_eig < -1e-8:
        warnings.warn(f"density matrix lost positivity (min eigenvalue {min_eig:.3g})", PositivityWarning)
    if np.ndim(t) == 0:
        return out[0]
    return np.array(out)


def lindblad_propagate(H, jumps, rho0, t, step: Optional[float] = None):
    """Propagate rho0 under -i[H, rho] + sum_r D[W_r] rho."""
    return propagate(lindblad_generator(H, jumps), rho0, t, step=step)


def steady_state(gen: Generator) -> np.ndarray:
    """
    Null vector of the generator normalized to unit trace.

    Trace preservation makes the rows of L for the diagonal entries sum to
    zero, so one of them is replaced by the trace functional and the square
    system is solved directly.
    """
    n = gen.n
    A = np.array(gen.matrix, dtype=complex)
    A[0] = np.eye(n).reshape(n * n)
    b = np.zeros(n * n, dtype=complex)
    b[0] = 1.0
    try:
        v = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        raise DomainError("steady state is not unique") from None
    rho = v.reshape(n, n)
    return 0.5 * (rho + rho.conj().T)


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def gibbs_state(H, T: float) -> np.ndarray:
    E, V = np.linalg.eigh(_check_hermitian(H, "H"))
    w = np.exp(-(E - E[0]) / T)
    w /= w.sum()
    return (V * w) @ V.conj().T


# ---------------------------------------------------------------- secular and Pauli

@dataclass(frozen=True)
class SecularGenerator:
    """
    Secular (rotating-wave) generator.

    ``generator`` acts in the original basis. ``energies`` and ``basis`` are the
    eigen-decomposition of H; ``rates`` is the Pauli rate matrix in that basis;
    ``valid`` is True when every rate is below 0.1 of the smallest level spacing.
    """

    generator: Generator
    energies: np.ndarray
    basis: np.ndarray
    rates: RateMatrix
    valid: bool


def _eigensystem(H, tol: float):
    H = _check_hermitian(H, "H")
    E, V = np.linalg.eigh(H)
    scale = max(np.max(np.abs(E)), 1e-300)
    if len(E) > 1 and np.min(np.diff(E)) < tol * scale:
        raise DegeneracyError("H has degenerate levels; the secular reduction is ambiguous")
    return H, E, V, scale


def _spectrum_of(bath) -> Callable:
    if isinstance(bath, BathSpectrum):
        return bath.S
    nu = float(bath)
    if nu < 0:
        raise DomainError("nu must be >= 0")
    return lambda w: np.full_like(np.asarray(w, dtype=float), nu)


def _rates(E, Wd, S) -> np.ndarray:
    """w[n, m] = S(E_m - E_n) |W_nm|^2 for m -> n."""
    bohr = E[None, :] - E[:, None]
    w = S(bohr) * np.abs(Wd) ** 2
    np.fill_diagonal(w, 0.0)
    return w


def secular_generator(H, W, bath, tol: float = 1e-9) -> SecularGenerator:
    """
    Lindblad generator with jumps sqrt(S(Omega)) A_Omega, A_Omega = sum |n><n|W|m><m| over E_m - E_n = Omega.

    Bohr frequencies within tol*||H|| share a jump operator. ``bath`` is a
    BathSpectrum or a white-noise intensity nu. The Lamb shift is dropped.
    """
    H, E, V, scale = _eigensystem(H, tol)
    W = _check_hermitian(W, "W")
    S = _spectrum_of(bath)
    n = len(E)
    Wd = V.conj().T @ W @ V
    bohr = E[None, :] - E[:, None]
    flat = sorted(((bohr[a, b], a, b) for a in range(n) for b in range(n)), key=lambda x: x[0])
    groups = []
    for om, a, b in flat:
        if groups and abs(om - groups[-1][0]) < tol * scale:
            groups[-1][1].append((a, b))
        else:
            groups.append([om, [(a, b)]])
    jumps = []
    for _, pairs in groups:
        A = np.zeros((n, n), dtype=complex)
        for a, b in pairs:
            A[a, b] = Wd[a, b]
        if not np.any(A):
            continue
        om = float(np.mean([bohr[a, b] for a, b in pairs]))
        rate = float(S(np.array(om)))
        if rate < 0:
            raise DomainError("bath spectrum must be non-negative")
        jumps.append(math.sqrt(rate) * (V @ A @ V.conj().T))
    gen = lindblad_generator(H, jumps)
    w = _rates(E, Wd, S)
    spacing = np.min(np.diff(E)) if n > 1 else math.inf
    return SecularGenerator(gen, E, V, RateMatrix(w), bool(np.max(w, initial=0.0) < 0.1 * spacing))


@dataclass(frozen=True)
class PauliModel:
    """Rates between eigenstates and the decay rates gamma_nm of coherences."""

    rates: RateMatrix
    gamma: np.ndarray
    energies: np.ndarray
    basis: np.ndarray


def pauli_master(H, W, bath, tol: float = 1e-9) -> PauliModel:
    """
    w_nm = S(E_m - E_n)|W_nm|^2 and gamma_nm = (Gamma_n + Gamma_m)/2 + (S(0)/2)|W_nn - W_mm|^2.

    ``bath`` is a BathSpectrum or a white-noise intensity nu (then S = nu).
    """
    H, E, V, _ = _eigensystem(H, tol)
    W = _check_hermitian(W, "W")
    S = _spectrum_of(bath)
    Wd = V.conj().T @ W @ V
    w = _rates(E, Wd, S)
    Gamma = w.sum(axis=0)
    d = np.real(np.diag(Wd))
    s0 = float(S(np.array(0.0)))
    gamma = 0.5 * (Gamma[:, None] + Gamma[None, :]) + 0.5 * s0 * (d[:, None] - d[None, :]) ** 2
    np.fill_diagonal(gamma, 0.0)
    return PauliModel(RateMatrix(w), gamma, E, V)


# ---------------------------------------------------------------- Bloch

def bloch_damped_frequency(Omega: float, gamma: float) -> float:
    """sqrt(Omega^2 - (gamma/2)^2); DomainError when overdamped."""
    disc = Omega * Omega - 0.25 * gamma * gamma
    if disc < 0:
        raise DomainError("overdamped: gamma > 2 Omega")
    return math.sqrt(disc)


def bloch_rates(model: PauliModel):
    """(T1, T2, S_eq) of a two-level Pauli model, with S_z = p_upper - p_lower."""
    if len(model.energies) != 2:
        raise DomainError("two-level model required")
    w = model.rates.W
    up, down = w[1, 0], w[0, 1]
    return 1 / (up + down), 1 / model.gamma[0, 1], (up - down) / (up + down)


def bloch_evolve(Omega: float, T1: float, T2: float, S_eq: float, S0, t, transverse: str = "precession"):
    """
    Closed-form Bloch dynamics; returns S(t) with shape (len(t), 3).

    S_z relaxes to S_eq at rate 1/T1. With ``transverse="precession"`` the
    transverse part obeys dS/dt = -Omega z x S - S/T2, a rotation at Omega with
    decay 1/T2. With ``transverse="damped_oscillator"`` each transverse component
    follows S'' + gamma S' + Omega^2 S = 0 (gamma = 1/T2, S'(0) from the
    precession equation), which oscillates at sqrt(Omega^2 - gamma^2/4).
    Physical relaxation needs T2 <= 2 T1; otherwise a PositivityWarning is issued.
    """
    if T1 <= 0 or T2 <= 0:
        raise DomainError("T1 and T2 must be positive")
    if T2 > 2 * T1:
        warnings.warn("T2 > 2 T1 violates positivity of the relaxation", PositivityWarning)
    S0 = np.asarray(S0, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    g = 1.0 / T2
    out = np.empty((len(t), 3))
    out[:, 2] = S_eq + (S0[2] - S_eq) * np.exp(-t / T1)
    x0, y0 = S0[0], S0[1]
    if transverse == "precession":
        c, s, e = np.cos(Omega * t), np.sin(Omega * t), np.exp(-g * t)
        out[:, 0] = e * (x0 * c + y0 * s)
        out[:, 1] = e * (y0 * c - x0 * s)
    elif transverse == "damped_oscillator":
        for i, (u0, du0) in enumerate(((x0, Omega * y0 - g * x0), (y0, -Omega * x0 - g * y0))):
            out[:, i] = _damped_oscillator(u0, du0, Omega, g, t)
    else:
        raise DomainError(f"unknown transverse mode {transverse!r}")
    return out


def _damped_oscillator(u0, du0, Omega, g, t):
    disc = Omega * Omega - 0.25 * g * g
    e = np.exp(-0.5 * g * t)
    if disc > 0:
        w = math.sqrt(disc)
        return e * (u0 * np.cos(w * t) + (du0 + 0.5 * g * u0) / w * np.sin(w * t))
    if disc == 0:
        return e * (u0 + (du0 + 0.5 * g * u0) * t)
    k = math.sqrt(-disc)
    return e * (u0 * np.cosh(k * t) + (du0 + 0.5 * g * u0) / k * np.sinh(k * t))


# ---------------------------------------------------------------- helpers

def pauli_matrices():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return sx, sy, sz


def oscillator_operators(n: int, Omega: float = 1.0, m: float = 1.0):
    """Truncated (H, x, p) of a harmonic oscillator in the lowest n Fock states."""
    a = np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)
    ad = a.conj().T
    H = Omega * np.diag(np.arange(n) + 0.5).astype(complex)
    x = (a + ad) / math.sqrt(2 * m * Omega)
    p = 1j * math.sqrt(m * Omega / 2) * (ad - a)
    return H, x, p


def density_from_json(obj) -> np.ndarray:
    """Dense complex matrix from nested [re, im] pairs."""
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DomainError("complex matrices are nested [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
