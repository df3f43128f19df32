"""
Shared numerical kernels: adaptive quadrature, bracketed root finding,
fixed-step RK4 propagation, FFT autocorrelation and seeded random streams.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize as _optimize

from .errors import DomainError, EmptyInput, NoBracket, NonConvergence, StepError


@dataclass(frozen=True)
class Tolerance:
    abs: float = 1e-12
    rel: float = 1e-10
    max_evals: int = 1_000_000

    def __post_init__(self):
        if self.abs < 0 or self.rel < 0:
            raise DomainError("tolerances must be non-negative")
        if self.abs == 0 and self.rel == 0:
            raise DomainError("at least one of abs, rel must be positive")
        if self.max_evals < 1:
            raise DomainError("max_evals must be >= 1")


DEFAULT_TOL = Tolerance()


def integrate(f: Callable[[float], float], a: float, b: float, tol: Tolerance = DEFAULT_TOL,
              points=None) -> float:
    """
    Adaptive Gauss-Kronrod quadrature of ``f`` over ``(a, b)``.

    ``b`` may be ``np.inf``; the semi-infinite range is mapped onto a finite
    one internally. ``points`` lists interior break points (finite ranges only)
    where the integrand has kinks or near-singular behaviour.

    Raises
    ------
    DomainError
        If ``a >= b``.
    NonConvergence
        If the error estimate does not meet ``tol`` within ``tol.max_evals``.
    """
    if not a < b:
        raise DomainError(f"integration requires a < b, got a={a}, b={b}")
    # 21-point Kronrod rule per subinterval (15 on infinite ranges)
    limit = max(1, tol.max_evals // 21)
    kwargs = dict(epsabs=tol.abs, epsrel=tol.rel, limit=limit, full_output=1)
    if points is not None and np.isfinite(b):
        kwargs["points"] = points
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        out = _integrate.quad(f, a, b, **kwargs)
    value, err = out[0], out[1]
    ier_failed = len(out) > 3 and out[3] not in (None, "")
    target = max(tol.abs, tol.rel * abs(value))
    if not np.isfinite(value) or (ier_failed and err > 10 * target):
        raise NonConvergence(f"quadrature did not converge (value={value}, error={err})",
                             partial=value)
    return float(value)


def fourier_integrate(f: Callable[[float], float], omega: float, kind: str = "sin",
                      tol: Tolerance = DEFAULT_TOL) -> float:
    """
    int_0^inf f(x) sin(omega x) dx (or cos) for slowly decaying f.

    Uses QUADPACK's QAWF extrapolation over the oscillation cycles.
    """
    if kind not in ("sin", "cos"):
        raise DomainError("kind must be 'sin' or 'cos'")
    if omega <= 0:
        raise DomainError("omega must be positive")
    limit = max(1, tol.max_evals // 25)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        out = _integrate.quad(f, 0.0, np.inf, weight=kind, wvar=omega, epsabs=max(tol.abs, 1e-300),
                              limlst=200, limit=limit, full_output=1)
    value, err = out[0], out[1]
    if not np.isfinite(value) or err > 10 * max(tol.abs, tol.rel * abs(value)) and len(out) > 3:
        raise NonConvergence(f"oscillatory quadrature did not converge (error={err})", partial=value)
    return float(value)


def find_root(f: Callable[[float], float], bracket, tol: Tolerance = DEFAULT_TOL) -> float:
    """Brent's method on a sign-changing bracket ``[lo, hi]``."""
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NoBracket(f"f({lo})={flo} and f({hi})={fhi} have the same sign")
    xtol = tol.abs if tol.abs > 0 else 1e-300
    rtol = max(tol.rel, 4 * np.finfo(float).eps)
    try:
        return float(_optimize.brentq(f, lo, hi, xtol=xtol, rtol=rtol,
                                      maxiter=min(tol.max_evals, 10_000)))
    except RuntimeError as exc:
        raise NonConvergence(str(exc)) from exc


def ode_advance(f, y0, t0: float, t1: float, step: float, callback=None):
    """
    Classical 4th-order Runge-Kutta from ``t0`` to ``t1``.

    ``f(t, y)`` returns dy/dt. The step is shrunk so that an integer number of
    steps lands exactly on ``t1``. ``callback(t, y)``, if given, is called after
    every step. Works for real and complex state vectors.
    """
    if step <= 0:
        raise DomainError("step must be positive")
    y = np.array(y0, dtype=np.result_type(np.asarray(y0), float), copy=True)
    span = t1 - t0
    if span == 0:
        return y
    n = max(1, math.ceil(abs(span) / step - 1e-12))
    h = span / n
    t = t0
    for _ in range(n):
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = f(t, y)
            k2 = f(t + h / 2, y + h / 2 * k1)
            k3 = f(t + h / 2, y + h / 2 * k2)
            k4 = f(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        if not np.all(np.isfinite(y)):
            raise StepError(f"non-finite state at t={t}")
        if callback is not None:
            callback(t, y)
    return y


class Autocorrelation(NamedTuple):
    tau: np.ndarray       # lags 0, dt, 2dt, ...
    C: np.ndarray         # unbiased autocovariance at those lags
    omega: np.ndarray     # angular frequency grid (fftfreq order)
    spectrum: np.ndarray  # C~(omega)


def autocovariance_direct(samples, max_lag=None):
    """O(n^2) unbiased autocovariance; reference for the FFT path."""
    x = np.asarray(samples, dtype=float)
    x = x - x.mean()
    n = len(x)
    L = n if max_lag is None else min(max_lag, n)
    return np.array([np.dot(x[: n - k], x[k:]) / (n - k) for k in range(L)])


def autocorrelation_spectrum(samples, dt: float, max_lag=None, demean: bool = True) -> Autocorrelation:
    """
    Unbiased autocovariance of a uniformly sampled record and its Fourier
    transform C~(w) = sum_k C(k dt) exp(i w k dt) dt over the symmetric lag
    range |k| < max_lag.

    The sample mean is removed first unless ``demean`` is False. Pass False
    when the true mean is known to be zero: subtracting the sample mean of a
    record of length T_rec lowers every C(tau) by about C~(0)/T_rec, which
    biases C~(0) itself by the lag window over T_rec. ``max_lag`` truncates the lag window, which
    trades resolution for variance when estimating a smooth spectrum from a
    single record.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise EmptyInput("need at least two samples")
    n = len(x)
    if demean:
        x = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    X = np.fft.rfft(x, nfft)
    raw = np.fft.irfft(X * np.conj(X), nfft)[:n]
    C = raw / (n - np.arange(n))
    L = n if max_lag is None else max(1, min(int(max_lag), n))
    C = C[:L]
    # symmetric sequence C(0), C(1) .. C(L-1), C(L-1) .. C(1) in FFT order
    sym = np.concatenate([C, C[:0:-1]])
    spectrum = np.real(np.fft.ifft(sym)) * len(sym) * dt
    omega = 2 * np.pi * np.fft.fftfreq(len(sym), d=dt)
    return Autocorrelation(np.arange(L) * dt, C, omega, spectrum)


@dataclass(frozen=True)
class RandomStream:
    """
    Reproducible random source keyed by ``(seed, stream_id)``.

    Backed by the counter-based Philox generator, so each stream is fully
    determined by its key and does not depend on how other streams are used.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))

    def split(self, n: int):
        """``n`` independent child streams, e.g. one per worker."""
        base = int(self.stream_id) * 1_000_003
        return [RandomStream(self.seed, base + 1 + k) for k in range(n)]

    def uniform(self, size=None):
        return self.generator().random(size)

    def gaussian(self, size=None):
        return self.generator().standard_normal(size)
