import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from statmech.errors import DomainError, SingularRateMatrix, StabilityError
from statmech.numerics import RandomStream
from statmech.stochastic import (
    LangevinParams,
    RateMatrix,
    bath_rates,
    closed_classes,
    fokker_planck_1d,
    fokker_planck_max_step,
    kl_divergence,
    langevin_simulate,
    random_walk_diffusion,
    random_walk_simulate,
    rate_evolve,
    rate_steady_state,
    two_level_polarization,
)


def test_random_walk_diffusion_values():
    assert random_walk_diffusion({1: 0.3, -1: 0.3}) == pytest.approx(0.3)
    a, w = 0.5, 2.0
    assert random_walk_diffusion({a: w, -a: w}) == pytest.approx(w * a * a)
    assert random_walk_diffusion({1: 0.0, -1: 0.0}) == 0.0
    assert random_walk_diffusion({1: 1, -1: 1, 2: 0.25, -2: 0.25}) == pytest.approx(2.0)


def test_random_walk_msd():
    rates = {1: 1, -1: 1, 2: 0.25, -2: 0.25}
    t = 50.0
    x = random_walk_simulate(rates, t, 200_000, RandomStream(4))
    D = random_walk_diffusion(rates)
    # var of x^2 for a compound Poisson sum is sum r^4 w t + 2 (2 D t)^2
    se = math.sqrt((sum(r**4 * w for r, w in rates.items()) * t + 2 * (2 * D * t) ** 2) / len(x))
    assert abs(np.mean(x * x) - 2 * D * t) < 4 * se


@pytest.fixture(scope="module")
def free_langevin():
    p = LangevinParams(m=1.0, eta=1.0, nu=2.0, dt=0.01)
    return p, langevin_simulate(p, 400, 10_000, RandomStream(7))


def test_langevin_equipartition(free_langevin):
    p, s = free_langevin
    # Euler-Maruyama stationary variance is T/m / (1 - eta dt / 2m)
    v2_discrete = p.T / p.m / (1 - p.dt / (2 * p.tau))
    assert abs(s.v2 - v2_discrete) < 3 * s.v2_err
    assert abs(s.v4 - 3 * v2_discrete**2) < 3 * s.v4_err
    assert abs(s.kinetic - p.nu / (4 * p.eta)) < 3 * s.kinetic_err + 0.5 * p.T * p.dt / p.tau


def test_langevin_diffusion(free_langevin):
    p, s = free_langevin
    D = p.T / p.eta
    assert s.D_msd == pytest.approx(D, rel=0.08)
    assert s.D_vacf == pytest.approx(D, rel=0.08)
    assert s.D_msd == pytest.approx(s.D_vacf, rel=0.1)


def test_langevin_correlation_rate(free_langevin):
    p, s = free_langevin
    assert s.corr_rate == pytest.approx(p.eta / p.m, rel=0.05)


def test_langevin_deterministic_limit():
    v0, g = 1.5, 2.0
    for dt in (1e-3, 1e-4):
        p = LangevinParams(m=1.0, eta=g, nu=0.0, dt=dt)
        s = langevin_simulate(p, 2, int(1.0 / dt), v0=v0)
        err = np.max(np.abs(s.v_mean - v0 * np.exp(-g * s.t)))
        # first-order scheme: global error bounded by v0 g^2 t e^{-g t} dt / 2 <= v0 g dt / (2e)
        assert err <= v0 * g * dt / (2 * math.e) * 1.01
    exact = langevin_simulate(LangevinParams(1.0, g, 0.0, 1e-2), 2, 100, v0=v0, scheme="exact")
    assert np.max(np.abs(exact.v_mean - v0 * np.exp(-g * exact.t))) < 1e-12


def test_langevin_harmonic_trap():
    # positions equilibrate to <x^2> = T/k
    k = 2.0
    p = LangevinParams(m=1.0, eta=2.0, nu=4.0, dt=0.005, force=lambda x: -k * x)
    s = langevin_simulate(p, 2000, 4000, RandomStream(1), scheme="exact")
    assert np.mean(s.x_final**2) == pytest.approx(p.T / k, rel=0.08)


def test_langevin_guards():
    with pytest.raises(StabilityError):
        langevin_simulate(LangevinParams(1.0, 1.0, 2.0, 1.5), 2, 10)
    with pytest.raises(DomainError):
        LangevinParams(-1.0, 1.0, 1.0, 0.1)
    assert not LangevinParams(1.0, 1.0, 2.0, 0.5).stable


def test_fokker_planck_free_spreading():
    dx, D = 0.05, 0.5
    x = np.arange(-200, 201) * dx
    rho = np.zeros_like(x)
    rho[200] = 1 / dx
    dt = 0.9 * fokker_planck_max_step(x, D)
    out = fokker_planck_1d(x, rho, 100 * dt, D, dt=dt)
    assert np.sum(out) * dx == pytest.approx(1.0, abs=1e-12)
    var = np.sum(x * x * out) * dx
    assert var == pytest.approx(2 * D * 100 * dt, rel=0.01)


def test_fokker_planck_gibbs_state():
    x = np.linspace(-6, 6, 241)
    dx = x[1] - x[0]
    T, D = 0.7, 1.3
    V = lambda y: 0.5 * y * y
    rho = np.where(np.abs(x - 1) < 0.5, 1.0, 0.0)
    rho /= rho.sum() * dx
    out = fokker_planck_1d(x, rho, 30.0, D, potential=V, T=T)
    gibbs = np.exp(-V(x) / T)
    gibbs /= gibbs.sum()
    assert kl_divergence(out * dx, gibbs) < 1e-6
    assert np.sum(out) * dx == pytest.approx(1.0, abs=1e-12)


def test_fokker_planck_wrong_mobility_misses_gibbs():
    x = np.linspace(-6, 6, 241)
    dx = x[1] - x[0]
    rho = np.exp(-x * x)
    rho /= rho.sum() * dx
    out = fokker_planck_1d(x, rho, 30.0, 1.0, potential=lambda y: 0.5 * y * y, T=1.0, mu=2.0)
    # stationary state is e^{-mu V / D} = Gibbs at T = D/mu
    target = np.exp(-x * x)
    target /= target.sum()
    assert kl_divergence(out * dx, target) < 1e-6


def test_fokker_planck_advection():
    x = np.linspace(0, 10, 501)
    dx = x[1] - x[0]
    rho = np.exp(-((x - 3) ** 2) / 0.5)
    rho /= rho.sum() * dx
    u = 0.5
    out = fokker_planck_1d(x, rho, 4.0, 0.0, drift=u)
    mean = np.sum(x * out) * dx
    assert mean == pytest.approx(3 + u * 4.0, abs=1e-6)
    var0 = np.sum((x - 3) ** 2 * rho) * dx
    var1 = np.sum((x - mean) ** 2 * out) * dx
    # upwinding adds numerical diffusion u dx (1 - CFL) / 2 at most
    assert 0 <= var1 - var0 <= 2 * (u * dx / 2) * 4.0 * 1.01


def test_fokker_planck_stability_guard():
    x = np.linspace(0, 1, 11)
    with pytest.raises(StabilityError):
        fokker_planck_1d(x, np.ones(11), 1.0, 1.0, dt=1.0)


def test_fokker_planck_convergence_orders():
    # Gaussian spreading from a smooth start: exact variance s0^2 + 2 D t, and density
    D, t, s0 = 1.0, 0.2, 0.5

    def exact(x):
        s2 = s0**2 + 2 * D * t
        return np.exp(-x * x / (2 * s2)) / math.sqrt(2 * math.pi * s2)

    def run(n, dt):
        x = np.linspace(-8, 8, n)
        rho0 = np.exp(-x * x / (2 * s0**2)) / math.sqrt(2 * math.pi * s0**2)
        return x, fokker_planck_1d(x, rho0, t, D, dt=dt)

    # space: fixed tiny dt, halve dx
    errs = []
    for n in (81, 161, 321):
        x, r = run(n, 2e-5)
        errs.append(np.max(np.abs(r - exact(x))))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)
    # time: fine grid, compare two step sizes against a reference step
    x, ref = run(161, 1e-5)
    e1 = np.max(np.abs(run(161, 1.6e-3)[1] - ref))
    e2 = np.max(np.abs(run(161, 8e-4)[1] - ref))
    assert math.log2(e1 / e2) == pytest.approx(1.0, abs=0.2)


def random_rates(n, seed, density=1.0):
    rng = np.random.default_rng(seed)
    W = rng.random((n, n)) * (rng.random((n, n)) < density)
    np.fill_diagonal(W, 0)
    return RateMatrix(W)


def test_rate_matrix_columns_sum_to_zero():
    W = random_rates(6, 0)
    assert np.allclose(W.W.sum(axis=0), 0, atol=1e-14)
    with pytest.raises(DomainError):
        RateMatrix([[0, -1], [1, 0]])


def test_rate_evolve_conserves_and_matches_expm():
    from scipy.linalg import expm

    W = random_rates(7, 1)
    p0 = np.full(7, 1 / 7)
    for t in (0.01, 0.7, 30.0):
        p = rate_evolve(W, p0, t)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(p, expm(W.W * t) @ p0, atol=1e-12)


@given(st.integers(2, 8), st.integers(0, 10_000), st.floats(1e-3, 1e3))
@settings(max_examples=40, deadline=None)
def test_rate_evolve_nonnegative(n, seed, t):
    W = random_rates(n, seed, density=0.5)
    p0 = np.zeros(n)
    p0[0] = 1.0
    p = rate_evolve(W, p0, t)
    assert np.all(p >= 0)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_detailed_balance_steady_state():
    rng = np.random.default_rng(3)
    E = rng.random(8) * 3
    wb = rng.random((8, 8))
    wb = wb + wb.T
    T_B = 0.8
    W = bath_rates(E, wb, T_B)
    p = rate_steady_state(W)
    gibbs = np.exp(-E / T_B)
    gibbs /= gibbs.sum()
    assert kl_divergence(p, gibbs) < 1e-10
    # pairwise detailed balance
    flux = W.W * p[None, :]
    off = ~np.eye(8, dtype=bool)
    assert np.allclose(flux[off], flux.T[off], rtol=1e-10)


def test_driving_breaks_gibbs():
    E = np.array([0.0, 1.0, 2.0])
    wb = np.ones((3, 3))
    p = rate_steady_state(bath_rates(E, wb, 0.5, w_drive=np.full((3, 3), 5.0)))
    gibbs = np.exp(-E / 0.5)
    gibbs /= gibbs.sum()
    assert kl_divergence(p, gibbs) > 1e-3


def test_symmetric_rates_uniform():
    rng = np.random.default_rng(9)
    A = rng.random((5, 5))
    W = RateMatrix(A + A.T)
    assert np.allclose(rate_steady_state(W), 0.2, atol=1e-14)


def test_two_level_rate_equation():
    w_up, w_down = 0.7, 1.9  # rates - -> + and + -> -
    W = RateMatrix([[0.0, w_up], [w_down, 0.0]])  # index 0 is +, 1 is -
    p0 = np.array([0.1, 0.9])
    for t in (0.3, 1.0, 5.0):
        p = rate_evolve(W, p0, t)
        assert p[0] - p[1] == pytest.approx(two_level_polarization(w_up, w_down, -0.8, t), rel=1e-12)
    p = rate_steady_state(W)
    assert p[0] - p[1] == pytest.approx((w_up - w_down) / (w_up + w_down), rel=1e-12)


def test_disconnected_chain_reported():
    W = np.zeros((4, 4))
    W[0, 1] = W[1, 0] = 1.0
    W[2, 3] = W[3, 2] = 1.0
    with pytest.raises(SingularRateMatrix) as exc:
        rate_steady_state(RateMatrix(W))
    assert sorted(map(sorted, exc.value.components)) == [[0, 1], [2, 3]]


def test_transient_states_allowed():
    # state 2 feeds the closed pair {0, 1}: still a unique stationary state
    W = np.zeros((3, 3))
    W[0, 1] = W[1, 0] = 1.0
    W[0, 2] = 1.0
    R = RateMatrix(W)
    assert closed_classes(R) == [[0, 1]]
    assert rate_steady_state(R) == pytest.approx([0.5, 0.5, 0.0], abs=1e-14)


def test_large_chain_power_iteration():
    n = 250
    E = np.linspace(0, 5, n)
    wb = np.zeros((n, n))
    idx = np.arange(n - 1)
    wb[idx, idx + 1] = wb[idx + 1, idx] = 1.0
    p = rate_steady_state(bath_rates(E, wb, 1.0))
    gibbs = np.exp(-E)
    gibbs /= gibbs.sum()
    assert kl_divergence(p, gibbs) < 1e-8
