import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from statmech.errors import DomainError, OverflowGuard, SupportMismatch
from statmech.numerics import RandomStream
from statmech.noneq import (
    Protocol,
    TwoBathModel,
    WorkSampleSet,
    beta_symmetry_tools,
    crooks_check,
    heat_conduction_ft,
    heat_counting_statistics,
    heat_transport_coefficients,
    jarzynski_estimate,
    lattice_spacing,
    path_entropy_production,
    path_log_probability,
    reversed_path,
    sample_heat,
    work_distribution,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.diag([1.0, -1.0])


def spin(r, phi):
    return r * (math.cos(phi) * SZ + math.sin(phi) * SX)


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    return (A + A.T) / 2


# ---------------------------------------------------------------- exact work kernels


def test_identity_protocol_is_delta_at_zero():
    H = random_symmetric(4, 1)
    k = work_distribution(Protocol.linear(H, H, 3.0), T0=0.8)
    at_zero = np.abs(k.W) < 1e-12
    assert k.weights[at_zero].sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(k.weights[~at_zero] < 1e-14)
    assert jarzynski_estimate(k.as_samples()).dF == pytest.approx(0.0, abs=1e-12)


def test_sudden_quench_two_level_overlaps():
    rA, pA, rB, pB, T0 = 0.7, 0.3, 1.2, 1.9, 0.6
    k = work_distribution(Protocol.linear(spin(rA, pA), spin(rB, pB), 0.0), T0)
    # eigenvectors of r(cos phi sz + sin phi sx) sit at angle phi/2; overlaps depend on the angle difference
    same = math.cos((pB - pA) / 2) ** 2
    cross = 1 - same
    p_up = 1 / (1 + math.exp(2 * rA / T0))  # occupation of +rA
    p_dn = 1 - p_up
    oracle = {
        rB - rA: p_up * same,
        -rB - rA: p_up * cross,
        rB + rA: p_dn * cross,
        -rB + rA: p_dn * same,
    }
    assert k.W.size == 4
    for W, w in zip(k.W, k.weights):
        key = min(oracle, key=lambda x: abs(x - W))
        assert abs(key - W) < 1e-12
        assert w == pytest.approx(oracle[key], abs=1e-14)


def test_adiabatic_limit_keeps_level_index():
    HA, HB = spin(0.5, 0.2), spin(1.3, 2.0)
    k = work_distribution(Protocol.linear(HA, HB, 60.0), T0=1.0)
    pA = np.exp(-k.EA / 1.0) / np.exp(-k.EA / 1.0).sum()
    off = sum(pA[n] * k.P[m, n] for m in range(2) for n in range(2) if m != n)
    assert off < 1e-3
    mean_adiabatic = float(np.dot(pA, k.EB - k.EA))
    assert float(np.dot(k.W, k.weights)) == pytest.approx(mean_adiabatic, abs=2e-3)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.floats(0.0, 5.0))
def test_kernel_doubly_stochastic(seed, tf):
    HA, HB = random_symmetric(4, seed), random_symmetric(4, seed + 1)
    k = work_distribution(Protocol.linear(HA, HB, tf, n_steps=64), T0=1.0)
    assert np.max(np.abs(k.P.sum(axis=0) - 1)) < 1e-10
    assert np.max(np.abs(k.P.sum(axis=1) - 1)) < 1e-10
    assert k.weights.sum() == pytest.approx(1.0, abs=1e-10)


def test_jarzynski_independent_of_speed():
    HA, HB = random_symmetric(5, 3), random_symmetric(5, 4)
    T0 = 0.9
    ref = None
    for tf in (0.0, 0.7, 20.0):
        k = work_distribution(Protocol.linear(HA, HB, tf), T0)
        est = jarzynski_estimate(k.as_samples())
        assert est.dF == pytest.approx(k.dF, abs=1e-12)
        assert est.dissipated >= -1e-12  # maximum work principle
        ref = est.dF if ref is None else ref
        assert est.dF == pytest.approx(ref, abs=1e-10)


def test_crooks_exact_kernel():
    HA, HB = spin(0.5, 0.2), spin(1.3, -0.6)
    for tf in (0.0, 1.0, 5.0):
        p = Protocol.linear(HA, HB, tf)
        res = crooks_check(work_distribution(p, 0.7), work_distribution(p.reversed(), 0.7))
        assert res.residual < 1e-10


def test_crooks_complex_hamiltonian_uses_time_reversal():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    HA, HB = (A + A.conj().T) / 2, (B + B.conj().T) / 2
    p = Protocol.linear(HA, HB, 2.0)
    res = crooks_check(work_distribution(p, 1.1), work_distribution(p.reversed(), 1.1))
    assert res.residual < 1e-10


def test_closed_cycle_ratio_is_boltzmann():
    H0 = random_symmetric(3, 8)
    V = random_symmetric(3, 9)
    p = Protocol(lambda lam: H0 + math.sin(math.pi * lam) * V, 1.5)
    kf, kr = work_distribution(p, 0.5), work_distribution(p.reversed(), 0.5)
    assert kf.dF == pytest.approx(0.0, abs=1e-14)
    res = crooks_check(kf, kr)
    assert np.max(np.abs(res.log_ratio - res.W / 0.5)) < 1e-10
    # closed cycle: the work distribution itself is beta-symmetric
    sym = beta_symmetry_tools((kf.W, kf.weights), beta=2.0)
    assert np.max(np.abs(sym.symmetry_residual)) < 1e-10
    assert abs(sym.convex_average) < 1e-10


def test_crooks_support_mismatch():
    HA, HB = spin(0.5, 0.2), spin(1.3, -0.6)
    kf = work_distribution(Protocol.linear(HA, HB, 1.0), 0.7)
    wrong = work_distribution(Protocol.linear(HB, spin(2.0, 0.1), 1.0), 0.7)
    with pytest.raises(SupportMismatch):
        crooks_check(kf, wrong)


def test_crooks_sampled_within_binomial_errors():
    HA, HB = random_symmetric(4, 11), random_symmetric(4, 12)
    T0 = 1.5
    p = Protocol.linear(HA, HB, 0.5)
    kf, kr = work_distribution(p, T0), work_distribution(p.reversed(), T0)
    sf = kf.sample(10_000, RandomStream(1))
    sr = kr.sample(10_000, RandomStream(2))
    res = crooks_check(sf, sr, bins=1e-6)
    assert res.W.size >= 3
    assert np.max(np.abs(res.zscore)) < 4.0


def test_jarzynski_sampled_error_bar():
    HA, HB = random_symmetric(4, 13), random_symmetric(4, 14)
    k = work_distribution(Protocol.linear(HA, HB, 0.3), 2.0)
    est = jarzynski_estimate(k.sample(10_000, RandomStream(3)))
    assert abs(est.dF - k.dF) < 4 * est.error + abs(est.bias)
    assert est.max_work_ok


def test_work_sample_validation():
    with pytest.raises(DomainError):
        WorkSampleSet([], beta=1.0)
    with pytest.raises(DomainError):
        WorkSampleSet([1.0, np.nan], beta=1.0)
    with pytest.raises(DomainError):
        WorkSampleSet([1.0], beta=0.0)


# ---------------------------------------------------------------- beta symmetry


def test_gaussian_beta_symmetry():
    beta, sigma = 1.0, 1.0
    mu = 0.5 * beta * sigma**2
    n = 200_000
    s = RandomStream(4).generator().normal(mu, sigma, n)
    res = beta_symmetry_tools(s, beta)
    # delta-method error of ln<e^{-lam s}> is sqrt((e^{lam^2 sigma^2} - 1)/n) at most
    err = math.sqrt((math.exp(beta**2 * sigma**2) - 1) / n)
    assert np.max(np.abs(res.symmetry_residual)) < 4 * err
    assert abs(res.gaussian_fd) < 4 * sigma**2 * math.sqrt(2 / n) + 4 * sigma / math.sqrt(n)
    # g is the Gaussian cumulant function -mu lam + sigma^2 lam^2 / 2
    exact = -mu * res.lam + 0.5 * sigma**2 * res.lam**2
    assert np.max(np.abs(res.g - exact)) < 4 * err


def test_symmetric_distribution_at_zero_beta():
    x = RandomStream(5).generator().standard_normal(1000)
    s = np.concatenate([x, -x])
    lam = np.linspace(-1, 1, 11)
    res = beta_symmetry_tools(s, 0.0, lam=lam)
    assert np.max(np.abs(res.symmetry_residual)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.01, 5.0), min_size=1, max_size=6), st.floats(0.2, 3.0))
def test_convex_average_vanishes_for_beta_symmetric(values, beta):
    v = np.array(values)
    s = np.concatenate([v, -v])
    w = np.concatenate([np.ones_like(v), np.exp(-beta * v)])
    res = beta_symmetry_tools((s, w / w.sum()), beta)
    assert abs(res.convex_average) < 1e-12
    assert np.max(np.abs(res.symmetry_residual)) < 1e-12
    assert float(np.dot(w, s)) > 0  # the plain average is positive


def test_overflow_guard_on_extreme_tail():
    s = np.concatenate([np.zeros(100), [-2000.0]])
    with pytest.raises(OverflowGuard):
        beta_symmetry_tools(s, 1.0)


# ---------------------------------------------------------------- heat conduction


def two_level_model(T_hot, T_cold):
    w = np.array([[0.0, 1.0], [1.0, 0.0]])
    return TwoBathModel.from_couplings([0.0, 1.0], w, T_hot, w, T_cold)


def ladder_model(T_hot, T_cold):
    wh = np.array([[0, 1.0, 0.2], [1.0, 0, 0.7], [0.2, 0.7, 0]])
    wc = np.array([[0, 0.5, 0.9], [0.5, 0, 0.3], [0.9, 0.3, 0]])
    return TwoBathModel.from_couplings([0.0, 0.8, 1.5], wh, T_hot, wc, T_cold)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(0.5, 3.0), st.floats(-1.0, 2.0))
def test_counting_statistics_gallavotti_cohen_symmetry(T_hot, T_cold, lam):
    m = ladder_model(T_hot, T_cold)
    g1 = heat_counting_statistics(m, lam)[0]
    g2 = heat_counting_statistics(m, m.affinity - lam)[0]
    assert g1 == pytest.approx(g2, abs=1e-10)
    assert heat_counting_statistics(m, 0.0)[0] == pytest.approx(0.0, abs=1e-12)


def test_linear_response_conductance_and_fd():
    T = 1.0
    ratios = []
    for eps in (0.005, 0.01, 0.02):
        m = ladder_model(T + eps / 2, T - eps / 2)
        J, nu = heat_transport_coefficients(m)
        ratios.append(J / eps)
        assert J / eps == pytest.approx(nu / (2 * T**2), rel=1e-3)
    assert max(ratios) / min(ratios) - 1 < 1e-3


def test_lattice_spacing_detection():
    assert lattice_spacing([0.0, 0.5, -1.5, 2.0]) == pytest.approx(0.5)
    assert lattice_spacing([0.1, 0.25, math.pi]) is None


def test_equilibrium_heat_is_symmetric():
    m = two_level_model(1.0, 1.0)
    QH, QC = sample_heat(m, 20.0, 10_000, RandomStream(6))
    Q = 0.5 * (QH - QC)
    assert abs(Q.mean()) < 3 * Q.std() / math.sqrt(Q.size)
    res = heat_conduction_ft(m, 20.0, 10_000, RandomStream(6))
    assert abs(res.slope) < 3 * res.slope_error


def test_sampled_heat_matches_counting_statistics():
    m = two_level_model(1.5, 1.0)
    t = 40.0
    QH, QC = sample_heat(m, t, 10_000, RandomStream(7))
    Q = 0.5 * (QH - QC)
    J, nu = heat_transport_coefficients(m)
    se = Q.std() / math.sqrt(Q.size)
    # a bounded boundary term separates finite-t moments from the rates
    assert Q.mean() == pytest.approx(J * t, abs=4 * se + 0.05)
    assert Q.var() / t == pytest.approx(nu, rel=0.1)
    # energy absorbed by the conductor stays bounded
    assert np.max(np.abs(QH + QC)) <= 1.0 + 1e-12


def test_heat_fluctuation_theorem_sampled():
    m = two_level_model(1.5, 1.0)
    res = heat_conduction_ft(m, 20.0, 10_000, RandomStream(1))
    assert res.slope == pytest.approx(res.affinity, rel=0.10)
    assert res.K == pytest.approx(res.K_fd, rel=0.15)


def test_sample_heat_reproducible():
    m = ladder_model(1.3, 1.0)
    a = sample_heat(m, 5.0, 500, RandomStream(9))
    b = sample_heat(m, 5.0, 500, RandomStream(9))
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


# ---------------------------------------------------------------- trajectory entropy


def test_path_ratio_equals_entropy_production():
    m = TwoBathModel.from_couplings([0.0, 0.9], np.array([[0, 1.3], [1.3, 0]]), 2.0,
                                    np.array([[0, 0.6], [0.6, 0]]), 0.7)
    rng = RandomStream(10).generator()
    count = 0
    for s0 in (0, 1):
        states = [s0, 1 - s0, s0, 1 - s0]
        for baths in itertools.product("HC", repeat=3):
            dwell = list(rng.exponential(1.0, 4))
            lp = path_log_probability(m, states, list(baths), dwell)
            lr = path_log_probability(m, *reversed_path(states, baths, dwell))
            assert lp - lr == pytest.approx(path_entropy_production(m, states, baths), abs=1e-12)
            count += 1
    assert count == 16
