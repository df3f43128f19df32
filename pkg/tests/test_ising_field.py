import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from statmech.errors import DomainError
from statmech.ising_field import (
    antiferro_mean_field,
    bragg_williams_action,
    bragg_williams_minimum,
    exponents_from_scaling,
    free_energy_A,
    gaussian_fluctuation_integral,
    ising1d_solve,
    lee_yang_coefficients,
    lee_yang_zeros,
    mean_field_exponents_fit,
    mean_field_magnetization,
    onsager2d,
    onsager2d_tc,
    onsager_heat_capacity_peak,
    onsager_kappa,
    ornstein_zernike,
    ornstein_zernike_3d_numeric,
    ornstein_zernike_real,
    rg_exponents,
    rg_fixed_points,
    rg_flow,
    transfer_matrix,
)


def brute_lnZ(N, be, bh, ring=True):
    """Exhaustive sum over all 2^N spin configurations."""
    terms = []
    for s in itertools.product((1, -1), repeat=N):
        bonds = sum(s[i] * s[i + 1] for i in range(N - 1))
        if ring:
            bonds += s[-1] * s[0]
        terms.append(be * bonds + bh * sum(s))
    terms = np.array(terms)
    top = terms.max()
    return top + math.log(np.sum(np.exp(terms - top)))


def test_ring_matches_enumeration_small():
    assert ising1d_solve(0.3, 0.2, 1.0, 4).lnZ == pytest.approx(brute_lnZ(4, 0.3, 0.2), abs=1e-12)


@pytest.mark.parametrize("N", [2, 5, 9, 14])
def test_ring_matches_enumeration_grid(N):
    for be in np.linspace(-1.0, 1.5, 5):
        for bh in np.linspace(-0.8, 1.2, 5):
            s = ising1d_solve(be, bh, 1.0, N)
            assert abs(s.lnZ - brute_lnZ(N, be, bh)) < 1e-11


@pytest.mark.parametrize("N", [2, 3, 7])
def test_open_chain_matches_enumeration(N):
    for be, bh in [(0.4, 0.0), (0.7, -0.3), (1.2, 0.5)]:
        assert ising1d_solve(be, bh, 1.0, N, ring=False).lnZ == pytest.approx(
            brute_lnZ(N, be, bh, ring=False), abs=1e-11)


def test_zero_field_closed_forms():
    be, N = 0.7, 11
    ring = ising1d_solve(be, 0.0, 1.0, N)
    assert math.exp(ring.lnZ) == pytest.approx((2 * math.cosh(be)) ** N + (2 * math.sinh(be)) ** N, rel=1e-13)
    chain = ising1d_solve(be, 0.0, 1.0, N, ring=False)
    assert chain.lnZ == pytest.approx(math.log(2) + (N - 1) * math.log(2 * math.cosh(be)), rel=1e-13)
    # zero-field susceptibility and correlation length
    T = 1.7
    s = ising1d_solve(1.0, 0.0, T, 30)
    assert s.chi == pytest.approx(math.exp(2 / T) / T, rel=1e-13)
    assert s.xi == pytest.approx(1 / math.log(1 / math.tanh(1 / T)), rel=1e-13)


def test_free_spins():
    T, h = 1.3, 0.4
    s = ising1d_solve(0.0, h, T, 20)
    assert s.F == pytest.approx(-20 * T * math.log(2 * math.cosh(h / T)), rel=1e-13)
    assert s.M == pytest.approx(math.tanh(h / T), rel=1e-13)
    s0 = ising1d_solve(0.0, 0.0, T, 20)
    assert s0.chi == pytest.approx(1 / T)
    assert s0.g(np.arange(4)).tolist() == [1.0, 0.0, 0.0, 0.0]


def test_magnetization_from_lnZ_derivative():
    be, bh, N, d = 0.6, 0.3, 9, 1e-5
    M = ising1d_solve(be, bh, 1.0, N).M
    fd = (brute_lnZ(N, be, bh + d) - brute_lnZ(N, be, bh - d)) / (2 * d * N)
    assert M == pytest.approx(fd, rel=1e-8)


def test_correlation_sum_rule():
    T = 0.8
    s = ising1d_solve(1.0, 0.0, T, 50)
    R = int(50 * s.xi)
    r = np.arange(-R, R + 1)
    assert np.sum(s.g(r)) == pytest.approx(math.exp(2 / T), rel=1e-6)
    assert np.sum(s.g(r)) / T == pytest.approx(s.chi, rel=1e-6)


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=50, deadline=None)
def test_transfer_matrix_perron(be, bh):
    Tm = transfer_matrix(be, bh)
    assert np.all(Tm > 0)
    assert np.allclose(Tm, Tm.T)
    w = np.linalg.eigvalsh(Tm)
    assert w[1] > abs(w[0])


def test_onsager_critical_point():
    ec, tc = onsager2d_tc()
    assert ec == pytest.approx(0.5 * math.log(1 + math.sqrt(2)), rel=1e-14)
    assert abs(ec - 0.44069) < 1e-4
    assert tc == pytest.approx(2.269, abs=1e-3)
    assert onsager_kappa(ec) == pytest.approx(1.0, abs=1e-14)


def test_onsager_kappa_bounded():
    ec, _ = onsager2d_tc()
    e = np.linspace(0.01, 2.0, 400)
    k = np.array([onsager_kappa(x) for x in e])
    assert np.all(k <= 1 + 1e-15)
    assert np.all(k[np.abs(e - ec) > 1e-3] < 1)


def test_onsager_known_critical_values():
    # lnZ/N at the critical point is 2G/pi + ln(2)/2 (G = Catalan's constant); energy is -sqrt(2)
    ec, _ = onsager2d_tc()
    res = onsager2d(ec)
    catalan = 0.915965594177219015054603514932
    assert res.lnZ_per_site == pytest.approx(2 * catalan / math.pi + 0.5 * math.log(2), rel=1e-10)
    assert res.energy_per_site == pytest.approx(-math.sqrt(2), rel=1e-8)


def test_onsager_limits_and_monotone():
    assert onsager2d(1e-4).lnZ_per_site == pytest.approx(math.log(2), abs=1e-7)
    # strong coupling: lnZ/N -> 2 eps~
    assert onsager2d(5.0).lnZ_per_site == pytest.approx(10.0, abs=1e-8)
    vals = [onsager2d(x).lnZ_per_site for x in np.linspace(0.05, 1.5, 30)]
    assert np.all(np.diff(vals) > 0)


def test_onsager_energy_is_derivative():
    e, d = 0.3, 1e-5
    fd = (onsager2d(e + d).lnZ_per_site - onsager2d(e - d).lnZ_per_site) / (2 * d)
    assert onsager2d(e).energy_per_site == pytest.approx(-fd, rel=1e-7)


def test_onsager_heat_capacity_peak():
    ec, _ = onsager2d_tc()
    assert abs(onsager_heat_capacity_peak() - ec) < 1e-3


def test_onsager_rejects_nonpositive():
    with pytest.raises(DomainError):
        onsager2d(0.0)


def test_curie_weiss():
    eps, c, T = 1.0, 4, 6.0
    h = 1e-3 * (T - c * eps)
    m = mean_field_magnetization(eps, h, T, c).m
    assert m == pytest.approx(h / (T - c * eps), rel=0.02)


def test_critical_isotherm():
    Tc = 4.0
    for h in (1e-6, 1e-5):
        m = mean_field_magnetization(1.0, h, Tc, 4).m
        assert m == pytest.approx((3 * h / Tc) ** (1 / 3), rel=0.02)


def test_branch_selection_below_tc():
    up = mean_field_magnetization(1.0, 1e-3, 3.0, 4)
    dn = mean_field_magnetization(1.0, -1e-3, 3.0, 4)
    assert up.m > 0 and dn.m < 0 and not up.symmetry_broken
    zero = mean_field_magnetization(1.0, 0.0, 3.0, 4)
    assert zero.symmetry_broken and len(zero.stable) == 2
    assert zero.stable[0] == pytest.approx(-zero.stable[1], rel=1e-12)
    assert len(zero.solutions) == 3


def test_mean_field_heat_capacity_jump():
    Tc = 4.0
    above = mean_field_magnetization(1.0, 0.0, Tc * 1.01, 4)
    assert above.C_per_site == 0.0 and above.E_per_site == 0.0
    below = mean_field_magnetization(1.0, 0.0, Tc * (1 - 1e-6), 4)
    # Landau theory gives a jump of 3/2 per site
    assert below.C_per_site == pytest.approx(1.5, rel=1e-4)


def test_mean_field_exponents():
    beta, gamma, delta = mean_field_exponents_fit()
    assert abs(beta - 0.5) < 0.02
    assert abs(gamma - 1.0) < 0.02
    assert abs(delta - 3.0) < 0.05


@given(st.floats(0.3, 8.0), st.floats(-2, 2))
@settings(max_examples=40, deadline=None)
def test_mean_field_self_consistent(T, h):
    mf = mean_field_magnetization(1.0, h, T, 4)
    for m in mf.solutions:
        assert m == pytest.approx(math.tanh((h + 4 * m) / T), abs=1e-12)
    assert abs(mf.m) <= 1


def test_antiferro_above_tc():
    af = antiferro_mean_field(1.0, 0.0, 6.0, 4)
    assert af.M == pytest.approx(0.0, abs=1e-12) and af.Ms == 0.0
    assert af.chi == pytest.approx(1 / (4 + 6), rel=1e-12)


def test_antiferro_below_tc():
    Tc = 4.0
    T = Tc * (1 - 1e-4)
    af = antiferro_mean_field(1.0, 0.0, T, 4)
    assert af.chi == pytest.approx(1 / (4 * Tc - 2 * T), rel=1e-3)
    # staggered order obeys the ferromagnetic equation
    fm = mean_field_magnetization(1.0, 0.0, T, 4).m
    assert af.Ms == pytest.approx(fm, rel=1e-8)


def test_antiferro_strong_field():
    af = antiferro_mean_field(1.0, 4.5, 0.05, 4)
    assert af.Ms == 0.0
    assert af.M == pytest.approx(1.0, abs=1e-6)


def test_bragg_williams_forms():
    assert bragg_williams_action(0.0, 1.0, 0.0, 3.0, 4) == 0.0
    with pytest.raises(DomainError):
        free_energy_A(1.0, 1.0, 1.0, 4)
    # entropy at M = 0 is ln 2 per site
    d = 1e-6
    S = -(free_energy_A(2.0 + d, 0.0, 1.0, 4) - free_energy_A(2.0 - d, 0.0, 1.0, 4)) / (2 * d)
    assert S == pytest.approx(math.log(2), rel=1e-9)


@given(st.floats(0.3, 8.0), st.floats(0.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_exact_entropy_minimizer_matches_mean_field(T, h):
    if h == 0 and abs(T - 4.0) < 1e-3:
        return
    M = bragg_williams_minimum(1.0, h, T, 4)
    assert M == pytest.approx(mean_field_magnetization(1.0, h, T, 4).m, abs=1e-8)


def test_quartic_minimizer_agrees_near_tc():
    # difference between the two minimizers shrinks like M^5
    Tc = 4.0
    diffs, ms = [], []
    for t in (1e-2, 4e-3, 1e-3):
        T = Tc * (1 - t)
        exact = bragg_williams_minimum(1.0, 0.0, T, 4)
        quartic = bragg_williams_minimum(1.0, 0.0, T, 4, form="quartic")
        diffs.append(abs(exact - quartic))
        ms.append(exact)
    slope = np.polyfit(np.log(ms), np.log(diffs), 1)[0]
    assert slope > 2.9


def test_lee_yang_circle():
    for be in (0.2, 0.5, 1.0):
        z = lee_yang_zeros(8, be, "ring")
        assert len(z) == 8
        assert np.max(np.abs(np.abs(z) - 1)) < 1e-8


def test_lee_yang_free_spins():
    for geom in ("ring", "chain", "complete"):
        z = lee_yang_zeros(8, 0.0, geom)
        assert np.all(z == -1)


def test_lee_yang_evaluation_oracle():
    N = 6
    for be, bh in [(0.3, 0.1), (0.8, -0.4)]:
        c = lee_yang_coefficients(N, be, "ring")
        z = math.exp(2 * bh)
        lnZ = math.log(np.polyval(c[::-1], z)) - bh * N
        assert lnZ == pytest.approx(brute_lnZ(N, be, bh), rel=1e-12)


def test_lee_yang_complete_graph_circle():
    z = lee_yang_zeros(7, 0.3, "complete")
    assert np.max(np.abs(np.abs(z) - 1)) < 1e-8


def test_ornstein_zernike_momentum():
    assert ornstein_zernike(0.0, 3.0) == pytest.approx(9.0)
    assert ornstein_zernike(2.0, math.inf) == pytest.approx(0.25)


def test_ornstein_zernike_real_space():
    xi = 1.0
    r = 5 * xi
    closed = math.exp(-r / xi) / (4 * math.pi * r)
    assert ornstein_zernike_3d_numeric(r, xi) == pytest.approx(closed, rel=0.01)
    assert ornstein_zernike_real(r, xi, 3) == pytest.approx(closed, rel=1e-12)
    # xi = inf in 3D is 1/(4 pi r)
    assert ornstein_zernike_real(2.0, math.inf, 3) == pytest.approx(1 / (8 * math.pi), rel=1e-12)
    assert ornstein_zernike_real(4.0, math.inf, 3) * 4 == pytest.approx(ornstein_zernike_real(1.0, math.inf, 3))


def test_gaussian_fluctuation_scaling():
    for d in (2.0, 3.0):
        rs = np.geomspace(1e-8, 1e-6, 5)
        vals = [gaussian_fluctuation_integral(r, d) for r in rs]
        slope = np.polyfit(np.log(rs), np.log(vals), 1)[0]
        assert slope == pytest.approx((d - 4) / 2, abs=1e-3)


def test_rg_fixed_point_3d():
    fps = rg_fixed_points(3)
    nt = [f for f in fps if f.name == "nontrivial"][0]
    assert abs(nt.r + 1 / 6) < 1e-10 and abs(nt.u - 1 / 9) < 1e-10
    assert sorted(nt.eigenvalues) == pytest.approx([-1.0, 5 / 3])
    assert rg_exponents(3).nu == pytest.approx(0.6)


def test_rg_stationary_point_of_flow():
    nt = rg_fixed_points(3)[1]
    assert nt.r_stationary == pytest.approx(-0.2)
    # the first-order location differs from the exact zero at second order in 4 - d
    for d in (3.0, 3.9, 3.99):
        fp = rg_fixed_points(d)[1]
        assert fp.r - fp.r_stationary == pytest.approx((4 - d) ** 2 / (6 * (d + 2)), rel=1e-9)
    traj = rg_flow(nt.r_stationary, nt.u, 3, 10.0)
    assert np.max(np.abs(traj.r - nt.r_stationary)) < 1e-10
    assert np.max(np.abs(traj.u - 1 / 9)) < 1e-10


def test_rg_flow_follows_linearization():
    nt = rg_fixed_points(3)[1]
    for w, v in zip(nt.eigenvalues, nt.eigenvectors.T):
        start = np.array([nt.r_stationary, nt.u]) + 1e-6 * v
        traj = rg_flow(start[0], start[1], 3, 3.0, samples=4)
        dist0 = np.hypot(traj.r[0] - nt.r_stationary, traj.u[0] - nt.u)
        dist1 = np.hypot(traj.r[-1] - nt.r_stationary, traj.u[-1] - nt.u)
        assert math.log(dist1 / dist0) / 3.0 == pytest.approx(w, rel=1e-3)


def test_rg_merges_with_gaussian_near_4d():
    dists = [math.hypot(fp.r, fp.u) for fp in (rg_fixed_points(4 - e)[1] for e in (0.1, 0.01, 0.001))]
    assert dists[1] / dists[0] == pytest.approx(0.1, rel=1e-12)
    assert dists[2] / dists[1] == pytest.approx(0.1, rel=1e-12)
    assert len(rg_fixed_points(4.0)) == 1


def test_exponent_tables():
    mf = exponents_from_scaling(0.5, 0.0, 4)
    assert (mf.alpha, mf.beta, mf.gamma, mf.delta) == pytest.approx((0, 0.5, 1, 3))
    ising2 = exponents_from_scaling(1.0, 0.25, 2)
    assert (ising2.alpha, ising2.beta, ising2.gamma, ising2.delta) == pytest.approx((0, 1 / 8, 7 / 4, 15))
    assert exponents_from_scaling(1.0, 0.25, 2, "plus").delta == pytest.approx(17.0)
    with pytest.raises(DomainError):
        exponents_from_scaling(1.0, 0.0, 2)


@given(st.floats(0.1, 3), st.floats(0, 1), st.floats(1.5, 4))
def test_rushbrooke_identity(nu, eta, d):
    assume(d - 2 + eta != 0)  # delta is undefined there
    e = exponents_from_scaling(nu, eta, d)
    assert e.alpha + 2 * e.beta + e.gamma == pytest.approx(2.0)
