import itertools
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.special import dawsn
from hypothesis import given, settings, strategies as st

from statmech.errors import DegeneracyError, DomainError, GridError
from statmech.numerics import integrate
from statmech.response import (
    PreparedSystem,
    adiabatic_curvature,
    curvature_vector,
    detailed_balance_check,
    drude_conductance,
    eta_dc_time_domain,
    eta_fgr,
    fd_check,
    fermion_many_body_noise,
    forced_oscillator_spectra,
    kubo_dc_matrix,
    kubo_susceptibility,
    microcanonical_eta,
    ring_correlation_sum,
    scatterer_ring,
    spectral_functions,
    wall_force_intensity,
    wall_friction,
)


def goe(n, rng):
    A = rng.normal(size=(n, n))
    return (A + A.T) / math.sqrt(2 * n)


def gue(n, rng):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / math.sqrt(4 * n)


@pytest.fixture(scope="module")
def random40():
    rng = np.random.default_rng(0)
    H, A = goe(40, rng), goe(40, rng)
    E = np.linalg.eigvalsh(H)
    T = E[-1] - E[0]
    return PreparedSystem.canonical(H, T, sigma=3 * (E[-1] - E[0]) / 39), A


# ---------------------------------------------------------------- spectra

def test_identity_has_only_zero_frequency_weight():
    rng = np.random.default_rng(1)
    sys = PreparedSystem.canonical(goe(6, rng), 1.0, sigma=0.05)
    w = np.linspace(-1, 1, 201)
    sp = spectral_functions(sys, np.eye(6), omega=w)
    g = np.exp(-0.5 * (w / 0.05) ** 2) / (0.05 * math.sqrt(2 * math.pi))
    assert np.allclose(sp.S, 2 * math.pi * g, atol=1e-12)
    assert np.allclose(sp.K, 0, atol=1e-12)


def test_spectral_sum_rule():
    # int S dw / 2pi = <A^2>
    rng = np.random.default_rng(2)
    H, A = goe(8, rng), goe(8, rng)
    sys = PreparedSystem.canonical(H, 0.7, sigma=0.1)
    w = np.linspace(-8, 8, 8001)
    S = spectral_functions(sys, A, omega=w).S
    rho = np.exp(-np.linalg.eigvalsh(H) / 0.7)
    E, V = np.linalg.eigh(H)
    rho_mat = V @ np.diag(np.exp(-(E - E[0]) / 0.7)) @ V.T
    rho_mat /= np.trace(rho_mat)
    expected = np.trace(rho_mat @ A @ A).real
    assert trapezoid(S, w) / (2 * math.pi) == pytest.approx(expected, rel=1e-10)


def test_c_and_k_identities(random40):
    sys, A = random40
    sp = spectral_functions(sys, A)
    Sm = spectral_functions(sys, A, omega=-sp.omega).S
    assert np.allclose(sp.C, 0.5 * (sp.S + Sm))
    assert np.allclose(sp.C, sp.C[::-1])
    assert np.allclose(sp.K, 1j * (sp.S - Sm))


def test_broadened_detailed_balance_identity(random40):
    # S(-w) = e^{-beta w} e^{beta^2 sigma^2 / 2} S(w - beta sigma^2) for a Gaussian kernel
    sys, A = random40
    beta, s = 1 / sys.T, sys.sigma
    w = np.linspace(-1.5, 1.5, 31)
    lhs = spectral_functions(sys, A, omega=-w).S
    rhs = np.exp(-beta * w + 0.5 * (beta * s) ** 2) * spectral_functions(sys, A, omega=w - beta * s * s).S
    assert np.allclose(lhs, rhs, rtol=1e-11)


def test_detailed_balance_within_bound(random40):
    sys, A = random40
    db = detailed_balance_check(sys, A)
    assert db.residual <= db.bound
    assert db.residual < 0.05


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.5, 5.0), st.floats(2.0, 8.0))
def test_detailed_balance_bound_holds(seed, T, spacings):
    rng = np.random.default_rng(seed)
    H, A = goe(20, rng), goe(20, rng)
    E = np.linalg.eigvalsh(H)
    sys = PreparedSystem.canonical(H, T, sigma=spacings * (E[-1] - E[0]) / 19)
    db = detailed_balance_check(sys, A)
    assert db.residual <= db.bound * (1 + 1e-9) + 1e-12
    fd = fd_check(sys, A)
    assert abs(fd.ratio - 1) <= fd.bound * (1 + 1e-9) + 1e-12


def test_detailed_balance_residual_shrinks_with_broadening():
    rng = np.random.default_rng(3)
    H, A = goe(40, rng), goe(40, rng)
    res = [detailed_balance_check(PreparedSystem.canonical(H, 2.0, sigma=s), A).residual for s in (0.4, 0.2, 0.1)]
    assert res[0] > res[1] > res[2]


def test_k_tanh_c_relation(random40):
    sys, A = random40
    w = np.linspace(-1.5, 1.5, 61)
    sp = spectral_functions(sys, A, omega=w, include_diagonal=False)
    pred = 2j * np.tanh(w / (2 * sys.T)) * sp.C
    scale = np.max(np.abs(sp.K))
    assert np.max(np.abs(sp.K - pred)) < 0.05 * scale


def test_reciprocity_cross_spectra():
    rng = np.random.default_rng(4)
    H, A, B = gue(5, rng), gue(5, rng), gue(5, rng)
    sys = PreparedSystem.canonical(H, 0.8, sigma=0.1)
    w = np.linspace(-3, 3, 61)
    sab = spectral_functions(sys, A, B, omega=w)
    sba = spectral_functions(sys, B, A, omega=w)
    assert np.allclose(sab.S, np.conj(sba.S), atol=1e-14)
    assert np.allclose(sab.C, np.conj(sba.C), atol=1e-14)
    assert np.allclose(sab.K, -np.conj(sba.K), atol=1e-14)


def loop_hamiltonian(h):
    H = np.diag([0.0, 0.7, 1.9]).astype(complex)
    for a, b in ((0, 1), (1, 2), (2, 0)):
        H[b, a] += -0.4 * np.exp(1j * h)
        H[a, b] += -0.4 * np.exp(-1j * h)
    return H


@pytest.mark.parametrize("kind,sign", [("even", 1), ("odd", -1)])
def test_onsager_reciprocity_three_level_loop(kind, sign):
    h = 0.37
    A = np.array([[0.3, 0.2, 0.0], [0.2, -0.1, 0.5], [0.0, 0.5, 0.4]], dtype=complex)
    if kind == "even":
        B = np.array([[1.0, 0.0, 0.3], [0.0, 0.2, 0.1], [0.3, 0.1, -0.5]], dtype=complex)
    else:
        B = 1j * np.array([[0, 1, -1], [-1, 0, 1], [1, -1, 0]], dtype=complex)  # current-like, odd
    w = np.linspace(-3, 3, 61)
    fwd = spectral_functions(PreparedSystem.canonical(loop_hamiltonian(h), 0.6, sigma=0.1), A, B, omega=w).S
    rev = spectral_functions(PreparedSystem.canonical(loop_hamiltonian(-h), 0.6, sigma=0.1), B, A, omega=w).S
    assert np.allclose(fwd, sign * rev, atol=1e-13)


# ---------------------------------------------------------------- Kubo and FD

def test_kubo_ohmic_gives_constant_eta():
    eta = 0.7
    w = np.linspace(-5, 5, 1001)
    res = kubo_susceptibility(w, 2j * eta * w)
    assert np.allclose(res.eta, eta, rtol=1e-12)


def test_kubo_routes_agree(random40):
    sys, A = random40
    w = np.linspace(-8, 8, 1601)
    sp = spectral_functions(sys, A, omega=w, include_diagonal=False)
    res = kubo_susceptibility(w, sp.K, sigma_min=sys.sigma)
    mask = np.abs(w) < 3
    fgr = eta_fgr(sys, A, w[mask])
    assert np.max(np.abs(res.eta[mask] - fgr)) < 1e-6 * np.max(np.abs(fgr))


def test_kubo_real_part_against_dawson():
    # lines at +-a broadened by a Gaussian; the Hilbert transform of a Gaussian is a Dawson function
    a, sig, c = 1.3, 0.2, 0.7
    w = np.linspace(-a - 12 * sig, a + 12 * sig, 4001)
    g = lambda x: np.exp(-0.5 * (x / sig) ** 2) / (sig * math.sqrt(2 * math.pi))
    k = 2 * math.pi * c * (g(w - a) - g(w + a))
    res = kubo_susceptibility(w, 1j * k, sigma_min=sig)
    r2 = math.sqrt(2)
    exact = c * r2 / sig * (dawsn((w + a) / (sig * r2)) - dawsn((w - a) / (sig * r2)))
    inner = np.abs(w) < a + 4 * sig
    assert np.max(np.abs(res.chi.real[inner] - exact[inner])) < 1e-6 * np.max(np.abs(exact))
    assert np.allclose(res.chi.imag, 0.5 * k)


def test_kubo_grid_errors():
    w = np.linspace(-1, 1, 11)
    with pytest.raises(GridError):
        kubo_susceptibility(w, w, sigma_min=0.1)
    with pytest.raises(GridError):
        kubo_susceptibility(np.array([0.0, 0.1, 0.3, 0.4, 0.5]), np.zeros(5))


def test_eta_dc_time_domain(random40):
    sys, A = random40
    assert eta_dc_time_domain(sys, A) == pytest.approx(eta_fgr(sys, A, np.zeros(1))[0], rel=1e-8)


def test_fd_ratio_within_bound(random40):
    sys, A = random40
    fd = fd_check(sys, A)
    assert abs(fd.ratio - 1) <= fd.bound
    assert abs(fd.ratio - 1) < 0.05


def test_eta_vanishes_at_high_temperature():
    rng = np.random.default_rng(5)
    H, A = goe(20, rng), goe(20, rng)
    fds = [fd_check(PreparedSystem.canonical(H, T), A) for T in (10.0, 100.0, 1000.0)]
    for fd in fds:
        assert abs(fd.ratio - 1) <= fd.bound
    # nu_T saturates, so eta falls as 1/T
    assert fds[0].eta > fds[1].eta > fds[2].eta > 0
    assert fds[2].eta * 1000 == pytest.approx(fds[1].eta * 100, rel=0.01)


def test_microcanonical_quadratic_three_points():
    E = np.array([1.0, 1.5, 2.0])
    nu = 0.3 + 0.4 * E + 0.2 * E**2
    eta = microcanonical_eta(E, np.ones(3), nu)
    assert np.allclose(eta, 0.5 * (0.4 + 0.4 * E), rtol=1e-12)


def test_microcanonical_to_canonical_by_parts():
    # canonical average of eta_E equals nu_T / 2T once boundary terms vanish
    T = 0.5
    E = np.linspace(0, 20, 40001)
    g = np.ones_like(E)
    nu = 1 + 0.3 * np.sin(E)
    eta_E = microcanonical_eta(E, g, nu)
    w = g * np.exp(-E / T)
    eta_T = trapezoid(w * eta_E, E) / trapezoid(w, E)
    nu_T = trapezoid(w * nu, E) / trapezoid(w, E)
    boundary = 0.5 * nu[0] / trapezoid(w, E)  # from the lower limit of the by-parts integral
    assert eta_T == pytest.approx(nu_T / (2 * T) - boundary, rel=1e-5)


# ---------------------------------------------------------------- curvature and multi-parameter response

def spin_half(X):
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return X[0] * sx + X[1] * sy + X[2] * sz


def test_real_family_has_no_curvature():
    rng = np.random.default_rng(6)
    H0, H1, H2 = goe(4, rng), goe(4, rng), goe(4, rng)
    B = adiabatic_curvature(lambda X: H0 + X[0] * H1 + X[1] * H2, 1, [0.1, -0.2])
    assert np.max(np.abs(B)) < 1e-12


def test_spin_half_curvature_magnitude_and_flux():
    X = np.array([0.3, -0.4, 1.2])
    B = adiabatic_curvature(spin_half, 0, X)
    assert np.allclose(B, -B.T, atol=1e-12)
    b = curvature_vector(B)
    r = np.linalg.norm(X)
    assert np.linalg.norm(b) == pytest.approx(0.5 / r**2, rel=1e-8)
    # flux through a sphere of radius 2 with Gauss-Legendre in cos(theta)
    R = 2.0
    mu, wmu = np.polynomial.legendre.leggauss(16)
    phis = np.linspace(0, 2 * math.pi, 16, endpoint=False)
    flux = 0.0
    for m, wm in zip(mu, wmu):
        s = math.sqrt(1 - m * m)
        for ph in phis:
            nvec = np.array([s * math.cos(ph), s * math.sin(ph), m])
            flux += wm * (2 * math.pi / 16) * R * R * curvature_vector(adiabatic_curvature(spin_half, 0, R * nvec)) @ nvec
    assert abs(flux) == pytest.approx(2 * math.pi, rel=1e-8)


def test_curvature_degeneracy():
    with pytest.raises(DegeneracyError):
        adiabatic_curvature(spin_half, 0, [0.0, 0.0, 0.0])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_kubo_matrix_symmetry(seed):
    rng = np.random.default_rng(seed)
    H = gue(6, rng)
    F1, F2 = gue(6, rng), gue(6, rng)
    sys = PreparedSystem.canonical(H, 0.9, sigma=0.2)
    eta, B = kubo_dc_matrix(sys, [F1, F2])
    assert np.max(np.abs(eta - eta.T)) < 1e-10
    assert np.max(np.abs(B + B.T)) < 1e-10


def test_kubo_b_is_occupation_weighted_curvature():
    rng = np.random.default_rng(7)
    H0, H1, H2 = gue(5, rng), gue(5, rng), gue(5, rng)
    family = lambda X: H0 + X[0] * H1 + X[1] * H2
    sys = PreparedSystem.canonical(H0, 0.6, sigma=0.1)
    _, B = kubo_dc_matrix(sys, [-H1, -H2])
    expected = sum(p * adiabatic_curvature(family, n, [0.0, 0.0]) for n, p in enumerate(sys.p))
    assert np.allclose(B, expected, atol=1e-8)


# ---------------------------------------------------------------- closed forms

def test_drude_and_ring():
    assert scatterer_ring(0.5) == 1.0
    assert drude_conductance(1, 2.0, 2.0) == 1.0
    for g in (0.2, 0.5, 0.9):
        assert ring_correlation_sum(g, 4000) == pytest.approx(scatterer_ring(g), rel=1e-12)
    for bad in (0.0, 1.0):
        with pytest.raises(DomainError):
            scatterer_ring(bad)


def test_wall_formula_matches_fd_route():
    m, T, n, area = 2.0, 1.5, 0.3, 0.7
    v_T = math.sqrt(2 * T / m)
    nu = wall_force_intensity(m, T, n, area)
    assert nu / (2 * T) == pytest.approx(wall_friction(n * m, v_T, area), rel=1e-14)


def test_forced_particle_velocity_area():
    m, eta, T = 1.3, 0.4, 0.9
    f = lambda w: forced_oscillator_spectra(np.array([w]), m, eta, 0.0, T, quantum=False)[2][0]
    area = 2 * integrate(f, 0.0, np.inf) / (2 * math.pi)
    assert area == pytest.approx(T / m, rel=0.01)


def test_forced_oscillator_equipartition_classical():
    m, eta, Om, T = 1.0, 0.2, 1.5, 0.7
    f = lambda w: forced_oscillator_spectra(np.array([w]), m, eta, Om, T, quantum=False)[1][0]
    cxx = 2 * integrate(f, 0.0, np.inf) / (2 * math.pi)
    assert m * Om**2 * cxx == pytest.approx(T, rel=1e-6)


def test_forced_oscillator_quantum_zero_frequency():
    _, Cxx, _ = forced_oscillator_spectra(np.array([0.0, 1e-7]), 1.0, 0.3, 1.0, 0.5)
    assert Cxx[0] == pytest.approx(Cxx[1], rel=1e-6)


# ---------------------------------------------------------------- many-body fermions

def test_fermion_noise_limits():
    w = np.array([-2.0, -0.5, 0.5, 2.0])
    s0 = fermion_many_body_noise(lambda x: np.ones_like(x), 0.1, 0.0, w)
    assert np.all(s0[:2] == 0) and np.allclose(s0[2:], w[2:] / 0.1)
    T, Delta = 0.3, 0.05
    assert fermion_many_body_noise(lambda x: 2.0 * np.ones_like(x), Delta, T, np.array([0.0]))[0] == pytest.approx(2 * T / Delta)
    # detailed balance of the many-body spectrum
    s = fermion_many_body_noise(lambda x: np.ones_like(x), Delta, T, w)
    assert s[0] == pytest.approx(math.exp(-2.0 / T) * s[3], rel=1e-12)


def test_fermion_noise_against_fock_enumeration():
    # 6 equally spaced orbitals, 3 fermions, constant |A_mn|^2 = a2
    n_orb, N, Delta, T, a2 = 6, 3, 1.0, 0.5, 0.04
    eps = Delta * np.arange(n_orb)
    states = list(itertools.combinations(range(n_orb), N))
    energies = np.array([eps[list(s)].sum() for s in states])
    p = np.exp(-(energies - energies.min()) / T)
    p /= p.sum()
    # weight carried at w = k Delta by single-particle hops n -> m
    weights = {}
    for s, ps in zip(states, p):
        occ = set(s)
        for n in occ:
            for m in range(n_orb):
                if m not in occ:
                    k = m - n
                    weights[k] = weights.get(k, 0.0) + ps * a2
    # the formula integrated over one line: C_E(w) has weight a2 per line, density 2 pi / Delta
    for k in (-2, -1, 1, 2):
        w = k * Delta
        formula = fermion_many_body_noise(lambda x: a2 * 2 * math.pi / Delta * np.ones_like(x), Delta, T, np.array([w]))[0]
        # each line carries 2 pi weight; the formula gives density per unit w, times Delta per line
        assert weights[k] * 2 * math.pi == pytest.approx(formula * Delta, rel=0.10)
