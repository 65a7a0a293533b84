"""Structure functions: f, the traveling wave, quasi-distance g, surface tension."""

import numpy as np
import pytest
from scipy.integrate import quad

from qslab.profiles import (
    ProfileTables,
    dquasi_point,
    f_uni,
    psi_point,
    quasi_dist_uni,
    sqrt_f,
    surface_tension,
    wave_profile,
)
from qslab.qspace import DEFAULT_PARAMS, bulk_energy, norm_sq, qdot, uniaxial

P = DEFAULT_PARAMS
SIGMA = np.sqrt(3.0)
RNG = np.random.default_rng(77)


def test_f_uni_values():
    assert f_uni(0.0) == 0.0
    assert abs(f_uni(3.0)) < 1e-14
    assert abs(f_uni(1.5) - 9.0 / 16.0) < 1e-14
    assert abs(f_uni(1.0) - 4.0 / 9.0) < 1e-14


def test_f_uni_factorized_form():
    s = np.linspace(-1.0, 4.0, 200)
    assert np.allclose(f_uni(s), (P.c / 9.0) * s**2 * (s - P.s_plus) ** 2, atol=1e-12)


def test_wave_profile_values():
    assert abs(wave_profile(0.0) - 1.5) < 1e-14
    assert abs(wave_profile(2.0 / np.sqrt(3.0)) - 1.5 * (1 + np.tanh(1.0))) < 1e-12
    z = np.linspace(-30, 30, 100)
    s = wave_profile(z)
    assert np.all(np.diff(s) > 0)
    assert s[0] < 1e-10 and abs(s[-1] - 3.0) < 1e-10


def test_wave_profile_ode_residual():
    # oracle: analytic derivatives of the tanh profile
    z = np.linspace(-5.0, 5.0, 101)
    k = 0.5 * np.sqrt(P.a)
    s = wave_profile(z)
    spp = -P.s_plus * P.a / 4.0 * np.tanh(k * z) / np.cosh(k * z) ** 2
    resid = -spp + P.a * s - (P.b / 3.0) * s**2 + (2.0 * P.c / 3.0) * s**3
    assert np.max(np.abs(resid)) < 1e-10


def test_wave_first_integral():
    # S' = sqrt(3 f(S)) characterizes the optimal profile
    z = np.linspace(-4, 4, 81)
    k = 0.5 * np.sqrt(P.a)
    sp = P.s_plus * k / 2.0 / np.cosh(k * z) ** 2
    assert np.max(np.abs(sp - np.sqrt(3.0 * f_uni(wave_profile(z))))) < 1e-11


def test_quasi_dist_identities():
    assert abs(quasi_dist_uni(P.s_plus)) < 1e-14
    assert abs(quasi_dist_uni(0.0) - SIGMA) < 1e-12
    assert abs(quasi_dist_uni(1.5) - 0.5 * SIGMA) < 1e-12


def test_quasi_dist_monotone_decreasing():
    s = np.linspace(0.0, 3.0, 301)
    g = quasi_dist_uni(s)
    assert np.all(np.diff(g) < 0)
    assert np.all(g >= -1e-15) and np.all(g <= SIGMA + 1e-15)


def test_quasi_dist_derivative_matches_sqrt_f():
    # g'(s) = -(2/sqrt 3) sqrt(f) by finite differences at 100 interior points
    s = np.linspace(0.02, 2.98, 100)
    h = 1e-6
    fd = (quasi_dist_uni(s + h) - quasi_dist_uni(s - h)) / (2 * h)
    assert np.max(np.abs(fd + (2.0 / np.sqrt(3.0)) * sqrt_f(s))) < 1e-8


def test_surface_tension_quadrature_oracle():
    # independent adaptive quadrature of (2/sqrt 3) sqrt(f)
    val, _ = quad(lambda t: np.sqrt(f_uni(t)), 0.0, P.s_plus, epsabs=1e-15, epsrel=1e-13)
    assert abs(surface_tension() - (2.0 / np.sqrt(3.0)) * val) < 1e-12
    assert abs(surface_tension() - SIGMA) < 1e-12


def test_sigma_symmetry():
    assert abs(0.5 * surface_tension() - quasi_dist_uni(0.5 * P.s_plus)) < 1e-12


def test_profile_tables():
    t = ProfileTables()
    assert abs(t.sigma - SIGMA) < 1e-12


def test_psi_point_examples():
    assert abs(psi_point(np.zeros(5)) - SIGMA) < 1e-12
    assert abs(psi_point(uniaxial(3.0, [0, 0, 1]))) < 1e-12
    assert abs(psi_point(uniaxial(1.5, [0, 1, 0])) - 0.5 * SIGMA) < 1e-12


def test_psi_point_equals_g_on_uniaxial():
    u = np.array([2.0, -1.0, 2.0]) / 3.0
    s = np.linspace(0.0, 3.0, 31)
    for sv in s:
        assert abs(psi_point(uniaxial(sv, u)) - quasi_dist_uni(sv)) < 1e-12


def test_dquasi_examples():
    assert np.allclose(dquasi_point(np.zeros(5)), 0.0)
    q = uniaxial(1.5, [1, 0, 0])
    d = dquasi_point(q)
    mag = np.sqrt(norm_sq(d))
    assert abs(mag - np.sqrt(2.0) * 0.75) < 1e-12
    # direction -Q/|Q|, i.e. equality case of the Lipschitz bound
    qhat = q / np.sqrt(norm_sq(q))
    assert np.allclose(d, -mag * qhat, atol=1e-13)
    assert abs(mag - np.sqrt(2.0 * bulk_energy(q))) < 1e-12


def test_dquasi_finite_difference_along_uniaxial():
    # oracle: finite difference of psi along the scalar-order direction
    u = np.array([0.0, 1.0, 0.0])
    m = uniaxial(1.0, u)
    h = 1e-6
    for s in (0.4, 1.1, 1.9, 2.6):
        fd = (psi_point(uniaxial(s + h, u)) - psi_point(uniaxial(s - h, u))) / (2 * h)
        exact = qdot(dquasi_point(uniaxial(s, u)), m)
        assert abs(fd - exact) < 1e-6


@pytest.mark.parametrize("eps", [0.05, 0.1])
def test_lipschitz_bound_random_sample(eps):
    # |Dd^F(Q)| <= sqrt(2 F_eps(Q)) for 1e4 random tensors with |Q| <= c0
    q = RNG.normal(size=(5, 10_000))
    scale = P.c0 * RNG.random(10_000) / np.sqrt(norm_sq(q))
    q *= scale
    mag = np.sqrt(norm_sq(dquasi_point(q)))
    bound = np.sqrt(2.0 * (bulk_energy(q) + eps**3))
    assert np.all(mag <= bound + 1e-12)


def test_lipschitz_equality_on_uniaxial():
    # equality within 1e-10 on exact uniaxial samples with s in [0, s_plus]
    for s in np.linspace(0.0, 3.0, 25):
        u = RNG.normal(size=3)
        u /= np.linalg.norm(u)
        q = uniaxial(s, u)
        mag = np.sqrt(norm_sq(dquasi_point(q)))
        assert abs(mag - np.sqrt(2.0 * bulk_energy(q))) < 1e-10


def test_clamp_outside_corridor():
    # s > s_plus maps to the boundary values g = 0, sqrt_f = 0
    q = uniaxial(4.0, [0, 0, 1])
    assert abs(psi_point(q)) < 1e-12
    assert np.allclose(dquasi_point(q), 0.0)
