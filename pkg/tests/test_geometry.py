"""Analytic interfaces, the calibration field xi, cutoffs, and truncation."""

import numpy as np
import pytest

from qslab.errors import ConfigError
from qslab.geometry import AnalyticInterface, evolve, phi_cutoff, theta_trunc, zeta_tilde

DELTA = 0.1


def circle(r0=0.6):
    return AnalyticInterface("circle", DELTA, (0.0, 0.0), r0)


def flat(y0=0.0):
    return AnalyticInterface("flat", DELTA, y0=y0)


def test_evolve_radius_law():
    c = circle(0.6)
    assert abs(evolve(c, 0.1).r0 - 0.4) < 1e-14
    assert abs(evolve(c, 0.0).r0 - 0.6) < 1e-14
    f = flat(0.2)
    assert evolve(f, 0.3) == f


def test_evolve_extinction_error():
    with pytest.raises(ConfigError):
        circle(0.6).radius(0.2)  # R = sqrt(0.36-0.4) imaginary
    with pytest.raises(ConfigError):
        circle(0.6).radius(0.1755)  # R just below 3*delta


def test_signed_distance_examples():
    c = AnalyticInterface("circle", DELTA, (0.0, 0.0), 0.5)
    assert abs(c.signed_distance(0.25, 0.0, 0.0) - 0.25) < 1e-14
    assert abs(c.signed_distance(0.5, 0.0, 0.0)) < 1e-14
    f = flat(0.0)
    assert abs(f.signed_distance(0.3, -0.2, 0.0) + 0.2) < 1e-14


def test_normal_points_into_nematic():
    c = circle()
    n = c.normal(0.3, 0.0, 0.0)
    assert np.allclose(n.ravel(), [-1.0, 0.0])  # toward the center (d increases inward)
    f = flat()
    assert np.allclose(f.normal(0.1, 0.4, 0.0).ravel(), [0.0, 1.0])


def test_xi_on_interface_is_unit_normal():
    c = circle(0.5)
    xi = c.xi(0.5, 0.0, 0.0)
    assert abs(np.hypot(*xi.ravel()) - 1.0) < 1e-14


def test_xi_vanishes_outside_support():
    c = circle(0.5)
    for x in (0.5 - DELTA, 0.5 + DELTA, 0.9):
        xi = c.xi(x, 0.0, 0.0)
        assert np.hypot(*xi.ravel()) == 0.0


def test_xi_half_width_magnitude():
    c = circle(0.5)
    xi = c.xi(0.5 - DELTA / 2, 0.0, 0.0)  # d = delta/2
    assert abs(np.hypot(*xi.ravel()) - 0.5) < 1e-14


def test_phi_sandwich():
    x = np.linspace(-0.5, 0.5, 101)
    phi = phi_cutoff(x)
    assert np.all(phi >= 1 - 4 * x**2 - 1e-12)
    assert np.all(phi <= 1 - 0.5 * x**2 + 1e-12)
    assert np.all(phi_cutoff(np.array([1.0, 1.3, -2.0])) == 0.0)


def test_xi_norm_bound_with_fitted_constant():
    # |xi| <= 1 - k min(d^2, 1) for some fitted k > 0 over a grid of points
    c = circle()
    x = np.linspace(-0.95, 0.95, 120)
    X, Y = np.meshgrid(x, x, indexing="ij")
    d = c.signed_distance(X, Y, 0.0)
    mag = np.hypot(*c.xi(X, Y, 0.0))
    w = np.minimum(d * d, 1.0)
    mask = w > 1e-12
    k = np.min((1.0 - mag[mask]) / w[mask])
    assert k > 0.05


def test_curvature_ext_on_interface():
    c = circle(0.5)
    hv = c.curvature_ext(0.5, 0.0, 0.0)
    assert np.allclose(hv.ravel(), [-2.0, 0.0])  # H = 1/R = 2 along n = (-1, 0)


def test_curvature_ext_compact_support():
    c = circle(0.5)
    assert np.allclose(c.curvature_ext(0.5 - 2 * DELTA, 0.0, 0.0), 0.0)
    assert np.allclose(c.curvature_ext(0.5 + 2 * DELTA, 0.0, 0.0), 0.0)
    # plateau: equals H n inside |d| <= delta
    hv = c.curvature_ext(0.5 - 0.9 * DELTA, 0.0, 0.0)
    assert abs(np.hypot(*hv.ravel()) - 2.0) < 1e-14


def test_curvature_constant_along_xi():
    # (xi . grad) H = 0 inside the plateau, checked by centered differences
    c = circle()
    h = 1e-4
    for pt in [(0.55, 0.1), (0.52, -0.2), (0.61, 0.05)]:
        x, y = pt
        xi = c.xi(x, y, 0.0).ravel()
        if np.hypot(*xi) < 0.5:
            continue
        dh = (
            np.array(c.curvature_ext(x + h * xi[0], y + h * xi[1], 0.0)).ravel()
            - np.array(c.curvature_ext(x - h * xi[0], y - h * xi[1], 0.0)).ravel()
        ) / (2 * h)
        assert np.max(np.abs(dh)) < 1e-6


def test_laplacian_of_distance_is_minus_curvature():
    # 5-point stencil of d at interface samples vs -H
    c = circle(0.6)
    h = 1e-3
    for ang in np.linspace(0, 2 * np.pi, 7):
        x, y = 0.6 * np.cos(ang), 0.6 * np.sin(ang)
        lap = (
            c.signed_distance(x + h, y, 0.0)
            + c.signed_distance(x - h, y, 0.0)
            + c.signed_distance(x, y + h, 0.0)
            + c.signed_distance(x, y - h, 0.0)
            - 4.0 * c.signed_distance(x, y, 0.0)
        ) / h**2
        assert abs(lap + c.curvature(0.0)) < 1e-4


def test_theta_truncation_values():
    assert theta_trunc(0.05, 0.1) == -0.05
    assert theta_trunc(0.5, 0.1) == -0.1
    assert theta_trunc(-0.5, 0.1) == 0.1


def test_theta_coercivity():
    d = np.linspace(-3, 3, 601)
    th = np.abs(theta_trunc(d, DELTA))
    lo = DELTA * np.minimum(np.abs(d), 1.0)
    hi = np.minimum(np.abs(d), 1.0)
    assert np.all(th >= lo - 1e-14)
    assert np.all(th <= hi + 1e-14)


def test_transport_identity_circle():
    # dt d + (H + v) . grad d = 0 in the plateau, finite differences in t and x
    c = circle(0.6)
    tau, h = 1e-5, 1e-4
    for x, y in [(0.55, 0.0), (0.4, 0.35), (0.0, -0.58)]:
        dt_d = (c.signed_distance(x, y, tau) - c.signed_distance(x, y, 0.0)) / tau
        gx = (c.signed_distance(x + h, y, 0.0) - c.signed_distance(x - h, y, 0.0)) / (2 * h)
        gy = (c.signed_distance(x, y + h, 0.0) - c.signed_distance(x, y - h, 0.0)) / (2 * h)
        hv = c.curvature_ext(x, y, 0.0).ravel()
        resid = dt_d + hv[0] * gx + hv[1] * gy
        assert abs(resid) < 1e-4  # O(tau + h^2)


def test_velocity_extension():
    c = circle(0.6)

    def vref(px, py, t):
        return np.stack([np.sin(px + py), np.cos(px - py)])

    # fixed point of the projection on the interface
    got = c.velocity_ext(vref, 0.6, 0.0, 0.0).ravel()
    assert np.allclose(got, [np.sin(0.6), np.cos(0.6)], atol=1e-14)
    # zero reference gives zero everywhere
    zero = c.velocity_ext(lambda px, py, t: np.zeros((2,) + np.shape(px)), 0.5, 0.1, 0.0)
    assert np.allclose(zero, 0.0)
    # constancy along the normal: (xi . grad) v_ext = 0
    h = 1e-5
    x, y = 0.52, 0.12
    xi = c.xi(x, y, 0.0).ravel()
    dv = (
        c.velocity_ext(vref, x + h * xi[0], y + h * xi[1], 0.0)
        - c.velocity_ext(vref, x - h * xi[0], y - h * xi[1], 0.0)
    ) / (2 * h)
    assert np.max(np.abs(dv)) < 1e-8


def test_zeta_tilde_plateaus():
    assert zeta_tilde(0.3) == 1.0
    assert zeta_tilde(-0.5) == 1.0
    assert zeta_tilde(1.0) == 0.0
    assert zeta_tilde(-1.4) == 0.0
    mid = zeta_tilde(0.75)
    assert 0.0 < mid < 1.0


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        AnalyticInterface("sphere", DELTA)
