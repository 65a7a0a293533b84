"""Fast built-in verification suite backing the ``check`` CLI subcommand.

Each check prints one PASS/FAIL line; the suite covers the closed-form
identities and operator properties that run in a couple of seconds (the full
acceptance battery lives in the pytest suite).
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from . import geometry, grid, profiles, qspace


def _wave_residual(params):
    zs = np.linspace(-5.0, 5.0, 101)
    a, b, c = params.a, params.b, params.c
    k = 0.5 * np.sqrt(a)
    s = profiles.wave_profile(zs, params)
    # analytic second derivative of the tanh profile
    sech2 = 1.0 / np.cosh(k * zs) ** 2
    spp = -params.s_plus * a / 4.0 * sech2 * np.tanh(k * zs)
    resid = -spp + a * s - (b / 3.0) * s**2 + (2.0 * c / 3.0) * s**3
    return float(np.max(np.abs(resid)))


def run_checks(verbose: bool = True) -> bool:
    params = qspace.DEFAULT_PARAMS
    rng = np.random.default_rng(20240817)
    checks = []

    sigma = profiles.surface_tension(params)
    quad_sigma = (2.0 / np.sqrt(3.0)) * quad(
        lambda s: np.sqrt(profiles.f_uni(s, params)), 0.0, params.s_plus, epsabs=1e-14
    )[0]
    checks.append(("surface tension closed form vs quadrature", abs(sigma - quad_sigma) < 1e-12))
    checks.append(("surface tension equals sqrt(3)", abs(sigma - np.sqrt(3.0)) < 1e-12))
    checks.append(("traveling-wave ODE residual < 1e-10", _wave_residual(params) < 1e-10))
    checks.append(
        (
            "quasi-distance identities g(0)=sigma, g(s+)=0, g(s+/2)=sigma/2",
            abs(profiles.quasi_dist_uni(0.0, params) - sigma) < 1e-12
            and abs(profiles.quasi_dist_uni(params.s_plus, params)) < 1e-12
            and abs(profiles.quasi_dist_uni(0.5 * params.s_plus, params) - 0.5 * sigma) < 1e-12,
        )
    )

    q = rng.normal(size=(5, 1000))
    q *= params.c0 / np.maximum(np.sqrt(qspace.norm_sq(q)), 1e-300) * rng.random(1000)
    lip_ok = True
    for eps in (0.05, 0.1):
        bound = np.sqrt(2.0 * (qspace.bulk_energy(q, params) + eps**3))
        mag = np.sqrt(qspace.norm_sq(profiles.dquasi_point(q, params)))
        lip_ok &= bool(np.all(mag <= bound + 1e-12))
    checks.append(("Lipschitz bound |Dd^F| <= sqrt(2 F_eps) on random sample", lip_ok))

    g = grid.Grid2D.square(1.0, 48, bc="periodic")
    f = rng.normal(size=(48, 48))
    w = rng.normal(size=(2, 48, 48))
    lhs = grid.integrate(g, (grid.gradient(g, f) * w).sum(axis=0))
    rhs = grid.integrate(g, f * grid.divergence(g, w))
    checks.append(("gradient/divergence adjointness (periodic)", abs(lhs + rhs) < 1e-10))

    gd = grid.Grid2D.square(1.0, 32)
    x, _ = gd.cell_centers()
    lap = grid.laplacian(gd, x * x)
    checks.append(
        ("5-point Laplacian exact on quadratics", float(np.max(np.abs(lap[4:-4, 4:-4] - 2.0))) < 1e-10)
    )

    xs = np.linspace(-0.5, 0.5, 101)
    phi = geometry.phi_cutoff(xs)
    checks.append(
        (
            "xi cutoff sandwich 1-4x^2 <= phi <= 1-x^2/2",
            bool(np.all(phi >= 1 - 4 * xs**2 - 1e-12) and np.all(phi <= 1 - 0.5 * xs**2 + 1e-12)),
        )
    )

    ok = True
    for name, passed in checks:
        ok &= bool(passed)
        if verbose:
            print(f"[{'PASS' if passed else 'FAIL'}] {name}")
    return ok
