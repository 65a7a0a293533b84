"""One-dimensional structure functions of the bistable bulk potential.

Restricted to uniaxial tensors Q = s (u (x) u - I/3) the potential becomes

    f(s) = (s^2/27) (9a - 2bs + 3cs^2) = (c/9) s^2 (s - s_plus)^2,

the second equality holding at the bistable point b^2 = 27ac.  The module
provides

* the optimal transition profile S(z) = (s_plus/2)(1 + tanh(sqrt(a) z / 2)),
  solving -S'' + aS - (b/3)S^2 + (2c/3)S^3 = 0 between the two wells,
* the uniaxial quasi-distance to the nematic manifold

      g(s0) = (2/sqrt 3) \\int_{s0}^{s_plus} sqrt(f),

  in closed form through the antiderivative of sqrt(f) = (sqrt c/3) s (s_plus - s),
* the surface tension sigma = g(0)  (= sqrt 3 for the default coefficients),
* pointwise maps psi = g(s(Q)) and the quasi-distance gradient
  -sqrt(2 f(s)) Q/|Q|, evaluated through the spectral retraction.

The retraction scalar is clamped to [0, s_plus]; since the trace-free
constraint forces lambda_max >= 0 only the upper clamp can fire.  The clamp
makes the Lipschitz bound |Dd^F(Q)| <= sqrt(2 F(Q)) hold for every Q, with
equality exactly on the uniaxial branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qspace import BulkParams, DEFAULT_PARAMS, eig_max, norm_sq

__all__ = [
    "ProfileTables",
    "f_uni",
    "sqrt_f",
    "wave_profile",
    "quasi_dist_uni",
    "surface_tension",
    "scalar_order",
    "psi_point",
    "dquasi_point",
]


def f_uni(s, params: BulkParams = DEFAULT_PARAMS):
    """Uniaxial bulk energy f(s), valid for all real s."""
    s = np.asarray(s, dtype=float)
    return (s * s / 27.0) * (9.0 * params.a - 2.0 * params.b * s + 3.0 * params.c * s * s)


def sqrt_f(s, params: BulkParams = DEFAULT_PARAMS):
    """sqrt(f) on the corridor [0, s_plus], via the factorized form; input clamped."""
    params.require_bistable()
    s = np.clip(np.asarray(s, dtype=float), 0.0, params.s_plus)
    return (np.sqrt(params.c) / 3.0) * s * (params.s_plus - s)


def wave_profile(z, params: BulkParams = DEFAULT_PARAMS):
    """Increasing heteroclinic S(z) connecting 0 to s_plus; S(0) = s_plus/2."""
    params.require_bistable()
    z = np.asarray(z, dtype=float)
    return 0.5 * params.s_plus * (1.0 + np.tanh(0.5 * np.sqrt(params.a) * z))


def quasi_dist_uni(s0, params: BulkParams = DEFAULT_PARAMS):
    """g(s0) = (2/sqrt 3) int_{s0}^{s_plus} sqrt(f); closed form, s0 clamped."""
    params.require_bistable()
    sp = params.s_plus
    s0 = np.clip(np.asarray(s0, dtype=float), 0.0, sp)
    pref = 2.0 * np.sqrt(params.c) / (3.0 * np.sqrt(3.0))
    return pref * (sp**3 / 6.0 - sp * s0 * s0 / 2.0 + s0**3 / 3.0)


def surface_tension(params: BulkParams = DEFAULT_PARAMS) -> float:
    """sigma = g(0), the energy of the optimal 1D transition."""
    return float(quasi_dist_uni(0.0, params))


def scalar_order(q, params: BulkParams = DEFAULT_PARAMS):
    """Retracted scalar order (3/2) lambda_max(Q), unclamped; works on fields."""
    return 1.5 * eig_max(q)


def psi_point(q, params: BulkParams = DEFAULT_PARAMS):
    """Quasi-distance to the nematic manifold, g(s(Q)) in [0, sigma]."""
    return quasi_dist_uni(scalar_order(q, params), params)


def dquasi_point(q, params: BulkParams = DEFAULT_PARAMS):
    """Gradient of the quasi-distance: -sqrt(2 f(s)) Q/|Q| (zero at Q = 0)."""
    q = np.asarray(q, dtype=float)
    n = np.sqrt(norm_sq(q))
    mag = np.sqrt(2.0) * sqrt_f(scalar_order(q, params), params)
    coef = np.where(n > 1e-14, -mag / np.where(n > 1e-14, n, 1.0), 0.0)
    return coef * q


@dataclass(frozen=True)
class ProfileTables:
    """Bundle of bulk parameters with the derived surface tension."""

    params: BulkParams = DEFAULT_PARAMS
    sigma: float = field(init=False)

    def __post_init__(self):
        self.params.require_bistable()
        object.__setattr__(self, "sigma", surface_tension(self.params))
