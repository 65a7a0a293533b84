"""Analytic evolving interfaces and the calibration geometry built on them.

Orientation conventions (pinned by the geometry tests):

* the signed distance d is positive in the nematic region, so n = grad d
  points into it and, for a circle of nematic of radius R,
  Laplacian d = -1/R = -H on the interface (H = +1/R);
* the normal velocity is V = -dt d; mean curvature flow V = H then shrinks
  the circle along R(t) = sqrt(R0^2 - 2t).

The vector field xi = phi(d/delta) grad d extends the unit normal with an
even cutoff phi(x) = cos^2(pi x / 2) supported on |x| < 1, which satisfies
1 - 4x^2 <= phi <= 1 - x^2/2 on |x| <= 1/2.  The extended curvature vector
is H(P(x)) n zeta(x) with zeta = 1 on |d| <= delta and 0 beyond 2 delta.
theta is the asymmetric truncation of d: -clamp(d, -delta, delta).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "AnalyticInterface",
    "evolve",
    "phi_cutoff",
    "smoothstep",
    "zeta_bump",
    "zeta_tilde",
    "theta_trunc",
]


def smoothstep(u):
    """Cubic smoothstep 3u^2 - 2u^3 on [0, 1], clamped outside."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def phi_cutoff(x):
    """Even cutoff cos^2(pi x/2) on |x| < 1, zero outside."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    return np.where(inside, np.cos(0.5 * np.pi * np.where(inside, x, 0.0)) ** 2, 0.0)


def zeta_bump(absd, delta):
    """C^1 plateau: 1 for |d| <= delta, 0 for |d| >= 2 delta."""
    return 1.0 - smoothstep((np.asarray(absd, dtype=float) - delta) / delta)


def zeta_tilde(s):
    """Initial-data cutoff: 1 for |s| <= 1/2, 0 for |s| >= 1, smoothstep between."""
    return 1.0 - smoothstep((np.abs(np.asarray(s, dtype=float)) - 0.5) / 0.5)


def theta_trunc(r, delta):
    """Asymmetric truncation of the signed distance: -r clamped to [-delta, delta]."""
    return np.clip(-np.asarray(r, dtype=float), -delta, delta)


@dataclass(frozen=True)
class AnalyticInterface:
    """Closed-form interface: a shrinking circle of nematic or a static flat front.

    The circle encloses the nematic region (d > 0 inside); the flat front has
    the nematic above y0 (d = y - y0).  delta is the calibration cutoff scale.
    """

    kind: str
    delta: float
    center: tuple[float, float] = (0.0, 0.0)
    r0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("circle", "flat"):
            raise ConfigError(f"unknown interface kind {self.kind!r}")
        if self.delta <= 0:
            raise ConfigError("cutoff scale delta must be positive")
        if self.kind == "circle" and self.r0 <= 0:
            raise ConfigError("circle radius must be positive")

    def radius(self, t: float) -> float:
        """R(t) = sqrt(R0^2 - 2t); raises near extinction (R <= 3 delta)."""
        if self.kind != "circle":
            raise ConfigError("radius is defined for circles only")
        rsq = self.r0 * self.r0 - 2.0 * t
        if rsq <= 9.0 * self.delta * self.delta:
            raise ConfigError(f"circle too close to extinction at t={t}")
        return float(np.sqrt(rsq))

    def signed_distance(self, x, y, t: float):
        if self.kind == "circle":
            r = np.hypot(x - self.center[0], y - self.center[1])
            return self.radius(t) - r
        return np.asarray(y, dtype=float) - self.y0

    def normal(self, x, y, t: float):
        """n = grad d, pointing into the nematic side; zero at the circle center."""
        if self.kind == "circle":
            dx = np.asarray(x, dtype=float) - self.center[0]
            dy = np.asarray(y, dtype=float) - self.center[1]
            r = np.hypot(dx, dy)
            safe = np.where(r > 1e-12, r, 1.0)
            good = r > 1e-12
            return np.stack([np.where(good, -dx / safe, 0.0), np.where(good, -dy / safe, 0.0)])
        return np.stack([np.zeros_like(np.asarray(x, float)), np.ones_like(np.asarray(y, float))])

    def curvature(self, t: float) -> float:
        """Scalar curvature at the projected interface point (1/R or 0)."""
        return 1.0 / self.radius(t) if self.kind == "circle" else 0.0

    def normal_velocity(self, t: float) -> float:
        """V = -dt d; equals H for these mean-curvature-flow references."""
        return self.curvature(t)

    def xi(self, x, y, t: float):
        d = self.signed_distance(x, y, t)
        return phi_cutoff(d / self.delta) * self.normal(x, y, t)

    def curvature_ext(self, x, y, t: float):
        """Extended curvature vector H(P(x)) n zeta, supported on |d| < 2 delta."""
        d = self.signed_distance(x, y, t)
        return (self.curvature(t) * zeta_bump(np.abs(d), self.delta)) * self.normal(x, y, t)

    def theta(self, x, y, t: float):
        return theta_trunc(self.signed_distance(x, y, t), self.delta)

    def project(self, x, y, t: float):
        """Orthogonal projection onto the interface."""
        if self.kind == "circle":
            dx = np.asarray(x, dtype=float) - self.center[0]
            dy = np.asarray(y, dtype=float) - self.center[1]
            r = np.hypot(dx, dy)
            safe = np.where(r > 1e-12, r, 1.0)
            rad = self.radius(t)
            return (
                self.center[0] + rad * dx / safe,
                self.center[1] + rad * dy / safe,
            )
        return np.asarray(x, dtype=float), np.full_like(np.asarray(y, float), self.y0)

    def velocity_ext(self, v_reference, x, y, t: float):
        """Constant-in-normal extension v(P(x), t) inside |d| < 3 delta, else 0."""
        px, py = self.project(x, y, t)
        vals = np.asarray(v_reference(px, py, t), dtype=float)
        d = self.signed_distance(x, y, t)
        return np.where(np.abs(d) < 3.0 * self.delta, vals, 0.0)


def evolve(interface: AnalyticInterface, t: float) -> AnalyticInterface:
    """Interface advanced to time t (circle radius law; flat fronts are static)."""
    if t < 0:
        raise ConfigError("cannot evolve to negative time")
    if interface.kind == "circle":
        return AnalyticInterface(
            "circle", interface.delta, interface.center, interface.radius(t), interface.y0
        )
    return interface
