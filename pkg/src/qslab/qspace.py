"""Q-tensor algebra on the 5-dimensional space of symmetric traceless 3x3 matrices.

A Q-tensor is stored by its five independent components

    q = (q11, q12, q13, q22, q23),        q33 = -q11 - q22,

so symmetry and tracelessness hold by construction.  All functions accept
arrays whose *leading* axis has length 5; trailing axes are arbitrary, which
makes a grid field of Q-tensors simply an array of shape (5, nx, ny).

The Landau-de Gennes bulk potential is

    F(Q) = (a/2) tr(Q^2) - (b/3) tr(Q^3) + (c/4) (tr Q^2)^2,

with variation (restricted to the traceless-symmetric space)

    DF(Q) = a Q - b Q^2 + c |Q|^2 Q + (b/3) |Q|^2 I.

At the bistable point b^2 = 27ac the minimizers are Q = 0 and the uniaxial
manifold Q = s_plus (u (x) u - I/3), s_plus = sqrt(3a/c).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BulkParams",
    "DEFAULT_PARAMS",
    "from_matrix",
    "to_matrix",
    "qdot",
    "norm_sq",
    "trace_cubed",
    "bulk_energy",
    "bulk_gradient",
    "uniaxial",
    "uniaxial_retract",
    "eigvals",
    "eig_max",
]

_E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class BulkParams:
    """Coefficients (a, b, c) of the bulk potential with derived constants.

    s_plus is the nematic scalar order parameter (larger root of f'(s) = 0);
    c0 is the maximum-principle sup-norm bound sqrt(b^2/c^2 - 2a/c), valid
    whenever the initial data stays below it.
    """

    a: float = 3.0
    b: float = 9.0
    c: float = 1.0
    s_plus: float = field(init=False)
    c0: float = field(init=False)

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise ValueError("bulk coefficients must be positive")
        disc = self.b * self.b - 24.0 * self.a * self.c
        if disc < 0:
            raise ValueError("b^2 - 24ac < 0: no nematic minimum exists")
        object.__setattr__(self, "s_plus", (self.b + np.sqrt(disc)) / (4.0 * self.c))
        object.__setattr__(
            self, "c0", float(np.sqrt(self.b**2 / self.c**2 - 2.0 * self.a / self.c))
        )

    @property
    def bistable_defect(self) -> float:
        """b^2 - 27ac; zero at the nematic-isotropic coexistence point."""
        return self.b * self.b - 27.0 * self.a * self.c

    def require_bistable(self, tol: float = 1e-12):
        if abs(self.bistable_defect) > tol * max(1.0, self.b * self.b):
            raise ValueError("profile formulas require the bistable point b^2 = 27ac")


DEFAULT_PARAMS = BulkParams()


def from_matrix(m):
    """Extract the five independent components from a (..., 3, 3) matrix."""
    m = np.asarray(m, dtype=float)
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    return np.stack(
        [sym[..., 0, 0], sym[..., 0, 1], sym[..., 0, 2], sym[..., 1, 1], sym[..., 1, 2]]
    )


def to_matrix(q):
    """Reconstruct the full symmetric traceless matrix, shape (3, 3) + trailing."""
    q11, q12, q13, q22, q23 = np.asarray(q, dtype=float)
    q33 = -q11 - q22
    return np.array([[q11, q12, q13], [q12, q22, q23], [q13, q23, q33]])


def qdot(q, p):
    """Frobenius inner product Q : P of two component arrays."""
    return (
        2.0 * (q[0] * p[0] + q[3] * p[3] + q[1] * p[1] + q[2] * p[2] + q[4] * p[4])
        + q[0] * p[3]
        + q[3] * p[0]
    )


def norm_sq(q):
    """|Q|^2 = tr(Q^2)."""
    return 2.0 * (q[0] ** 2 + q[3] ** 2 + q[0] * q[3] + q[1] ** 2 + q[2] ** 2 + q[4] ** 2)


def _det(q):
    q11, q12, q13, q22, q23 = q
    q33 = -q11 - q22
    return (
        q11 * (q22 * q33 - q23 * q23)
        - q12 * (q12 * q33 - q23 * q13)
        + q13 * (q12 * q23 - q22 * q13)
    )


def trace_cubed(q):
    """tr(Q^3) = 3 det(Q) for traceless Q."""
    return 3.0 * _det(q)


def bulk_energy(q, params: BulkParams = DEFAULT_PARAMS):
    """Bulk energy density F(Q); nonnegative at the bistable point."""
    n2 = norm_sq(q)
    return 0.5 * params.a * n2 - params.b * _det(q) + 0.25 * params.c * n2 * n2


def bulk_gradient(q, params: BulkParams = DEFAULT_PARAMS):
    """Variation DF(Q) in Q-space; symmetric traceless by construction."""
    a, b, c = params.a, params.b, params.c
    q11, q12, q13, q22, q23 = np.asarray(q, dtype=float)
    q33 = -q11 - q22
    n2 = norm_sq(q)
    cn2 = a + c * n2
    third = (b / 3.0) * n2
    sq11 = q11 * q11 + q12 * q12 + q13 * q13
    sq12 = q11 * q12 + q12 * q22 + q13 * q23
    sq13 = q11 * q13 + q12 * q23 + q13 * q33
    sq22 = q12 * q12 + q22 * q22 + q23 * q23
    sq23 = q12 * q13 + q22 * q23 + q23 * q33
    return np.stack(
        [
            cn2 * q11 - b * sq11 + third,
            cn2 * q12 - b * sq12,
            cn2 * q13 - b * sq13,
            cn2 * q22 - b * sq22 + third,
            cn2 * q23 - b * sq23,
        ]
    )


def uniaxial(s, u):
    """Uniaxial tensor s (u (x) u - I/3) for a unit director u."""
    u = np.asarray(u, dtype=float)
    if abs(u @ u - 1.0) > 1e-12:
        raise ValueError("director must be a unit vector")
    s = np.asarray(s, dtype=float)
    return np.stack(
        [
            s * (u[0] * u[0] - 1.0 / 3.0),
            s * (u[0] * u[1]),
            s * (u[0] * u[2]),
            s * (u[1] * u[1] - 1.0 / 3.0),
            s * (u[1] * u[2]),
        ]
    )


def eigvals(q):
    """Eigenvalues of the reconstructed matrix, descending, shape (3,) + trailing.

    Closed-form trigonometric roots of lambda^3 - p lambda - det = 0 with
    p = |Q|^2 / 2; deterministic and vectorized over trailing axes.
    """
    q = np.asarray(q, dtype=float)
    p = 0.5 * norm_sq(q)
    detq = _det(q)
    m = 2.0 * np.sqrt(np.maximum(p, 0.0) / 3.0)
    scale = np.where(p > 1e-300, p, 1.0) ** 1.5
    r = np.where(p > 1e-300, 1.5 * np.sqrt(3.0) * detq / scale, 0.0)
    theta = np.arccos(np.clip(r, -1.0, 1.0)) / 3.0
    l1 = m * np.cos(theta)
    l3 = m * np.cos(theta + 2.0 * np.pi / 3.0)
    return np.stack([l1, -(l1 + l3), l3])


def eig_max(q):
    """Largest eigenvalue only (cheaper than the full spectrum on big fields)."""
    q = np.asarray(q, dtype=float)
    p = 0.5 * norm_sq(q)
    detq = _det(q)
    m = 2.0 * np.sqrt(np.maximum(p, 0.0) / 3.0)
    scale = np.where(p > 1e-300, p, 1.0) ** 1.5
    r = np.where(p > 1e-300, 1.5 * np.sqrt(3.0) * detq / scale, 0.0)
    return m * np.cos(np.arccos(np.clip(r, -1.0, 1.0)) / 3.0)


def _sign_normalize(v):
    # first component larger than a tolerance fixes the sign
    for k in range(3):
        if abs(v[k]) > 1e-9:
            return v if v[k] > 0 else -v
    return v


def uniaxial_retract(q, params: BulkParams = DEFAULT_PARAMS):
    """Spectrally retract a single tensor onto the uniaxial branch.

    Returns (s, u, exact): s = (3/2) lambda_max clamped to [0, s_plus], u a
    unit eigenvector of lambda_max, exact iff the two smaller eigenvalues
    coincide within 1e-9 (genuinely uniaxial input).  The isotropic point
    |Q| < 1e-14 returns (0, e3, True) by convention.

    Degenerate lambda_max picks, deterministically, the in-plane direction
    closest to the first canonical axis that is not orthogonal to the
    eigenspace, sign-normalized so its first nonzero component is positive.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 1:
        raise ValueError("uniaxial_retract expects a single 5-component tensor")
    if norm_sq(q) < 1e-28:
        return 0.0, _E3.copy(), True
    lam = eigvals(q)
    exact = bool(abs(lam[1] - lam[2]) <= 1e-9)
    s = float(np.clip(1.5 * lam[0], 0.0, params.s_plus))
    m = to_matrix(q) - lam[0] * np.eye(3)
    rows = [m[0], m[1], m[2]]
    cands = [np.cross(rows[0], rows[1]), np.cross(rows[0], rows[2]), np.cross(rows[1], rows[2])]
    norms = [np.linalg.norm(c) for c in cands]
    best = int(np.argmax(norms))
    qscale = np.sqrt(norm_sq(q))
    if norms[best] > 1e-12 * qscale * qscale:
        u = cands[best] / norms[best]
    else:
        # double eigenvalue: eigenspace is the plane orthogonal to the largest row
        rn = [np.linalg.norm(r) for r in rows]
        k = int(np.argmax(rn))
        if rn[k] <= 1e-12 * qscale:
            return s, _E3.copy(), exact
        rhat = rows[k] / rn[k]
        for e in np.eye(3):
            w = e - (e @ rhat) * rhat
            wn = np.linalg.norm(w)
            if wn > 1e-9:
                u = w / wn
                break
    return s, _sign_normalize(u), exact
