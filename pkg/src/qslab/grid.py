"""Uniform cell-centered grid, finite-difference operators, staggered helpers.

Fields are plain numpy arrays whose last two axes are (nx, ny); leading axes
carry components (2 for vectors, 5 for Q-tensors).  Boundary handling:

* ``periodic``      -- wrap;
* ``dirichlet_zero``-- ghost cells by odd reflection about the wall value 0
  (second order at the wall, which lies half a cell outside the last center).

Staggered (MAC) velocity layout for the no-slip box: u on vertical faces with
shape (nx+1, ny), v on horizontal faces with shape (nx, ny+1); boundary faces
carry the no-slip value 0.  For periodic runs both components live on (nx, ny)
arrays, u[i, j] sitting on the face between cells i-1 and i.

A raw snapshot format for debugging/plot scripts: 32-byte header
(magic ``QSLF``, uint32 version, nx, ny, ncomp, zero padding) followed by
float64 data in C order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Grid2D",
    "pad",
    "laplacian",
    "gradient",
    "divergence",
    "advect",
    "integrate",
    "face_zeros",
    "div_faces",
    "faces_to_centers",
    "snapshot_dump",
    "snapshot_load",
]

_BCS = ("dirichlet_zero", "periodic")
_MAGIC = b"QSLF"
_VERSION = 1


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    h: float
    origin: tuple[float, float] = (0.0, 0.0)
    bc: str = "dirichlet_zero"

    def __post_init__(self):
        if self.h <= 0 or self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs h > 0 and at least 2 cells per axis")
        if self.bc not in _BCS:
            raise ValueError(f"bc must be one of {_BCS}")

    @classmethod
    def square(cls, half_width: float, nx: int, bc: str = "dirichlet_zero") -> "Grid2D":
        h = 2.0 * half_width / nx
        return cls(nx, nx, h, (-half_width, -half_width), bc)

    @property
    def lx(self) -> float:
        return self.nx * self.h

    @property
    def ly(self) -> float:
        return self.ny * self.h

    @property
    def cell_volume(self) -> float:
        return self.h * self.h

    @lru_cache(maxsize=8)
    def cell_centers(self):
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.h
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.h
        return np.meshgrid(x, y, indexing="ij")


def pad(grid: Grid2D, f):
    """Add one ghost layer on the last two axes according to the grid bc.

    Corner ghosts are filled for the periodic wrap but left zero for
    dirichlet_zero; no operator in this module touches them.
    """
    f = np.asarray(f, dtype=float)
    out = np.zeros(f.shape[:-2] + (f.shape[-2] + 2, f.shape[-1] + 2), dtype=float)
    out[..., 1:-1, 1:-1] = f
    if grid.bc == "periodic":
        out[..., 0, 1:-1] = f[..., -1, :]
        out[..., -1, 1:-1] = f[..., 0, :]
        out[..., 1:-1, 0] = f[..., :, -1]
        out[..., 1:-1, -1] = f[..., :, 0]
        out[..., 0, 0] = f[..., -1, -1]
        out[..., 0, -1] = f[..., -1, 0]
        out[..., -1, 0] = f[..., 0, -1]
        out[..., -1, -1] = f[..., 0, 0]
        return out
    np.negative(f[..., 0, :], out=out[..., 0, 1:-1])
    np.negative(f[..., -1, :], out=out[..., -1, 1:-1])
    np.negative(f[..., :, 0], out=out[..., 1:-1, 0])
    np.negative(f[..., :, -1], out=out[..., 1:-1, -1])
    return out


def laplacian(grid: Grid2D, f):
    """Standard 5-point Laplacian."""
    p = pad(grid, f)
    return (
        p[..., 2:, 1:-1] + p[..., :-2, 1:-1] + p[..., 1:-1, 2:] + p[..., 1:-1, :-2]
        - 4.0 * p[..., 1:-1, 1:-1]
    ) / grid.h**2


def gradient(grid: Grid2D, f):
    """Centered gradient; output gains a leading axis of length 2."""
    p = pad(grid, f)
    gx = (p[..., 2:, 1:-1] - p[..., :-2, 1:-1]) / (2.0 * grid.h)
    gy = (p[..., 1:-1, 2:] - p[..., 1:-1, :-2]) / (2.0 * grid.h)
    return np.stack([gx, gy])


def divergence(grid: Grid2D, v):
    """Centered divergence of a cell-centered vector field (2, ..., nx, ny)."""
    g = gradient(grid, np.asarray(v, dtype=float))
    return g[0, 0] + g[1, 1]


def advect(grid: Grid2D, vcc, f):
    """Centered (v . grad) f with a cell-centered velocity (2, nx, ny)."""
    g = gradient(grid, f)
    return vcc[0] * g[0] + vcc[1] * g[1]


def integrate(grid: Grid2D, f) -> float:
    """Midpoint quadrature: cell sum times h^2."""
    return float(np.sum(f) * grid.cell_volume)


# ---------------------------------------------------------------------------
# staggered-velocity helpers


def face_zeros(grid: Grid2D):
    """Zero-initialized staggered velocity pair for the grid's bc."""
    if grid.bc == "periodic":
        return np.zeros((grid.nx, grid.ny)), np.zeros((grid.nx, grid.ny))
    return np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1))


def div_faces(grid: Grid2D, u, v):
    """Compact divergence of face-normal velocities at cell centers."""
    h = grid.h
    if grid.bc == "periodic":
        return (np.roll(u, -1, axis=0) - u) / h + (np.roll(v, -1, axis=1) - v) / h
    return (u[1:, :] - u[:-1, :]) / h + (v[:, 1:] - v[:, :-1]) / h


def faces_to_centers(grid: Grid2D, u, v):
    """Average face-normal velocities to cell centers, shape (2, nx, ny)."""
    if grid.bc == "periodic":
        ucc = 0.5 * (u + np.roll(u, -1, axis=0))
        vcc = 0.5 * (v + np.roll(v, -1, axis=1))
    else:
        ucc = 0.5 * (u[:-1, :] + u[1:, :])
        vcc = 0.5 * (v[:, :-1] + v[:, 1:])
    return np.stack([ucc, vcc])


# ---------------------------------------------------------------------------
# raw snapshot format


def snapshot_dump(path, field):
    """Write a (ncomp, nx, ny) or (nx, ny) float array in the QSLF format."""
    f = np.asarray(field, dtype=np.float64)
    if f.ndim == 2:
        f = f[None]
    if f.ndim != 3:
        raise ValueError("snapshot_dump expects a (ncomp, nx, ny) array")
    ncomp, nx, ny = f.shape
    header = struct.pack("<4sIIII", _MAGIC, _VERSION, nx, ny, ncomp)
    header += b"\x00" * (32 - len(header))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f).tobytes())


def snapshot_load(path):
    with open(path, "rb") as fh:
        header = fh.read(32)
        magic, version, nx, ny, ncomp = struct.unpack("<4sIIII", header[:20])
        if magic != _MAGIC:
            raise ValueError("not a QSLF snapshot")
        if version != _VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        data = np.frombuffer(fh.read(8 * ncomp * nx * ny), dtype=np.float64)
    return data.reshape(ncomp, nx, ny).copy()
