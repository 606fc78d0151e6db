"""Binary sinogram (TCTS) and volume (TCTV) file round-tripping.

TCTS v1 layout, little-endian throughout:
  "TCTS", u32 version=1, u32 n_phi, u32 n_theta, u32 n_r, f64 r_max,
  n_theta f64 polar nodes, n_theta f64 polar weights,
  n_phi*n_theta mask bytes (0/1), n_phi*n_theta*n_r f64 data (C order,
  radius fastest).

TCTV v1 layout:
  "TCTV", u32 version=1, u32 dim, f64 spacing, 3x f64 origin,
  dim^3 f32 data (C order, z fastest).
"""

from __future__ import annotations

import struct

import numpy as np

from .geometry import QuadratureRule, RadialGrid, TransducerGrid
from .phantom import Volume
from .sinogram import ScanMask, Sinogram

__all__ = ["write_sinogram", "read_sinogram", "write_volume", "read_volume"]

_SINO_MAGIC = b"TCTS"
_VOL_MAGIC = b"TCTV"


def write_sinogram(s: Sinogram, path) -> None:
    with open(path, "wb") as f:
        f.write(_SINO_MAGIC)
        f.write(struct.pack("<IIII", 1, s.grid.n_phi, s.grid.n_theta, s.radial.n_r))
        f.write(struct.pack("<d", s.radial.r_max))
        f.write(np.asarray(s.grid.theta_rule.nodes, "<f8").tobytes())
        f.write(np.asarray(s.grid.theta_rule.weights, "<f8").tobytes())
        f.write(s.mask.active.astype(np.uint8).tobytes())
        f.write(np.asarray(s.data, "<f8").tobytes())


def _positions(phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    out = np.empty((phi.size, theta.size, 3))
    sin_t = np.sin(theta)
    out[:, :, 0] = np.cos(phi)[:, None] * sin_t[None, :]
    out[:, :, 1] = np.sin(phi)[:, None] * sin_t[None, :]
    out[:, :, 2] = np.broadcast_to(np.cos(theta), (phi.size, theta.size))
    return out


def read_sinogram(path) -> Sinogram:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _SINO_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_SINO_MAGIC!r}")
        version, n_phi, n_theta, n_r = struct.unpack("<IIII", f.read(16))
        if version != 1:
            raise ValueError(f"{path}: unsupported TCTS version {version}")
        (r_max,) = struct.unpack("<d", f.read(8))
        nodes = np.frombuffer(f.read(8 * n_theta), "<f8").copy()
        weights = np.frombuffer(f.read(8 * n_theta), "<f8").copy()
        mask = (
            np.frombuffer(f.read(n_phi * n_theta), np.uint8)
            .reshape(n_phi, n_theta)
            .astype(bool)
        )
        data = (
            np.frombuffer(f.read(8 * n_phi * n_theta * n_r), "<f8")
            .copy()
            .reshape(n_phi, n_theta, n_r)
        )
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    grid = TransducerGrid(
        n_phi=n_phi,
        n_theta=n_theta,
        phi_values=phi,
        theta_rule=QuadratureRule(nodes=nodes, weights=weights),
        positions=_positions(phi, nodes),
    )
    radial = RadialGrid(n_r=n_r, r_max=r_max, radii=np.arange(n_r) * (r_max / (n_r - 1)))
    return Sinogram(grid=grid, radial=radial, data=data, mask=ScanMask(active=mask))


def write_volume(v: Volume, path) -> None:
    with open(path, "wb") as f:
        f.write(_VOL_MAGIC)
        f.write(struct.pack("<II", 1, v.dim))
        f.write(struct.pack("<d", v.spacing))
        f.write(struct.pack("<ddd", *v.origin))
        f.write(np.asarray(v.data, "<f4").tobytes())


def read_volume(path) -> Volume:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _VOL_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_VOL_MAGIC!r}")
        version, dim = struct.unpack("<II", f.read(8))
        if version != 1:
            raise ValueError(f"{path}: unsupported TCTV version {version}")
        (spacing,) = struct.unpack("<d", f.read(8))
        origin = struct.unpack("<ddd", f.read(24))
        data = (
            np.frombuffer(f.read(4 * dim**3), "<f4")
            .astype(np.float64)
            .reshape(dim, dim, dim)
        )
    expected = 2.0 / dim
    if abs(spacing - expected) > 1e-12:
        raise ValueError(f"{path}: spacing {spacing} inconsistent with dim {dim}")
    del origin  # derivable from dim; stored for external consumers
    return Volume(dim=dim, data=data)
