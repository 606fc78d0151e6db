"""Quantitative evaluation: profiles, region errors, visibility, sharpness.

All analyses are read-only on Volume / mask inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegionError
from .geometry import TransducerGrid
from .phantom import Volume
from .sinogram import ScanMask

__all__ = [
    "LineProfile",
    "extract_profile",
    "region_rms_error",
    "wavefront_visible",
    "edge_sharpness",
    "axis_noise_ratio",
    "sample_trilinear",
]

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class LineProfile:
    """Volume values along a voxel-center line parallel to one axis."""

    axis: str
    fixed: tuple[float, float]  # coordinates of the two remaining axes, in order
    values: np.ndarray


def _nearest_index(v: Volume, coord: float) -> int:
    if not -1.0 <= coord <= 1.0:
        raise ValueError(f"coordinate {coord} outside [-1, 1]")
    return int(np.argmin(np.abs(v.axis_coords() - coord)))


def extract_profile(v: Volume, axis: str, fixed: tuple[float, float]) -> LineProfile:
    """Nearest-voxel line of the volume along `axis` at the fixed coords.

    `fixed` holds the coordinates of the two remaining axes in x, y, z order
    (e.g. axis='z' -> fixed=(x, y)).
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    a = _AXES[axis]
    others = [d for d in range(3) if d != a]
    idx: list = [slice(None)] * 3
    for d, coord in zip(others, fixed):
        idx[d] = _nearest_index(v, coord)
    return LineProfile(axis=axis, fixed=tuple(fixed), values=v.data[tuple(idx)].copy())


def region_rms_error(v: Volume, ref: Volume, predicate) -> float:
    """RMS of (v - ref) over voxels whose centers satisfy predicate(X, Y, Z)."""
    if v.dim != ref.dim:
        raise ValueError(f"volume dims differ: {v.dim} vs {ref.dim}")
    mask = np.asarray(predicate(*v.coord_grids()), dtype=bool)
    if not mask.any():
        raise EmptyRegionError("region predicate selected no voxels")
    diff = v.data[mask] - ref.data[mask]
    return float(np.sqrt(np.mean(diff * diff)))


def wavefront_visible(x, n, m: ScanMask, grid: TransducerGrid) -> bool:
    """Whether the edge (x, n) is tangentially touched from the active aperture.

    The line x + t n meets the unit sphere at two points (x interior); each
    is snapped to its nearest transducer cell (azimuth by rounding, polar by
    midpoint bins) and the edge is visible iff either cell is active.
    """
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    if np.linalg.norm(x) >= 1.0:
        raise ValueError(f"point must be interior to the unit ball, got |x|={np.linalg.norm(x)}")
    if abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise ValueError("normal must be a unit vector")
    b = float(np.dot(x, n))
    c = float(np.dot(x, x)) - 1.0
    disc = b * b - c
    s = np.sqrt(disc)
    theta_nodes = grid.theta_rule.nodes
    edges = np.concatenate([[0.0], 0.5 * (theta_nodes[1:] + theta_nodes[:-1]), [np.pi]])
    for t in (-b + s, -b - s):
        p = x + t * n
        phi = float(np.arctan2(p[1], p[0])) % (2.0 * np.pi)
        i = int(np.round(phi / (2.0 * np.pi / grid.n_phi))) % grid.n_phi
        theta = float(np.arccos(np.clip(p[2], -1.0, 1.0)))
        j = int(np.searchsorted(edges, theta, side="right")) - 1
        j = min(max(j, 0), grid.n_theta - 1)
        if bool(m.active[i, j]):
            return True
    return False


def sample_trilinear(v: Volume, pts: np.ndarray) -> np.ndarray:
    """Trilinear interpolation at pts (..., 3); clamped at the boundary."""
    pts = np.asarray(pts, dtype=float)
    h = v.spacing
    # Fractional voxel index of the containing cell of centers.
    f = (pts + 1.0) / h - 0.5
    f = np.clip(f, 0.0, v.dim - 1.0)
    i0 = np.minimum(f.astype(np.int64), v.dim - 2)
    w = f - i0
    out = np.zeros(pts.shape[:-1])
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                wgt = (
                    (w[..., 0] if dx else 1.0 - w[..., 0])
                    * (w[..., 1] if dy else 1.0 - w[..., 1])
                    * (w[..., 2] if dz else 1.0 - w[..., 2])
                )
                out += wgt * v.data[i0[..., 0] + dx, i0[..., 1] + dy, i0[..., 2] + dz]
    return out


def edge_sharpness(v: Volume, samples, half_width: float) -> float:
    """Mean over samples of the max |slope| along the +-half_width normal
    segment, trilinearly sampled with step = voxel spacing."""
    if not samples:
        raise ValueError("edge_sharpness needs at least one (point, normal) sample")
    h = v.spacing
    slopes = []
    for point, normal in samples:
        point = np.asarray(point, dtype=float)
        normal = np.asarray(normal, dtype=float)
        ts = np.arange(-half_width, half_width + 0.5 * h, h)
        pts = point[None, :] + ts[:, None] * normal[None, :]
        vals = sample_trilinear(v, pts)
        slopes.append(float(np.max(np.abs(np.diff(vals)))) / h)
    return float(np.mean(slopes))


def edge_location(v: Volume, point, normal, half_width: float) -> float:
    """Signed offset along the normal of the steepest slope near `point`."""
    h = v.spacing
    point = np.asarray(point, dtype=float)
    normal = np.asarray(normal, dtype=float)
    ts = np.arange(-half_width, half_width + 0.5 * h, h)
    pts = point[None, :] + ts[:, None] * normal[None, :]
    vals = sample_trilinear(v, pts)
    k = int(np.argmax(np.abs(np.diff(vals))))
    return float(0.5 * (ts[k] + ts[k + 1]))


def _column_rms(v: Volume, ref: Volume, ix: int, iy: int, exclude: int) -> float:
    col_v = v.data[ix, iy, :]
    col_r = ref.data[ix, iy, :]
    jumps = np.nonzero(np.abs(np.diff(col_r)) > 1e-9)[0]
    keep = np.ones(col_r.size, dtype=bool)
    for k in jumps:
        lo = max(0, k - exclude + 1)
        hi = min(col_r.size, k + exclude + 1)
        keep[lo:hi] = False
    if not keep.any():
        raise EmptyRegionError("interface exclusion removed the whole column")
    d = col_v[keep] - col_r[keep]
    return float(np.sqrt(np.mean(d * d)))


def axis_noise_ratio(v: Volume, ref: Volume, off_axis: float = 0.25) -> float:
    """RMS error on the x = y = 0 voxel column over RMS error on the
    (off_axis, off_axis) column, excluding 3 voxels around ref interfaces.

    Returns 1.0 by convention when both columns match ref to < 1e-14.
    """
    if v.dim != ref.dim:
        raise ValueError(f"volume dims differ: {v.dim} vs {ref.dim}")
    i0 = _nearest_index(v, 0.0)
    i1 = _nearest_index(v, off_axis)
    on = _column_rms(v, ref, i0, i0, exclude=3)
    off = _column_rms(v, ref, i1, i1, exclude=3)
    if on < 1e-14 and off < 1e-14:
        return 1.0
    return on / off
