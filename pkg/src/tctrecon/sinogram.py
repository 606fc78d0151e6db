"""Projection-data container, radial filtering, interpolation, and masking."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import RadialGrid, TransducerGrid

__all__ = [
    "ScanMask",
    "Sinogram",
    "second_radial_derivative",
    "sample_radial",
    "make_mask",
    "apply_mask",
]

REGIONS = ("full", "east", "west", "south", "north")


@dataclass(frozen=True)
class ScanMask:
    """Per-transducer availability, shape (n_phi, n_theta)."""

    active: np.ndarray

    def __post_init__(self):
        if not bool(np.any(self.active)):
            raise ValueError("scan mask has no active transducers")

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.active))


@dataclass(frozen=True)
class Sinogram:
    """Rf(p, r) samples on (phi_T, theta_T, r) with an availability mask."""

    grid: TransducerGrid
    radial: RadialGrid
    data: np.ndarray  # (n_phi, n_theta, n_r)
    mask: ScanMask

    def __post_init__(self):
        expected = (self.grid.n_phi, self.grid.n_theta, self.radial.n_r)
        if self.data.shape != expected:
            raise ValueError(f"sinogram data shape {self.data.shape} != {expected}")
        if self.mask.active.shape != expected[:2]:
            raise ValueError(
                f"mask shape {self.mask.active.shape} != {expected[:2]}"
            )


def full_mask(grid: TransducerGrid) -> ScanMask:
    return ScanMask(active=np.ones((grid.n_phi, grid.n_theta), dtype=bool))


def second_radial_derivative(s: Sinogram) -> Sinogram:
    """Centered second difference in r, zero-padded at both radial ends.

    Zero padding is exact for contained phantoms: Rf vanishes at r = 0 and
    beyond the support, which lies inside r_max.
    """
    if s.radial.n_r < 3:
        raise ValueError(f"second_radial_derivative needs n_r >= 3, got {s.radial.n_r}")
    dr = s.radial.spacing
    padded = np.pad(s.data, ((0, 0), (0, 0), (1, 1)))
    out = (padded[:, :, :-2] - 2.0 * padded[:, :, 1:-1] + padded[:, :, 2:]) / dr**2
    return replace(s, data=out)


def sample_radial(s: Sinogram, i: int, j: int, r: float) -> float:
    """Linear interpolation of row (i, j) at radius r; 0 outside [0, r_max]."""
    if r < 0.0 or r > s.radial.r_max:
        return 0.0
    dr = s.radial.spacing
    pos = r / dr
    k0 = min(int(pos), s.radial.n_r - 1)
    k1 = min(k0 + 1, s.radial.n_r - 1)
    frac = pos - k0
    row = s.data[i, j]
    return float(row[k0] * (1.0 - frac) + row[k1] * frac)


def make_mask(grid: TransducerGrid, region: str) -> ScanMask:
    """Named hemisphere masks.

    Conventions: east = azimuths with
    cos(phi) > 0 (positive-x half), west its complement; south = polar
    angles theta > pi/2 (negative-z half), north its complement.
    """
    if region not in REGIONS:
        raise ValueError(f"unknown mask region {region!r}; expected one of {REGIONS}")
    phi_ok = np.ones(grid.n_phi, dtype=bool)
    theta_ok = np.ones(grid.n_theta, dtype=bool)
    if region == "east":
        phi_ok = np.cos(grid.phi_values) > 0.0
    elif region == "west":
        phi_ok = ~(np.cos(grid.phi_values) > 0.0)
    elif region == "south":
        theta_ok = grid.theta_rule.nodes > np.pi / 2.0
    elif region == "north":
        theta_ok = ~(grid.theta_rule.nodes > np.pi / 2.0)
    return ScanMask(active=phi_ok[:, None] & theta_ok[None, :])


def apply_mask(s: Sinogram, m: ScanMask) -> Sinogram:
    """Zero-fill rows at inactive transducers and store the mask."""
    if m.active.shape != (s.grid.n_phi, s.grid.n_theta):
        raise ValueError(
            f"mask shape {m.active.shape} does not match sinogram "
            f"{(s.grid.n_phi, s.grid.n_theta)}"
        )
    data = np.where(m.active[:, :, None], s.data, 0.0)
    return replace(s, data=data, mask=m)
