"""Ellipsoid-sum phantoms, voxel volumes, and the analytic ball projector.

Phantoms are sums of indicator functions of axis-aligned ellipsoids, each
strictly contained in the open unit ball.  Overlapping ellipsoids add their
amplitudes.  The analytic ball projector serves as the exact oracle for the
quartic-based forward model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Ellipsoid",
    "Phantom",
    "Volume",
    "defrise_phantom",
    "evaluate",
    "voxelize",
    "ball_projection_analytic",
    "load_phantom_json",
    "save_phantom_json",
]


def _max_surface_norm(center, semiaxes) -> float:
    """Largest |x| over the surface of an axis-aligned ellipsoid.

    The farthest point from the origin satisfies x_d = c_d e_d^2/(mu - e_d^2)
    + c_d with mu the largest root of sum_d (c_d e_d / (mu - e_d^2))^2 = 1;
    when the center component on the longest axis vanishes the critical
    point instead sits at mu = max e_d^2 with the free component fixed by
    the surface constraint.
    """
    c = np.asarray(center, dtype=float)
    axes = np.asarray(semiaxes, dtype=float)
    e2 = axes * axes
    ce2 = (c * axes) ** 2

    def g(mu: float) -> float:
        return float(np.sum(ce2 / (mu - e2) ** 2))

    top = float(np.max(e2))
    lo = top + 1e-14
    hi = top + float(np.sqrt(np.sum(ce2))) + 1.0
    while g(hi) >= 1.0:
        hi = top + 2.0 * (hi - top)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if g(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    best = float(np.linalg.norm(c + c * e2 / (mu - e2)))
    d = int(np.argmax(e2))
    denom = e2[d] - e2
    s = np.where(denom != 0.0, c * e2 / np.where(denom == 0.0, 1.0, denom), 0.0)
    resid = 1.0 - float(np.sum((s / axes) ** 2))
    if resid >= 0.0:
        s[d] = axes[d] * np.sqrt(resid)
        best = max(best, float(np.linalg.norm(c + s)))
    return best


@dataclass(frozen=True)
class Ellipsoid:
    """Axis-aligned ellipsoid indicator with an amplitude."""

    center: tuple[float, float, float]
    semiaxes: tuple[float, float, float]
    amplitude: float = 1.0

    def __post_init__(self):
        if min(self.semiaxes) <= 0:
            raise ValueError(f"semiaxes must be positive, got {self.semiaxes}")

    def contained_in_unit_ball(self) -> bool:
        # |center| + max(semiaxes) < 1 is sufficient, but too conservative
        # for the wide thin disks of the Defrise phantom; fall back to the
        # exact farthest surface point when the cheap bound is inconclusive.
        if float(np.linalg.norm(self.center)) + max(self.semiaxes) < 1.0:
            return True
        return _max_surface_norm(self.center, self.semiaxes) < 1.0


@dataclass(frozen=True)
class Phantom:
    """Ordered sum of ellipsoid indicators; the unknown image f."""

    ellipsoids: tuple[Ellipsoid, ...] = ()

    def __post_init__(self):
        for e in self.ellipsoids:
            if not e.contained_in_unit_ball():
                raise ValueError(
                    f"ellipsoid not contained in the open unit ball: "
                    f"center={e.center}, semiaxes={e.semiaxes}"
                )


@dataclass
class Volume:
    """Scalar field on a uniform voxel grid over [-1, 1]^3.

    Voxel (i, j, k) is centered at (-1 + (i + 0.5) * spacing, ...); data is
    indexed [i, j, k] (x, y, z).
    """

    dim: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.dim,) * 3:
            raise ValueError(
                f"volume data shape {self.data.shape} != {(self.dim,) * 3}"
            )

    @property
    def spacing(self) -> float:
        return 2.0 / self.dim

    @property
    def origin(self) -> tuple[float, float, float]:
        h = self.spacing
        return (-1.0 + 0.5 * h,) * 3

    def axis_coords(self) -> np.ndarray:
        """Voxel-center coordinates along one axis."""
        h = self.spacing
        return -1.0 + (np.arange(self.dim) + 0.5) * h

    def coord_grids(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = self.axis_coords()
        return np.meshgrid(c, c, c, indexing="ij")


_DEFRISE_TABLE = [
    ((0.0, 0.0, -0.64), (0.65, 0.65, 0.08)),
    ((0.0, 0.0, -0.32), (0.85, 0.85, 0.08)),
    ((0.0, 0.0, 0.0), (0.90, 0.90, 0.08)),
    ((0.0, 0.0, 0.32), (0.85, 0.85, 0.08)),
    ((0.0, 0.0, 0.64), (0.65, 0.65, 0.08)),
]


def defrise_phantom() -> Phantom:
    """Five thin coaxial ellipsoids stacked along z, amplitude 1 each."""
    return Phantom(
        tuple(Ellipsoid(center=c, semiaxes=s) for c, s in _DEFRISE_TABLE)
    )


def evaluate(phantom: Phantom, x) -> float:
    """Sum of amplitudes of the ellipsoids containing point x."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for e in phantom.ellipsoids:
        d = (x - np.asarray(e.center)) / np.asarray(e.semiaxes)
        if float(np.dot(d, d)) <= 1.0:
            total += e.amplitude
    return total


def evaluate_points(phantom: Phantom, pts: np.ndarray) -> np.ndarray:
    """Vectorized evaluate over pts of shape (..., 3)."""
    pts = np.asarray(pts, dtype=float)
    out = np.zeros(pts.shape[:-1])
    for e in phantom.ellipsoids:
        d = (pts - np.asarray(e.center)) / np.asarray(e.semiaxes)
        out += e.amplitude * (np.sum(d * d, axis=-1) <= 1.0)
    return out


def voxelize(phantom: Phantom, dim: int) -> Volume:
    """Evaluate the phantom at every voxel center of a dim^3 grid."""
    if dim < 2:
        raise ValueError(f"voxelize needs dim >= 2, got {dim}")
    c = -1.0 + (np.arange(dim) + 0.5) * (2.0 / dim)
    data = np.zeros((dim, dim, dim))
    for e in phantom.ellipsoids:
        dx = (c - e.center[0]) / e.semiaxes[0]
        dy = (c - e.center[1]) / e.semiaxes[1]
        dz = (c - e.center[2]) / e.semiaxes[2]
        q = (
            dx[:, None, None] ** 2
            + dy[None, :, None] ** 2
            + dz[None, None, :] ** 2
        )
        data += e.amplitude * (q <= 1.0)
    return Volume(dim=dim, data=data)


def ball_projection_analytic(center, radius: float, p, r: float) -> float:
    """Area of the sphere |x - p| = r lying inside the ball (center, radius).

    Closed-form spherical-cap area: zero outside (d - radius, d + radius),
    (pi * r / d) * (radius^2 - (d - r)^2) inside, where d = |p - center|.
    Requires the sphere center p strictly outside the ball.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    d = float(np.linalg.norm(np.asarray(p, dtype=float) - np.asarray(center, dtype=float)))
    if d <= radius:
        raise ValueError(
            f"sphere center must lie outside the ball: |p - center| = {d} <= {radius}"
        )
    if r <= d - radius or r >= d + radius:
        return 0.0
    return np.pi * r / d * (radius * radius - (d - r) ** 2)


def load_phantom_json(path) -> Phantom:
    """Read a phantom from a JSON array of {center, semiaxes, amplitude}."""
    with open(path) as f:
        raw = json.load(f)
    if not isinstance(raw, list):
        raise ValueError(f"{path}: expected a JSON array of ellipsoids")
    ells = []
    for i, item in enumerate(raw):
        try:
            ells.append(
                Ellipsoid(
                    center=tuple(float(v) for v in item["center"]),
                    semiaxes=tuple(float(v) for v in item["semiaxes"]),
                    amplitude=float(item.get("amplitude", 1.0)),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{path}: bad ellipsoid entry #{i}: {exc}") from exc
    return Phantom(tuple(ells))


def save_phantom_json(phantom: Phantom, path) -> None:
    raw = [
        {
            "center": list(e.center),
            "semiaxes": list(e.semiaxes),
            "amplitude": e.amplitude,
        }
        for e in phantom.ellipsoids
    ]
    with open(path, "w") as f:
        json.dump(raw, f, indent=2)
        f.write("\n")
