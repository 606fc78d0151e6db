"""Quadrature rules and the discrete transducer aperture on the unit sphere.

The transducer sphere is sampled with uniform azimuths (periodic trapezoid
weights) and Gauss-Legendre polar nodes on [0, pi].  The sin(theta) surface
Jacobian is carried as an explicit factor in the combined surface weights,
not folded into the polar rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureRule",
    "TransducerGrid",
    "RadialGrid",
    "gauss_legendre",
    "make_transducer_grid",
    "trapezoid_periodic",
]


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of a quadrature rule on some interval."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def _legendre_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.

    Chebyshev angles seed the iteration; each node converges to ~1e-15 in a
    handful of steps.  Weights are 2 / ((1 - x^2) P_n'(x)^2).
    """
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        # Legendre recurrence: evaluates P_n and P_{n-1} at all nodes.
        p0 = np.ones_like(x)
        p1 = x.copy()
        for m in range(2, n + 1):
            p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    # Recompute derivative at the converged nodes for the weights.
    p0 = np.ones_like(x)
    p1 = x.copy()
    for m in range(2, n + 1):
        p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


def gauss_legendre(n: int, a: float, b: float) -> QuadratureRule:
    """n-point Gauss-Legendre rule mapped affinely to [a, b].

    Exact for polynomials of degree <= 2n - 1.
    """
    if n < 1:
        raise ValueError(f"gauss_legendre needs n >= 1, got {n}")
    if not a < b:
        raise ValueError(f"gauss_legendre needs a < b, got a={a}, b={b}")
    if n == 1:
        x = np.array([0.0])
        w = np.array([2.0])
    else:
        x, w = _legendre_nodes(n)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    return QuadratureRule(nodes=mid + half * x, weights=half * w)


def trapezoid_periodic(samples, period: float) -> float:
    """Periodic trapezoid rule: (period / len) * sum(samples).

    Assumes the samples are uniform over one full period (no duplicated
    endpoint); spectrally accurate on trigonometric polynomials.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 1:
        raise ValueError("trapezoid_periodic needs at least one sample")
    return float(period * np.mean(samples))


@dataclass(frozen=True)
class TransducerGrid:
    """Discrete transducer locations p on the unit sphere.

    positions[i, j] = (sin(theta_j) cos(phi_i), sin(theta_j) sin(phi_i),
    cos(theta_j)) with uniform azimuths phi_i = 2*pi*i/n_phi and
    Gauss-Legendre polar nodes theta_j on [0, pi].
    """

    n_phi: int
    n_theta: int
    phi_values: np.ndarray
    theta_rule: QuadratureRule
    positions: np.ndarray  # (n_phi, n_theta, 3)

    @property
    def surface_weights(self) -> np.ndarray:
        """(n_phi, n_theta) weights with sum ~ 4*pi (quadrature of dp)."""
        w_theta = self.theta_rule.weights * np.sin(self.theta_rule.nodes)
        return np.broadcast_to(
            (2.0 * np.pi / self.n_phi) * w_theta, (self.n_phi, self.n_theta)
        ).copy()


def make_transducer_grid(n_phi: int, n_theta: int) -> TransducerGrid:
    if n_phi < 4:
        raise ValueError(f"make_transducer_grid needs n_phi >= 4, got {n_phi}")
    if n_theta < 2:
        raise ValueError(f"make_transducer_grid needs n_theta >= 2, got {n_theta}")
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    rule = gauss_legendre(n_theta, 0.0, np.pi)
    theta = rule.nodes
    sin_t = np.sin(theta)
    positions = np.empty((n_phi, n_theta, 3))
    positions[:, :, 0] = np.cos(phi)[:, None] * sin_t[None, :]
    positions[:, :, 1] = np.sin(phi)[:, None] * sin_t[None, :]
    positions[:, :, 2] = np.broadcast_to(np.cos(theta), (n_phi, n_theta))
    return TransducerGrid(
        n_phi=n_phi,
        n_theta=n_theta,
        phi_values=phi,
        theta_rule=rule,
        positions=positions,
    )


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radii r_i = i * r_max / (n_r - 1), i = 0 .. n_r - 1."""

    n_r: int
    r_max: float
    radii: np.ndarray

    @property
    def spacing(self) -> float:
        return self.r_max / (self.n_r - 1)


def make_radial_grid(n_r: int, r_max: float = 2.0) -> RadialGrid:
    if n_r < 2:
        raise ValueError(f"make_radial_grid needs n_r >= 2, got {n_r}")
    if r_max <= 0:
        raise ValueError(f"make_radial_grid needs r_max > 0, got {r_max}")
    radii = np.arange(n_r) * (r_max / (n_r - 1))
    return RadialGrid(n_r=n_r, r_max=r_max, radii=radii)
