"""Pure-numpy kernels: meridian intersection grids and backprojection.

The quartic roots are obtained from batched companion-matrix eigenvalues
followed by Newton polishing.  This backend is the reference/fallback path;
the numba backend must agree with it to within root-polishing noise.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

# Tolerances shared with the numba backend.
RESIDUAL_TOL = 1e-7  # unsquared-equation residual filter, scaled
ROOT_CLAMP = 1e-9  # slack for clamping roots onto [-1, 1]
MIN_WIDTH = 1e-12  # tangency intervals narrower than this are dropped
MERGE_TOL = 3e-8  # double roots split by root-finding noise are merged
DEGREE_TOL = 1e-12  # relative threshold for leading-coefficient degree drop


def meridian_coeffs(center, axes, p, r, phi):
    """Quartic coefficients and unsquared-equation parameters.

    Substituting x = p + r (sin t' cos phi, sin t' sin phi, cos t') into the
    ellipsoid equation, with t = cos t', gives A(t) + B sqrt(1 - t^2) = 0
    where A(t) = a0 + a1 t + a2 t^2 and B is independent of t.  Returns
    (c4, c3, c2, c1, c0, a0, a1, a2, b) for the squared quartic
    A(t)^2 - B^2 (1 - t^2).  Broadcasts over r and phi.
    """
    q = np.asarray(p, dtype=float) - np.asarray(center, dtype=float)
    ex2, ey2, ez2 = (np.asarray(axes, dtype=float) ** 2).tolist()
    cphi = np.cos(phi)
    sphi = np.sin(phi)
    k0 = q[0] ** 2 / ex2 + q[1] ** 2 / ey2 + q[2] ** 2 / ez2 - 1.0
    b = 2.0 * r * (q[0] * cphi / ex2 + q[1] * sphi / ey2)
    k2 = r * r * (cphi * cphi / ex2 + sphi * sphi / ey2)
    a0 = k0 + k2
    a1 = 2.0 * r * q[2] / ez2 + np.zeros_like(k2)
    a2 = r * r / ez2 - k2
    c4 = a2 * a2
    c3 = 2.0 * a2 * a1
    c2 = a1 * a1 + 2.0 * a2 * a0 + b * b
    c1 = 2.0 * a1 * a0
    c0 = a0 * a0 - b * b
    return c4, c3, c2, c1, c0, a0, a1, a2, b


def _batched_real_roots(coeffs):
    """Real roots of rows of quartic coefficients (M, 5), highest first.

    Returns (roots (M, 4), valid (M, 4)); invalid slots hold +1.0 so that
    downstream boundary sorting collapses them at the top of [-1, 1].
    Rows are normalized and may drop degree when leading coefficients vanish.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    m = coeffs.shape[0]
    roots = np.full((m, 4), 1.0)
    valid = np.zeros((m, 4), dtype=bool)
    rowmax = np.max(np.abs(coeffs), axis=1)
    live = rowmax > 1e-300
    norm = np.where(live, rowmax, 1.0)[:, None]
    nc = coeffs / norm

    assigned = np.zeros(m, dtype=bool)
    for deg in (4, 3, 2, 1):
        lead = 5 - deg - 1
        sel = live & ~assigned & (np.abs(nc[:, lead]) > DEGREE_TOL)
        assigned |= sel
        idx = np.nonzero(sel)[0]
        if idx.size == 0:
            continue
        monic = nc[idx, lead + 1 :] / nc[idx, lead, None]
        if deg == 1:
            rr = -monic[:, 0][:, None].astype(complex)
        else:
            comp = np.zeros((idx.size, deg, deg))
            comp[:, 0, :] = -monic
            comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1.0
            rr = np.linalg.eigvals(comp)
        near_real = np.abs(rr.imag) <= 1e-6 * (1.0 + np.abs(rr.real))
        cand = rr.real
        # Newton polish on the full row polynomial (two steps).
        c = nc[idx]
        for _ in range(2):
            f = (((c[:, 0, None] * cand + c[:, 1, None]) * cand + c[:, 2, None]) * cand + c[:, 3, None]) * cand + c[:, 4, None]
            df = ((4.0 * c[:, 0, None] * cand + 3.0 * c[:, 1, None]) * cand + 2.0 * c[:, 2, None]) * cand + c[:, 3, None]
            step = np.where(np.abs(df) > 1e-30, f / np.where(df == 0, 1.0, df), 0.0)
            cand = cand - step
        in_range = near_real & (np.abs(cand) <= 1.0 + ROOT_CLAMP)
        cand = np.clip(cand, -1.0, 1.0)
        roots[idx, :deg] = np.where(in_range, cand, 1.0)
        valid[idx, :deg] = in_range
    return roots, valid


def f_grid(center, axes, p, radii, phis):
    """F(phi) meridian-arc sums and interval counts on a (radii x phis) grid.

    Returns (F, counts) of shape (len(radii), len(phis)).  F is the sum of
    cos-theta widths of the meridian arcs inside the ellipsoid; counts is
    the number of disjoint arcs.
    """
    radii = np.asarray(radii, dtype=float)
    phis = np.asarray(phis, dtype=float)
    r = radii[:, None]
    c4, c3, c2, c1, c0, a0, a1, a2, b = meridian_coeffs(center, axes, p, r, phis[None, :])
    shape = np.broadcast_shapes(c4.shape, c0.shape)
    coeffs = np.stack(
        [np.broadcast_to(x, shape).ravel() for x in (c4, c3, c2, c1, c0)], axis=1
    )
    roots, valid = _batched_real_roots(coeffs)

    a0f = np.broadcast_to(a0, shape).ravel()[:, None]
    a1f = np.broadcast_to(a1, shape).ravel()[:, None]
    a2f = np.broadcast_to(a2, shape).ravel()[:, None]
    bf = np.broadcast_to(b, shape).ravel()[:, None]
    scale = np.maximum(
        1.0,
        np.max(np.abs(np.concatenate([a0f, a1f, a2f, bf], axis=1)), axis=1),
    )[:, None]

    def g(t):
        return a0f + a1f * t + a2f * t * t + bf * np.sqrt(np.maximum(0.0, 1.0 - t * t))

    keep = valid & (np.abs(g(roots)) <= RESIDUAL_TOL * scale)
    bounds = np.concatenate(
        [
            np.full((roots.shape[0], 1), -1.0),
            np.where(keep, roots, 1.0),
            np.full((roots.shape[0], 1), 1.0),
        ],
        axis=1,
    )
    bounds.sort(axis=1)
    # Collapse numerically split double roots onto their midpoint; the
    # resulting zero-width sliver is then dropped by the MIN_WIDTH filter.
    inner = bounds[:, 1:-1]
    for k in range(inner.shape[1] - 1):
        close = inner[:, k + 1] - inner[:, k] < MERGE_TOL
        midv = 0.5 * (inner[:, k] + inner[:, k + 1])
        inner[:, k] = np.where(close, midv, inner[:, k])
        inner[:, k + 1] = np.where(close, midv, inner[:, k + 1])
    widths = np.diff(bounds, axis=1)
    mids = 0.5 * (bounds[:, 1:] + bounds[:, :-1])
    inside = (g(mids) <= 0.0) & (widths >= MIN_WIDTH)
    f = np.sum(widths * inside, axis=1)
    counts = np.sum(inside, axis=1)
    return f.reshape(shape), counts.reshape(shape).astype(np.int64)


def backproject_points(data, weights, positions, r_max, pts, weighted):
    """Accumulate weighted backprojection at points pts (M, 3).

    out[m] = sum_{i,j} weights[i,j] * W * interp(data[i,j,:], |pts[m]-p_ij|)
    with W = 1/|x-p| when weighted, linear interpolation on the uniform
    radial grid [0, r_max], and zero outside it.  The (i, j) sum runs in
    row-major order so results are deterministic.
    """
    n_phi, n_theta, n_r = data.shape
    dr = r_max / (n_r - 1)
    out = np.zeros(pts.shape[0])
    for i in range(n_phi):
        for j in range(n_theta):
            d = np.linalg.norm(pts - positions[i, j], axis=1)
            s = d / dr
            k0 = np.minimum(s.astype(np.int64), n_r - 1)
            k1 = np.minimum(k0 + 1, n_r - 1)
            frac = s - k0
            row = data[i, j]
            val = row[k0] * (1.0 - frac) + row[k1] * frac
            val[d > r_max] = 0.0
            if weighted:
                val = val / d
            out += weights[i, j] * val
    return out
