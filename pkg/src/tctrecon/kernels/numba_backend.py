"""Numba-jitted kernels mirroring the numpy backend.

Same meridian machinery as kernels.numpy_backend, but with a scalar
closed-form quartic solver (depressed quartic -> resolvent cubic -> two
quadratics, Newton polished) instead of companion eigenvalues, which are
not available inside nopython code.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

NAME = "numba"

RESIDUAL_TOL = 1e-7
ROOT_CLAMP = 1e-9
MIN_WIDTH = 1e-12
MERGE_TOL = 3e-8  # double roots split by root-finding noise are merged
DEGREE_TOL = 1e-12


@njit(cache=True)
def _largest_real_cubic_root(a, b, c):
    """Largest real root of z^3 + a z^2 + b z + c."""
    p = b - a * a / 3.0
    q = c + a * (2.0 * a * a - 9.0 * b) / 27.0
    off = -a / 3.0
    half_q = 0.5 * q
    disc = half_q * half_q + (p / 3.0) ** 3
    if disc > 0.0:
        s = math.sqrt(disc)
        u = -half_q + s
        v = -half_q - s
        t = math.copysign(abs(u) ** (1.0 / 3.0), u) + math.copysign(
            abs(v) ** (1.0 / 3.0), v
        )
        return t + off
    if p >= 0.0:
        # p ~ 0 and disc <= 0 forces q ~ 0: triple root.
        return off
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    if arg > 1.0:
        arg = 1.0
    elif arg < -1.0:
        arg = -1.0
    theta = math.acos(arg) / 3.0
    return m * math.cos(theta) + off


@njit(cache=True)
def _quadratic_roots(b, c, out, n):
    """Append real roots of y^2 + b y + c to out; returns new count."""
    disc = b * b - 4.0 * c
    # A double root computes as a slightly negative discriminant; clamp it
    # (the Newton polish and the residual filter downstream sort out any
    # genuinely complex pair this lets through).
    if disc < -1e-12 * (b * b + 4.0 * abs(c)):
        return n
    if disc < 0.0:
        disc = 0.0
    s = math.sqrt(disc)
    if b >= 0.0:
        r1 = (-b - s) / 2.0
    else:
        r1 = (-b + s) / 2.0
    out[n] = r1
    n += 1
    if r1 != 0.0:
        out[n] = c / r1
    else:
        out[n] = -b - r1
    n += 1
    return n


@njit(cache=True)
def _real_roots(c4, c3, c2, c1, c0, out):
    """Real roots of c4 t^4 + ... + c0, Newton polished; returns the count."""
    rowmax = max(abs(c4), abs(c3), abs(c2), abs(c1), abs(c0))
    if rowmax < 1e-300:
        return 0
    n4 = c4 / rowmax
    n3 = c3 / rowmax
    n2 = c2 / rowmax
    n1 = c1 / rowmax
    n0 = c0 / rowmax
    n = 0
    if abs(n4) > DEGREE_TOL:
        b = n3 / n4
        c = n2 / n4
        d = n1 / n4
        e = n0 / n4
        # Depressed quartic y^4 + p y^2 + q y + r, t = y - b/4.
        p = c - 3.0 * b * b / 8.0
        q = d - 0.5 * b * c + b * b * b / 8.0
        r = e - 0.25 * b * d + b * b * c / 16.0 - 3.0 * b ** 4 / 256.0
        shift = -b / 4.0
        if abs(q) < 1e-14 * (1.0 + abs(p) + abs(r)):
            # Biquadratic in y^2.
            disc = p * p - 4.0 * r
            if disc < 0.0 and disc >= -1e-12 * (p * p + 4.0 * abs(r)):
                disc = 0.0
            if disc >= 0.0:
                s = math.sqrt(disc)
                for y2 in ((-p + s) / 2.0, (-p - s) / 2.0):
                    if y2 >= -1e-12 * (1.0 + abs(p)):
                        y = math.sqrt(max(y2, 0.0))
                        out[n] = y + shift
                        n += 1
                        out[n] = -y + shift
                        n += 1
        else:
            # Resolvent cubic z^3 + 2p z^2 + (p^2 - 4r) z - q^2; its largest
            # root is nonnegative and yields the quadratic split.
            z = _largest_real_cubic_root(2.0 * p, p * p - 4.0 * r, -q * q)
            if z < 0.0:
                z = 0.0
            alpha = math.sqrt(z)
            if alpha < 1e-150:
                alpha = 1e-150
            beta = 0.5 * (p + z - q / alpha)
            gamma = 0.5 * (p + z + q / alpha)
            n = _quadratic_roots(alpha, beta, out, n)
            n = _quadratic_roots(-alpha, gamma, out, n)
            for i in range(n):
                out[i] += shift
    elif abs(n3) > DEGREE_TOL:
        b = n2 / n3
        c = n1 / n3
        d = n0 / n3
        z = _largest_real_cubic_root(b, c, d)
        out[n] = z
        n += 1
        # Deflate and pick up the remaining quadratic factor's real roots.
        n = _quadratic_roots(b + z, c + z * (b + z), out, n)
    elif abs(n2) > DEGREE_TOL:
        n = _quadratic_roots(n1 / n2, n0 / n2, out, n)
    elif abs(n1) > DEGREE_TOL:
        out[n] = -n0 / n1
        n += 1
    # Newton polish on the normalized quartic row.
    for i in range(n):
        t = out[i]
        for _ in range(2):
            f = (((n4 * t + n3) * t + n2) * t + n1) * t + n0
            df = ((4.0 * n4 * t + 3.0 * n3) * t + 2.0 * n2) * t + n1
            if abs(df) > 1e-30:
                t -= f / df
        out[i] = t
    return n


@njit(cache=True)
def _meridian_point(qx, qy, qz, iex2, iey2, iez2, r, phi, roots, bounds):
    """F value and arc count for one (r, phi); roots/bounds are scratch."""
    cphi = math.cos(phi)
    sphi = math.sin(phi)
    k0 = qx * qx * iex2 + qy * qy * iey2 + qz * qz * iez2 - 1.0
    b = 2.0 * r * (qx * cphi * iex2 + qy * sphi * iey2)
    k2 = r * r * (cphi * cphi * iex2 + sphi * sphi * iey2)
    a0 = k0 + k2
    a1 = 2.0 * r * qz * iez2
    a2 = r * r * iez2 - k2
    c4 = a2 * a2
    c3 = 2.0 * a2 * a1
    c2 = a1 * a1 + 2.0 * a2 * a0 + b * b
    c1 = 2.0 * a1 * a0
    c0 = a0 * a0 - b * b
    nroots = _real_roots(c4, c3, c2, c1, c0, roots)

    scale = max(1.0, abs(a0), abs(a1), abs(a2), abs(b))
    tol = RESIDUAL_TOL * scale
    # Boundary list: -1, surviving roots, 1.
    nb = 0
    bounds[nb] = -1.0
    nb += 1
    for i in range(nroots):
        t = roots[i]
        if abs(t) > 1.0 + ROOT_CLAMP:
            continue
        if t > 1.0:
            t = 1.0
        elif t < -1.0:
            t = -1.0
        g = a0 + a1 * t + a2 * t * t + b * math.sqrt(max(0.0, 1.0 - t * t))
        if abs(g) <= tol:
            bounds[nb] = t
            nb += 1
    bounds[nb] = 1.0
    nb += 1
    # Insertion sort; nb <= 6.
    for i in range(1, nb):
        key = bounds[i]
        j = i - 1
        while j >= 0 and bounds[j] > key:
            bounds[j + 1] = bounds[j]
            j -= 1
        bounds[j + 1] = key
    # Merge numerically split double roots: the pair straddles the true
    # crossing, so its midpoint is the better estimate.
    m = 1
    for i in range(1, nb - 1):
        if m > 1 and bounds[i] - bounds[m - 1] < MERGE_TOL:
            bounds[m - 1] = 0.5 * (bounds[m - 1] + bounds[i])
        else:
            bounds[m] = bounds[i]
            m += 1
    bounds[m] = bounds[nb - 1]
    nb = m + 1

    f = 0.0
    count = 0
    for i in range(nb - 1):
        lo = bounds[i]
        hi = bounds[i + 1]
        w = hi - lo
        if w < MIN_WIDTH:
            continue
        mid = 0.5 * (lo + hi)
        g = a0 + a1 * mid + a2 * mid * mid + b * math.sqrt(max(0.0, 1.0 - mid * mid))
        if g <= 0.0:
            f += w
            count += 1
    return f, count


@njit(cache=True)
def f_grid(center, axes, p, radii, phis):
    qx = p[0] - center[0]
    qy = p[1] - center[1]
    qz = p[2] - center[2]
    iex2 = 1.0 / (axes[0] * axes[0])
    iey2 = 1.0 / (axes[1] * axes[1])
    iez2 = 1.0 / (axes[2] * axes[2])
    nr = radii.shape[0]
    nphi = phis.shape[0]
    f = np.zeros((nr, nphi))
    counts = np.zeros((nr, nphi), dtype=np.int64)
    roots = np.empty(6)
    bounds = np.empty(6)
    for a in range(nr):
        for b in range(nphi):
            val, cnt = _meridian_point(
                qx, qy, qz, iex2, iey2, iez2, radii[a], phis[b], roots, bounds
            )
            f[a, b] = val
            counts[a, b] = cnt
    return f, counts


@njit(cache=True, parallel=True)
def backproject_points(data, weights, positions, r_max, pts, weighted):
    n_phi, n_theta, n_r = data.shape
    dr = r_max / (n_r - 1)
    m = pts.shape[0]
    out = np.zeros(m)
    for v in prange(m):
        x0 = pts[v, 0]
        x1 = pts[v, 1]
        x2 = pts[v, 2]
        acc = 0.0
        for i in range(n_phi):
            for j in range(n_theta):
                d0 = x0 - positions[i, j, 0]
                d1 = x1 - positions[i, j, 1]
                d2 = x2 - positions[i, j, 2]
                d = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                if d > r_max:
                    continue
                s = d / dr
                k0 = int(s)
                if k0 > n_r - 1:
                    k0 = n_r - 1
                k1 = k0 + 1
                if k1 > n_r - 1:
                    k1 = n_r - 1
                frac = s - k0
                val = data[i, j, k0] * (1.0 - frac) + data[i, j, k1] * frac
                if weighted:
                    val /= d
                acc += weights[i, j] * val
        out[v] = acc
    return out
