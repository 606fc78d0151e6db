"""Compare the numba and numpy kernel backends on the two hot loops.

Usage: python benchmarks/bench_backends.py [--nphi N] [--ntheta N] [--nr N]
       [--dim N] [--repeat K]

The numba backend is compiled once (warm-up call excluded from timing), so
the numbers reflect steady-state throughput.
"""

import argparse
import time

import numpy as np

from tctrecon.geometry import make_radial_grid, make_transducer_grid
from tctrecon.kernels import numba_backend, numpy_backend
from tctrecon.recon import ReconConfig, backproject
from tctrecon.sinogram import Sinogram, full_mask


def time_call(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nphi", type=int, default=100)
    ap.add_argument("--ntheta", type=int, default=50)
    ap.add_argument("--nr", type=int, default=100)
    ap.add_argument("--dim", type=int, default=48)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    grid = make_transducer_grid(args.nphi, args.ntheta)
    radial = make_radial_grid(args.nr, 2.0)
    rng = np.random.default_rng(0)
    s = Sinogram(
        grid=grid,
        radial=radial,
        data=rng.normal(size=(args.nphi, args.ntheta, args.nr)),
        mask=full_mask(grid),
    )

    center = np.array([0.1, -0.05, 0.2])
    axes = np.array([0.4, 0.3, 0.5])
    p = np.array([0.0, 0.0, 1.0])
    radii = np.linspace(0.05, 2.0, args.nr)
    phis = np.linspace(0, 2 * np.pi, args.nphi, endpoint=False)

    # warm up jit compilation before timing
    numba_backend.f_grid(center, axes, p, radii[:4], phis[:4])
    backproject(s, ReconConfig(dim=8, backend="numba"), weighted=True)

    results = []
    for name, backend in (("numba", "numba"), ("numpy", "numpy")):
        mod = numba_backend if name == "numba" else numpy_backend
        t_fg = time_call(lambda: mod.f_grid(center, axes, p, radii, phis), args.repeat)
        t_bp = time_call(
            lambda: backproject(
                s, ReconConfig(dim=args.dim, backend=backend), weighted=True
            ),
            args.repeat,
        )
        results.append((name, t_fg, t_bp))

    print(f"grid {args.nphi}x{args.ntheta}x{args.nr}, volume dim {args.dim}")
    print(f"{'backend':<8} {'f_grid [s]':>12} {'backproject [s]':>16}")
    for name, t_fg, t_bp in results:
        print(f"{name:<8} {t_fg:>12.4f} {t_bp:>16.4f}")
    base = results[0]
    for name, t_fg, t_bp in results[1:]:
        print(
            f"{name} / {base[0]}: f_grid x{t_fg / base[1]:.1f}, "
            f"backproject x{t_bp / base[2]:.1f}"
        )


if __name__ == "__main__":
    main()
