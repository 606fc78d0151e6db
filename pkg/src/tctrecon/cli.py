"""Command-line driver: simulate | mask | reconstruct | profile | slice |
report | oracle.

All commands are deterministic: identical inputs and flags produce
identical output bytes.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import fileio, forward, metrics, recon
from .geometry import make_radial_grid, make_transducer_grid
from .phantom import Ellipsoid, Phantom, defrise_phantom, load_phantom_json
from .sinogram import REGIONS, apply_mask, make_mask

logger = logging.getLogger(__name__)

GRID_RANGE = (4, 4096)
DIM_RANGE = (8, 1024)


def _check_range(name: str, value: int, lo: int, hi: int) -> int:
    if not lo <= value <= hi:
        raise SystemExit(f"error: {name} must be in [{lo}, {hi}], got {value}")
    return value


def parse_phantom(spec: str) -> Phantom:
    """Built-in names, 'ball:...'/'ellipsoid:...' literals, or a JSON path."""
    if spec == "defrise":
        return defrise_phantom()
    if spec.startswith("ball:"):
        vals = [float(v) for v in spec[5:].split(",")]
        if len(vals) != 4:
            raise ValueError(f"ball spec needs cx,cy,cz,radius, got {spec!r}")
        cx, cy, cz, rho = vals
        return Phantom((Ellipsoid(center=(cx, cy, cz), semiaxes=(rho, rho, rho)),))
    if spec.startswith("ellipsoid:"):
        vals = [float(v) for v in spec[10:].split(",")]
        if len(vals) not in (6, 7):
            raise ValueError(
                f"ellipsoid spec needs cx,cy,cz,ex,ey,ez[,amplitude], got {spec!r}"
            )
        amp = vals[6] if len(vals) == 7 else 1.0
        return Phantom(
            (
                Ellipsoid(
                    center=tuple(vals[:3]),
                    semiaxes=tuple(vals[3:6]),
                    amplitude=amp,
                ),
            )
        )
    return load_phantom_json(spec)


def _vec3(text: str) -> np.ndarray:
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated reals, got {text!r}")
    return np.array(vals)


def cmd_simulate(args) -> None:
    n_phi = _check_range("--nphi", args.nphi, *GRID_RANGE)
    n_theta = _check_range("--ntheta", args.ntheta, *GRID_RANGE)
    n_r = _check_range("--nr", args.nr, *GRID_RANGE)
    ph = parse_phantom(args.phantom)
    grid = make_transducer_grid(n_phi, n_theta)
    radial = make_radial_grid(n_r, args.rmax)
    s = forward.simulate(ph, grid, radial)
    fileio.write_sinogram(s, args.out)
    logger.info("wrote %s", args.out)


def cmd_mask(args) -> None:
    s = fileio.read_sinogram(args.input)
    masked = apply_mask(s, make_mask(s.grid, args.region))
    fileio.write_sinogram(masked, args.out)
    logger.info("wrote %s", args.out)


def cmd_reconstruct(args) -> None:
    dim = _check_range("--dim", args.dim, *DIM_RANGE)
    s = fileio.read_sinogram(args.input)
    cfg = recon.ReconConfig(dim=dim, method=args.method, roi_radius=args.roi)
    vol = recon.reconstruct(s, cfg)
    fileio.write_volume(vol, args.out)
    logger.info("wrote %s", args.out)


def cmd_profile(args) -> None:
    vol = fileio.read_volume(args.input)
    prof = metrics.extract_profile(vol, args.axis, tuple(args.fixed))
    coords = vol.axis_coords()
    with open(args.out, "w") as f:
        f.write(f"{prof.axis},value\n")
        for c, v in zip(coords, prof.values):
            f.write(f"{c:.9g},{v:.9g}\n")
    logger.info("wrote %s", args.out)


def cmd_slice(args) -> None:
    vol = fileio.read_volume(args.input)
    axis = {"x": 0, "y": 1, "z": 2}[args.plane]
    coords = vol.axis_coords()
    if not -1.0 <= args.coord <= 1.0:
        raise SystemExit(f"error: --coord must be in [-1, 1], got {args.coord}")
    idx = int(np.argmin(np.abs(coords - args.coord)))
    img = np.take(vol.data, idx, axis=axis)
    lo = float(img.min())
    hi = float(img.max())
    span = hi - lo if hi > lo else 1.0
    pix = np.round((img - lo) / span * 255.0).astype(np.uint8)
    with open(args.out, "wb") as f:
        f.write(f"P5\n# window {lo:.9g} {hi:.9g}\n{pix.shape[1]} {pix.shape[0]}\n255\n".encode())
        f.write(pix.tobytes())
    logger.info("wrote %s", args.out)


def cmd_report(args) -> None:
    vol = fileio.read_volume(args.input)
    ref = fileio.read_volume(args.ref)
    diff = vol.data - ref.data
    payload = {
        "rms_error": float(np.sqrt(np.mean(diff * diff))),
        "max_abs_error": float(np.max(np.abs(diff))),
        "mean_error": float(np.mean(diff)),
        "axis_noise_ratio": metrics.axis_noise_ratio(vol, ref),
    }
    with open(args.out, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info("wrote %s", args.out)


def cmd_oracle(args) -> None:
    ph = parse_phantom(args.phantom)
    est, se = forward.monte_carlo_projection(
        ph, args.p, args.r, args.samples, seed=args.seed
    )
    exact = sum(
        e.amplitude * forward.project_ellipsoid(e, args.p, args.r)
        for e in ph.ellipsoids
    )
    print(
        json.dumps(
            {
                "monte_carlo": est,
                "std_error": se,
                "projector": exact,
                "samples": args.samples,
                "seed": args.seed,
            },
            sort_keys=True,
        )
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tctrecon",
        description="Spherical-aperture thermoacoustic tomography: simulate and reconstruct.",
    )
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="forward-project a phantom to a TCTS file")
    p.add_argument("--phantom", required=True, help="defrise | ball:cx,cy,cz,r | ellipsoid:cx,cy,cz,ex,ey,ez[,a] | phantom.json")
    p.add_argument("--nphi", type=int, default=400)
    p.add_argument("--ntheta", type=int, default=200)
    p.add_argument("--nr", type=int, default=200)
    p.add_argument("--rmax", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("mask", help="zero-fill a sinogram outside a named region")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--region", required=True, choices=REGIONS)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_mask)

    p = sub.add_parser("reconstruct", help="invert a TCTS sinogram to a TCTV volume")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", default="fbp", choices=recon.METHODS)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--roi", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("profile", help="axis-aligned line profile to CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--axis", required=True, choices=("x", "y", "z"))
    p.add_argument(
        "--fixed",
        type=lambda s: [float(v) for v in s.split(",")],
        required=True,
        help="coordinates of the two remaining axes, e.g. 0,0.4",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_profile)

    p = sub.add_parser("slice", help="8-bit PGM slice with min/max windowing")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--plane", required=True, choices=("x", "y", "z"))
    p.add_argument("--coord", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_slice)

    p = sub.add_parser("report", help="error metrics of a volume vs a reference, as JSON")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("oracle", help="Monte Carlo spot-check of the projector")
    p.add_argument("--phantom", required=True)
    p.add_argument("--p", type=_vec3, required=True, help="transducer, e.g. 0,0,1")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
