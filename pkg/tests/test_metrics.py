import numpy as np
import pytest

from tctrecon.errors import EmptyRegionError
from tctrecon.geometry import make_transducer_grid
from tctrecon.metrics import (
    axis_noise_ratio,
    edge_location,
    edge_sharpness,
    extract_profile,
    region_rms_error,
    sample_trilinear,
    wavefront_visible,
)
from tctrecon.phantom import Volume
from tctrecon.sinogram import make_mask


def volume_from(fn, dim=16):
    v = Volume(dim=dim, data=np.zeros((dim, dim, dim)))
    x, y, z = v.coord_grids()
    return Volume(dim=dim, data=np.asarray(fn(x, y, z), dtype=float))


def step_volume(x0=0.0, dim=32):
    # unit step down across the plane x = x0
    return volume_from(lambda x, y, z: (x < x0).astype(float), dim)


def test_extract_profile_constant():
    v = volume_from(lambda x, y, z: np.full_like(x, 3.25))
    prof = extract_profile(v, "z", (0.1, -0.2))
    assert prof.values == pytest.approx(3.25)
    assert prof.values.shape == (16,)


def test_extract_profile_picks_line():
    v = volume_from(lambda x, y, z: y)
    prof = extract_profile(v, "x", (0.5, 0.0))
    c = v.axis_coords()
    j = int(np.argmin(np.abs(c - 0.5)))
    assert prof.values == pytest.approx(c[j])


def test_extract_profile_validation():
    v = volume_from(lambda x, y, z: x)
    with pytest.raises(ValueError):
        extract_profile(v, "w", (0.0, 0.0))
    with pytest.raises(ValueError):
        extract_profile(v, "x", (1.5, 0.0))


def test_region_rms_error():
    a = volume_from(lambda x, y, z: x)
    b = volume_from(lambda x, y, z: x + 0.5)
    assert region_rms_error(a, a, lambda x, y, z: x > 0) == 0.0
    assert region_rms_error(a, b, lambda x, y, z: np.ones_like(x, bool)) == pytest.approx(0.5)
    with pytest.raises(EmptyRegionError):
        region_rms_error(a, b, lambda x, y, z: x > 2)
    with pytest.raises(ValueError):
        region_rms_error(a, volume_from(lambda x, y, z: x, dim=8), lambda x, y, z: x > 0)


def test_wavefront_visible():
    grid = make_transducer_grid(16, 8)
    full = make_mask(grid, "full")
    east = make_mask(grid, "east")
    south = make_mask(grid, "south")
    # both tangency candidates of this edge lie on the x axis
    assert wavefront_visible((0.5, 0.0, 0.0), (1.0, 0.0, 0.0), full, grid)
    assert wavefront_visible((0.5, 0.0, 0.0), (1.0, 0.0, 0.0), east, grid)
    assert wavefront_visible((-0.5, 0.0, 0.0), (1.0, 0.0, 0.0), east, grid)
    # vertical chord at x = -0.25: both candidates sit at azimuth pi (west)
    assert not wavefront_visible((-0.25, 0.0, 0.1), (0.0, 0.0, 1.0), east, grid)
    # near-vertical normals straddle the equator: one candidate in the south
    assert wavefront_visible((0.2, 0.0, 0.56), (0.0, 0.0, 1.0), south, grid)
    assert wavefront_visible((0.2, 0.0, -0.56), (0.0, 0.0, 1.0), south, grid)
    # lateral edge in the north: both candidates in the north
    assert not wavefront_visible((0.5, 0.0, 0.5), (1.0, 0.0, 0.0), south, grid)


def test_wavefront_visible_validation():
    grid = make_transducer_grid(16, 8)
    m = make_mask(grid, "full")
    with pytest.raises(ValueError):
        wavefront_visible((1.0, 0.0, 0.0), (1.0, 0.0, 0.0), m, grid)
    with pytest.raises(ValueError):
        wavefront_visible((0.5, 0.0, 0.0), (2.0, 0.0, 0.0), m, grid)


def test_sample_trilinear_exact_on_trilinear_fields():
    # trilinear interpolation reproduces a + bx + cy + dz + exy + ... exactly
    v = volume_from(lambda x, y, z: 1 + 2 * x - y + 0.5 * z + x * y - y * z + x * y * z)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.8, 0.8, size=(100, 3))
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    expect = 1 + 2 * x - y + 0.5 * z + x * y - y * z + x * y * z
    assert sample_trilinear(v, pts) == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_sample_trilinear_voxel_centers():
    rng = np.random.default_rng(1)
    v = Volume(dim=8, data=rng.normal(size=(8, 8, 8)))
    c = v.axis_coords()
    pts = np.array([[c[2], c[5], c[0]], [c[7], c[7], c[7]]])
    got = sample_trilinear(v, pts)
    assert got[0] == pytest.approx(v.data[2, 5, 0])
    assert got[1] == pytest.approx(v.data[7, 7, 7])


def test_sample_trilinear_clamps():
    v = volume_from(lambda x, y, z: x)
    c = v.axis_coords()
    assert sample_trilinear(v, np.array([[5.0, 0.0, 0.0]])) == pytest.approx(c[-1])


def test_edge_sharpness_step():
    v = step_volume()
    h = v.spacing
    # probe from a voxel center with a half-width that is a multiple of h so
    # every sample lands on a voxel center and the full unit jump shows up
    # between two adjacent samples
    x0 = v.axis_coords()[16]
    got = edge_sharpness(v, [((x0, 0.0, 0.0), (1.0, 0.0, 0.0))], 3 * h)
    assert got == pytest.approx(1.0 / h, rel=1e-6)
    # smooth volume: much flatter
    flat = volume_from(lambda x, y, z: x, 32)
    assert edge_sharpness(flat, [((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))], 3 * h) < 2.0


def test_edge_sharpness_validation():
    with pytest.raises(ValueError):
        edge_sharpness(step_volume(), [], 0.2)


def test_edge_location_recovers_offset():
    v = step_volume(x0=0.21)
    h = v.spacing
    got = edge_location(v, (0.25, 0.0, 0.0), (1.0, 0.0, 0.0), 0.2)
    assert abs((0.25 + got) - 0.21) <= h


def test_axis_noise_ratio():
    dim = 16
    ref = volume_from(lambda x, y, z: np.zeros_like(x), dim)
    noisy = ref.data.copy()
    i0 = int(np.argmin(np.abs(ref.axis_coords())))  # column nearest x = y = 0
    noisy[i0, i0, :] += 0.5  # noise concentrated on the symmetry axis
    rng = np.random.default_rng(2)
    noisy += rng.normal(scale=0.05, size=noisy.shape)
    v = Volume(dim=dim, data=noisy)
    assert axis_noise_ratio(v, ref) > 2.0
    # identical volumes hit the exact-match convention
    assert axis_noise_ratio(ref, ref) == 1.0
    with pytest.raises(ValueError):
        axis_noise_ratio(v, volume_from(lambda x, y, z: x, 8))


def test_axis_noise_ratio_excludes_interfaces():
    # a ref with a jump: errors within 3 voxels of it are ignored
    dim = 16
    ref = volume_from(lambda x, y, z: (z < 0).astype(float), dim)
    v = Volume(dim=dim, data=ref.data.copy())
    jump = dim // 2  # jump sits between indices dim/2 - 1 and dim/2
    v.data[:, :, jump - 2 : jump + 2] += 7.0  # inside the exclusion band
    assert axis_noise_ratio(v, ref) == 1.0
