import numpy as np
import pytest

from tctrecon.geometry import make_radial_grid, make_transducer_grid
from tctrecon.sinogram import (
    ScanMask,
    Sinogram,
    apply_mask,
    full_mask,
    make_mask,
    sample_radial,
    second_radial_derivative,
)


def make_sino(data=None, n_phi=8, n_theta=4, n_r=10):
    grid = make_transducer_grid(n_phi, n_theta)
    radial = make_radial_grid(n_r, 2.0)
    if data is None:
        data = np.zeros((n_phi, n_theta, n_r))
    return Sinogram(grid=grid, radial=radial, data=data, mask=full_mask(grid))


def radial_poly(power, n_phi=8, n_theta=4, n_r=10):
    radial = make_radial_grid(n_r, 2.0)
    data = np.broadcast_to(radial.radii**power, (n_phi, n_theta, n_r)).copy()
    return make_sino(data, n_phi, n_theta, n_r)


def test_second_derivative_cubic():
    s = radial_poly(3)
    out = second_radial_derivative(s)
    r = s.radial.radii
    interior = slice(1, -1)
    assert out.data[0, 0, interior] == pytest.approx(6 * r[interior], rel=1e-10)


def test_second_derivative_constant_and_quadratic():
    s = make_sino(np.full((8, 4, 10), 3.0))
    out = second_radial_derivative(s)
    assert out.data[:, :, 1:-1] == pytest.approx(0.0, abs=1e-12)
    s = radial_poly(2)
    out = second_radial_derivative(s)
    assert out.data[:, :, 1:-1] == pytest.approx(2.0, rel=1e-12)


def test_second_derivative_linear_in_data():
    rng = np.random.default_rng(0)
    a = make_sino(rng.normal(size=(8, 4, 10)))
    b = make_sino(rng.normal(size=(8, 4, 10)))
    combo = make_sino(2.0 * a.data - 0.5 * b.data)
    out = second_radial_derivative(combo)
    expect = 2.0 * second_radial_derivative(a).data - 0.5 * second_radial_derivative(b).data
    assert out.data == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_second_derivative_needs_three_samples():
    with pytest.raises(ValueError):
        second_radial_derivative(make_sino(n_r=2))


def test_sample_radial():
    rng = np.random.default_rng(1)
    s = make_sino(rng.normal(size=(8, 4, 10)))
    r = s.radial.radii
    assert sample_radial(s, 2, 1, r[4]) == pytest.approx(s.data[2, 1, 4])
    mid = 0.5 * (r[4] + r[5])
    assert sample_radial(s, 2, 1, mid) == pytest.approx(
        0.5 * (s.data[2, 1, 4] + s.data[2, 1, 5])
    )
    assert sample_radial(s, 0, 0, 2.5) == 0.0
    assert sample_radial(s, 0, 0, -0.1) == 0.0


def test_sample_radial_between_samples():
    rng = np.random.default_rng(2)
    s = make_sino(rng.normal(size=(8, 4, 10)))
    for r in rng.uniform(0, 2, 50):
        k = min(int(r / s.radial.spacing), 9)
        lo = min(s.data[3, 2, k], s.data[3, 2, min(k + 1, 9)])
        hi = max(s.data[3, 2, k], s.data[3, 2, min(k + 1, 9)])
        assert lo - 1e-12 <= sample_radial(s, 3, 2, r) <= hi + 1e-12


def test_make_mask_counts():
    grid = make_transducer_grid(400, 200)
    assert make_mask(grid, "full").n_active == 80000
    assert make_mask(grid, "east").n_active == 200 * 200
    assert make_mask(grid, "west").n_active == 200 * 200
    assert make_mask(grid, "south").n_active == 400 * 100
    assert make_mask(grid, "north").n_active == 400 * 100


def test_make_mask_conventions():
    grid = make_transducer_grid(8, 6)
    east = make_mask(grid, "east")
    assert np.array_equal(
        east.active, np.broadcast_to(np.cos(grid.phi_values)[:, None] > 0, (8, 6))
    )
    south = make_mask(grid, "south")
    assert np.array_equal(
        south.active, np.broadcast_to(grid.theta_rule.nodes > np.pi / 2, (8, 6))
    )
    with pytest.raises(ValueError):
        make_mask(grid, "upper")


def test_apply_mask():
    rng = np.random.default_rng(3)
    s = make_sino(rng.normal(size=(8, 4, 10)))
    east = make_mask(s.grid, "east")
    masked = apply_mask(s, east)
    assert np.array_equal(masked.data[east.active], s.data[east.active])
    assert not masked.data[~east.active].any()
    # full mask is the identity
    assert np.array_equal(apply_mask(s, make_mask(s.grid, "full")).data, s.data)
    # complementary masks compose to zero
    both = apply_mask(apply_mask(s, east), make_mask(s.grid, "west"))
    assert not both.data.any()


def test_apply_mask_idempotent():
    rng = np.random.default_rng(4)
    s = make_sino(rng.normal(size=(8, 4, 10)))
    m = make_mask(s.grid, "north")
    once = apply_mask(s, m)
    twice = apply_mask(once, m)
    assert np.array_equal(once.data, twice.data)


def test_mask_needs_active_transducer():
    with pytest.raises(ValueError):
        ScanMask(active=np.zeros((4, 4), dtype=bool))


def test_sinogram_shape_validation():
    grid = make_transducer_grid(8, 4)
    radial = make_radial_grid(10, 2.0)
    with pytest.raises(ValueError):
        Sinogram(grid=grid, radial=radial, data=np.zeros((8, 4, 9)), mask=full_mask(grid))
    with pytest.raises(ValueError):
        apply_mask(make_sino(), ScanMask(active=np.ones((5, 4), dtype=bool)))
