import numpy as np
import pytest

from tctrecon import kernels
from tctrecon.kernels import numba_backend, numpy_backend


def random_case(seed):
    rng = np.random.default_rng(seed)
    center = rng.uniform(-0.4, 0.4, size=3)
    axes = rng.uniform(0.1, 0.5, size=3)
    theta, phi = rng.uniform(0.2, np.pi - 0.2), rng.uniform(0, 2 * np.pi)
    p = np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )
    return center, axes, p


@pytest.mark.parametrize("seed", range(6))
def test_f_grid_backends_agree(seed):
    center, axes, p = random_case(seed)
    radii = np.linspace(0.05, 2.0, 40)
    phis = np.linspace(0.0, 2 * np.pi, 24, endpoint=False)
    f_np, c_np = numpy_backend.f_grid(center, axes, p, radii, phis)
    f_nb, c_nb = numba_backend.f_grid(center, axes, p, radii, phis)
    assert f_nb == pytest.approx(f_np, rel=1e-9, abs=1e-9)
    assert np.array_equal(c_nb, c_np)


def test_backproject_points_backends_agree():
    rng = np.random.default_rng(0)
    data = rng.normal(size=(10, 6, 14))
    weights = rng.uniform(0.1, 1.0, size=(10, 6))
    theta = np.linspace(0.2, np.pi - 0.2, 6)
    phi = np.linspace(0, 2 * np.pi, 10, endpoint=False)
    positions = np.stack(
        [
            np.sin(theta)[None, :] * np.cos(phi)[:, None],
            np.sin(theta)[None, :] * np.sin(phi)[:, None],
            np.broadcast_to(np.cos(theta)[None, :], (10, 6)),
        ],
        axis=2,
    )
    pts = rng.uniform(-0.7, 0.7, size=(50, 3))
    for weighted in (False, True):
        out_np = numpy_backend.backproject_points(data, weights, positions, 2.0, pts, weighted)
        out_nb = numba_backend.backproject_points(data, weights, positions, 2.0, pts, weighted)
        assert out_nb == pytest.approx(out_np, rel=1e-12, abs=1e-12)


def test_get_backend_explicit():
    assert kernels.get_backend("numpy") is numpy_backend
    assert kernels.get_backend("numba") is numba_backend
    with pytest.raises(ValueError):
        kernels.get_backend("cuda")


def test_get_backend_env(monkeypatch):
    monkeypatch.setenv("TCT_BACKEND", "numpy")
    assert kernels.get_backend() is numpy_backend
    monkeypatch.setenv("TCT_BACKEND", "NUMBA")
    assert kernels.get_backend() is numba_backend
    monkeypatch.setenv("TCT_BACKEND", "opencl")
    with pytest.raises(ValueError):
        kernels.get_backend()
    monkeypatch.delenv("TCT_BACKEND")
    assert kernels.get_backend() in (numpy_backend, numba_backend)
