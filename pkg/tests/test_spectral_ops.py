import json

import numpy as np
import pytest

from bifluid_lab import spectral_ops as so
from bifluid_lab.errors import DomainError


@pytest.fixture(params=[1, 2, 3])
def grid(request):
    return so.TorusGrid(request.param, {1: 32, 2: 16, 3: 8}[request.param])


def band_limited(grid, seed=0, kmax=2):
    rng = np.random.default_rng(seed)
    x = grid.coords
    f = np.full(grid.shape, rng.normal())
    for _ in range(6):
        k = rng.integers(-kmax, kmax + 1, size=grid.dim)
        phase = rng.uniform(0, 2 * np.pi)
        f = f + rng.normal() * np.cos(sum(ki * xi for ki, xi in zip(k, x)) + phase)
    return f


def test_grid_rejects_bad_sizes():
    with pytest.raises(DomainError):
        so.TorusGrid(2, 12)
    with pytest.raises(DomainError):
        so.TorusGrid(4, 8)


def test_round_trip(grid):
    f = np.random.default_rng(1).normal(size=grid.shape)
    back = so.ifft(grid, so.fft(grid, f))
    assert np.max(np.abs(back - f)) <= 1e-13 * np.max(np.abs(f))
    assert so.fft(grid, np.ones(grid.shape)).flat[0] == pytest.approx(grid.n ** grid.dim)


def test_grad_of_sine(grid):
    x = grid.coords
    g = so.grad(grid, np.sin(x[0]))
    assert np.max(np.abs(g[0] - np.cos(x[0]))) < 1e-12
    for comp in g[1:]:
        assert np.max(np.abs(comp)) < 1e-12


def test_div_grad_is_laplacian(grid):
    f = band_limited(grid)
    assert np.max(np.abs(so.div(grid, so.grad(grid, f)) - so.lap(grid, f))) < 1e-12


def test_lap_inv_single_mode(grid):
    x = grid.coords
    assert np.max(np.abs(so.lap_inv(grid, np.cos(x[0])) + np.cos(x[0]))) < 1e-12
    f = band_limited(grid, seed=3)
    u = so.lap_inv(grid, f)
    assert abs(so.mean(grid, u)) < 1e-13
    assert np.max(np.abs(so.lap(grid, u) - (f - f.mean()))) < 1e-12


def test_inv_div(grid):
    x = grid.coords
    v = so.inv_div(grid, np.cos(x[0]))
    assert np.max(np.abs(v[0] - np.sin(x[0]))) < 1e-12
    assert all(np.max(np.abs(c)) < 1e-12 for c in v[1:])
    assert np.max(np.abs(so.inv_div(grid, np.full(grid.shape, 3.0)))) < 1e-14
    f = np.random.default_rng(2).normal(size=grid.shape)
    # drop the Nyquist content, whose derivative vanishes on the grid
    f = so.project_modes(grid, f, so.total_modes(grid))
    fh = so.fft(grid, f)
    for ax, k in enumerate(grid.wavenumbers):
        fh = np.where(np.abs(np.broadcast_to(k, fh.shape)) == grid.n // 2, 0, fh)
    f = so.ifft(grid, fh)
    w = so.inv_div(grid, f)
    resid = so.div(grid, w) - (f - f.mean())
    assert so.l2_norm(grid, resid) <= 1e-12 * so.l2_norm(grid, f)
    assert np.max(np.abs(so.mean(grid, w))) < 1e-13


def test_riesz(grid):
    x = grid.coords
    phase = x[0] + (x[1] if grid.dim > 1 else 0)
    v = so.grad(grid, np.sin(phase))
    assert np.max(np.abs(so.riesz(grid, v) - v)) < 1e-12
    if grid.dim > 1:
        # divergence-free: (sin x2, 0, ...)
        w = np.zeros((grid.dim,) + grid.shape)
        w[0] = np.sin(x[1])
        assert np.max(np.abs(so.riesz(grid, w))) < 1e-12
    r = np.random.default_rng(4).normal(size=(grid.dim,) + grid.shape)
    once = so.riesz(grid, r)
    assert np.max(np.abs(so.riesz(grid, once) - once)) < 1e-12
    assert np.max(np.abs(so.mean(grid, once))) < 1e-13


def test_parseval(grid):
    f = np.random.default_rng(5).normal(size=grid.shape)
    a, b = so.l2_norm(grid, f), so.spectral_l2_norm(grid, f)
    assert abs(a - b) <= 1e-12 * a


def test_projection(grid):
    f = np.random.default_rng(6).normal(size=grid.shape)
    M = so.total_modes(grid)
    assert np.max(np.abs(so.project_modes(grid, f, M) - f)) < 1e-12 * np.max(np.abs(f)) * 10
    for N in (1, 3, 7):
        p = so.project_modes(grid, f, N)
        assert np.max(np.abs(so.project_modes(grid, p, N) - p)) < 1e-12
        assert so.l2_norm(grid, p) <= so.l2_norm(grid, f)
    x = grid.coords
    high = np.cos((grid.n // 2 - 1) * x[0])
    assert np.max(np.abs(so.project_modes(grid, high, 3))) < 1e-13
    low = band_limited(grid, kmax=1)
    assert np.max(np.abs(so.project_modes(grid, low, M) - low)) < 1e-12


def test_mode_ordering_2d():
    g = so.TorusGrid(2, 16)
    ms = so.mode_set(g, 7)
    norms = [sum(c * c for c in k) for k in ms.wavevectors]
    assert norms == sorted(norms)
    assert ms.wavevectors[0] == (0, 0)
    assert norms == [0, 1, 1, 2, 2, 4, 4]
    # cos and sin of each non-constant class
    assert ms.real_dimension == 1 + 2 * 6


def test_translation_commutes(grid):
    f = band_limited(grid, seed=9)
    shift = (1,) * grid.dim
    for op in (lambda h: so.lap(grid, h), lambda h: so.lap_inv(grid, h),
               lambda h: so.project_modes(grid, h, 5)):
        assert np.max(np.abs(op(so.translate(grid, f, shift))
                             - so.translate(grid, op(f), shift))) < 1e-12
    v = so.grad(grid, f)
    assert np.max(np.abs(so.div(grid, so.translate(grid, v, shift))
                         - so.translate(grid, so.div(grid, v), shift))) < 1e-12


def test_padded_product_is_exact_for_resolved_products():
    g = so.TorusGrid(2, 16)
    x = g.coords
    a, b = np.sin(3 * x[0]) + np.cos(x[1]), np.cos(4 * x[0] - 2 * x[1])
    assert np.max(np.abs(so.padded_product(g, a, b) - a * b)) < 1e-12
    # an aliased product loses the content above the grid cutoff
    c = np.cos(6 * x[0])
    assert np.max(np.abs(so.padded_product(g, c, c) - 0.5)) < 1e-12


def test_resample_round_trip():
    g = so.TorusGrid(2, 16)
    x = g.coords
    f = np.sin(x[0]) * np.cos(2 * x[1])
    g2, h = so.resample(g, f, 32)
    assert np.max(np.abs(h - np.sin(g2.coords[0]) * np.cos(2 * g2.coords[1]))) < 1e-13
    assert np.max(np.abs(so.resample(g2, h, 16)[1] - f)) < 1e-13


def test_field_io(tmp_path, grid):
    f = np.random.default_rng(7).normal(size=grid.shape)
    so.save_field(tmp_path / "f", grid, f, name="rho", time=0.5)
    g2, back, meta = so.load_field(tmp_path / "f")
    assert g2 == grid
    assert np.array_equal(back, f)
    assert meta["dtype"] == "<f8" and meta["time"] == 0.5
    assert (tmp_path / "f").stat().st_size == 8 * f.size
    json.loads((tmp_path / "f.json").read_text())
