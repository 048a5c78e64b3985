"""Fourier operators on the periodic torus ``[0, 2*pi)^d``.

Scalar fields are real arrays of shape ``(n,)*d``; vector fields carry the
component index first, shape ``(d,) + (n,)*d``.  Transforms are real-to-complex
(``numpy.fft.rfftn``) over the trailing ``d`` axes.

Odd-order derivatives use wavenumbers with the Nyquist entry set to zero, the
usual convention that keeps derivatives of real fields real.  As a consequence
identities such as ``div(inv_div(f)) == f - mean(f)`` hold exactly for every
field without Nyquist content (all band-limited data); the pure Nyquist
component, whose derivative vanishes on the grid, is dropped.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid with ``n`` points per axis on the ``d``-torus of side 2*pi."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if self.n < 2 or self.n & (self.n - 1):
            raise DomainError(f"points per axis must be a power of two, got {self.n}")

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def spectral_shape(self):
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def dx(self):
        return TWO_PI / self.n

    @property
    def volume(self):
        return TWO_PI ** self.dim

    @property
    def axes(self):
        return tuple(range(-self.dim, 0))

    @cached_property
    def coords(self):
        """Tuple of coordinate arrays, each broadcast to ``shape``."""
        x = np.arange(self.n) * self.dx
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self):
        """Integer wavenumbers in rfft layout, one broadcastable array per axis."""
        ks = []
        for ax in range(self.dim):
            if ax == self.dim - 1:
                k = np.arange(self.n // 2 + 1, dtype=float)
            else:
                k = np.fft.fftfreq(self.n, 1.0 / self.n)
            shp = [1] * self.dim
            shp[ax] = k.size
            ks.append(k.reshape(shp))
        return tuple(ks)

    @cached_property
    def dwavenumbers(self):
        """Wavenumbers for odd derivatives (Nyquist entry zeroed)."""
        out = []
        for k in self.wavenumbers:
            k = k.copy()
            k[np.abs(k) == self.n // 2] = 0.0
            out.append(k)
        return tuple(out)

    @cached_property
    def k2(self):
        """``|xi|^2`` on the rfft layout (full symbol, Nyquist included)."""
        return sum(np.broadcast_to(k, self.spectral_shape) ** 2 for k in self.wavenumbers)

    @cached_property
    def dk2(self):
        """``|xi|^2`` built from the odd-derivative wavenumbers; equals the
        symbol of ``div(grad(.))``."""
        return sum(np.broadcast_to(k, self.spectral_shape) ** 2 for k in self.dwavenumbers)

    @cached_property
    def hermitian_weight(self):
        """Multiplicity of each rfft coefficient in the full spectrum (1 or 2)."""
        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        if self.n > 1:
            w[..., self.n // 2] = 1.0
        return w

    def metadata(self):
        return {"dim": self.dim, "n": self.n, "length": TWO_PI}


# ---------------------------------------------------------------------------
# transforms and elementary helpers

def fft(grid, f):
    return np.fft.rfftn(f, axes=grid.axes)


def ifft(grid, fh):
    return np.fft.irfftn(fh, s=grid.shape, axes=grid.axes)


def mean(grid, f):
    """Spatial mean over the trailing ``d`` axes."""
    return np.mean(f, axis=grid.axes)


def integrate(grid, f):
    """Trapezoidal (spectrally exact for trigonometric data) integral over the torus."""
    return np.sum(f, axis=grid.axes) * grid.dx ** grid.dim


def inner(grid, f, g):
    """L2 inner product, summed over any leading component axes."""
    return float(np.sum(f * g)) * grid.dx ** grid.dim


def l2_norm(grid, f):
    return np.sqrt(inner(grid, f, f))


def spectral_l2_norm(grid, f):
    """L2 norm evaluated in Fourier space (Parseval)."""
    fh = fft(grid, f)
    s = np.sum(grid.hermitian_weight * np.abs(fh) ** 2, axis=grid.axes)
    s = np.sum(s)
    return float(np.sqrt(s * grid.volume)) / grid.n ** grid.dim


def _check_scalar(grid, f):
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape:
        raise DomainError(f"expected scalar field of shape {grid.shape}, got {f.shape}")
    return f


def _check_vector(grid, v):
    v = np.asarray(v, dtype=float)
    if v.shape != (grid.dim,) + grid.shape:
        raise DomainError(
            f"expected vector field of shape {(grid.dim,) + grid.shape}, got {v.shape}")
    return v


# ---------------------------------------------------------------------------
# differential operators

def grad(grid, f):
    """Spectral gradient of a scalar field."""
    fh = fft(grid, _check_scalar(grid, f))
    return np.stack([ifft(grid, 1j * k * fh) for k in grid.dwavenumbers])


def div(grid, v):
    """Spectral divergence of a vector field."""
    v = _check_vector(grid, v)
    acc = np.zeros(grid.spectral_shape, dtype=complex)
    for comp, k in zip(v, grid.dwavenumbers):
        acc += 1j * k * fft(grid, comp)
    return ifft(grid, acc)


def lap(grid, f):
    """Spectral Laplacian (full symbol ``-|xi|^2``); acts componentwise."""
    return ifft(grid, -grid.k2 * fft(grid, f))


def lap_inv(grid, f):
    """Inverse Laplacian on the mean-free part; returns a mean-free field."""
    fh = fft(grid, _check_scalar(grid, f))
    k2 = grid.k2
    out = np.zeros_like(fh)
    nz = k2 > 0
    out[nz] = -fh[nz] / k2[nz]
    return ifft(grid, out)


def inv_div(grid, f):
    """Right inverse of the divergence, ``grad(lap^-1 (f - mean f))``.

    This is the torus counterpart of the Bogovskii operator: the result has
    zero mean in every component and its divergence reproduces ``f - mean(f)``.
    """
    fh = fft(grid, _check_scalar(grid, f))
    dk2 = grid.dk2
    phi = np.zeros_like(fh)
    nz = dk2 > 0
    phi[nz] = -fh[nz] / dk2[nz]
    return np.stack([ifft(grid, 1j * k * phi) for k in grid.dwavenumbers])


def riesz(grid, v):
    """Apply the Fourier multiplier ``xi xi^T / |xi|^2`` (zero on the mean mode).

    The result is the gradient (longitudinal) part of ``v``; the operator is an
    orthogonal projection.
    """
    v = _check_vector(grid, v)
    vh = [fft(grid, c) for c in v]
    dk2 = grid.dk2
    nz = dk2 > 0
    s = sum(k * c for k, c in zip(grid.dwavenumbers, vh))
    coef = np.zeros_like(s)
    coef[nz] = s[nz] / dk2[nz]
    return np.stack([ifft(grid, k * coef) for k in grid.dwavenumbers])


def translate(grid, f, shift):
    """Cyclic shift of a (scalar or vector) field by integer cells per axis."""
    return np.roll(f, shift, axis=grid.axes)


# ---------------------------------------------------------------------------
# mode ordering and Galerkin projection

@dataclass(frozen=True)
class ModeSet:
    """The first ``count`` real Fourier modes of a grid.

    A mode is a conjugate class ``{xi, -xi}``, i.e. the real span of
    ``cos(xi.x)`` and ``sin(xi.x)`` (only the cosine for self-conjugate
    wavevectors).  Classes are ordered by ``|xi|`` and then lexicographically
    by their canonical representative (the larger of ``xi`` and ``-xi``).
    """

    grid: TorusGrid
    count: int
    mask: np.ndarray = field(repr=False, compare=False)
    wavevectors: tuple = field(repr=False, compare=False)

    @property
    def real_dimension(self):
        """Number of real basis functions spanned by the selected classes."""
        return int(np.sum(self.mask * self.grid.hermitian_weight))


def _mode_classes(grid):
    n = grid.n
    k1 = np.fft.fftfreq(n, 1.0 / n).astype(int)
    pts = np.stack(np.meshgrid(*([k1] * grid.dim), indexing="ij"), axis=-1).reshape(-1, grid.dim)

    def wrap(k):
        k = np.mod(k + n // 2, n) - n // 2  # range [-n/2, n/2)
        return k

    neg = wrap(-pts)
    canon = []
    seen = set()
    for p, q in zip(pts.tolist(), neg.tolist()):
        c = max(tuple(p), tuple(q))
        if c in seen:
            continue
        seen.add(c)
        canon.append(c)
    canon.sort(key=lambda c: (sum(x * x for x in c), c))
    return canon


_MODE_CACHE: dict = {}


def mode_set(grid, count):
    """Return the :class:`ModeSet` holding the first ``count`` mode classes."""
    key = (grid, count)
    if key in _MODE_CACHE:
        return _MODE_CACHE[key]
    classes = _mode_classes(grid)
    if count < 0 or count > len(classes):
        raise DomainError(f"mode count {count} outside [0, {len(classes)}]")
    n = grid.n
    mask = np.zeros(grid.spectral_shape, dtype=bool)
    for c in classes[:count]:
        for sgn in (1, -1):
            k = [(sgn * x) % n for x in c]
            if k[-1] <= n // 2:
                mask[tuple(k)] = True
    ms = ModeSet(grid, count, mask, tuple(classes[:count]))
    _MODE_CACHE[key] = ms
    return ms


def total_modes(grid):
    return len(_mode_classes(grid))


def project_modes(grid, f, N):
    """L2-orthogonal projection onto the first ``N`` mode classes.

    Applies componentwise to vector fields (leading axis).
    """
    ms = mode_set(grid, N)
    return ifft(grid, np.where(ms.mask, fft(grid, f), 0.0))


# ---------------------------------------------------------------------------
# dealiased products

def _pad(grid, fh, m):
    """Zero-pad an rfft spectrum from ``n`` to ``m`` points per axis."""
    n = grid.n
    d = grid.dim
    out = np.zeros((m,) * (d - 1) + (m // 2 + 1,), dtype=complex)
    half = n // 2
    # index sets of retained (non-Nyquist) wavenumbers in the full axes
    src_full = np.r_[0:half, n - half + 1:n]
    dst_full = np.r_[0:half, m - half + 1:m]
    idx_src = [src_full] * (d - 1) + [np.arange(half)]
    idx_dst = [dst_full] * (d - 1) + [np.arange(half)]
    out[np.ix_(*idx_dst)] = fh[np.ix_(*idx_src)]
    return out * (m / n) ** d


def _truncate(grid, gh, m):
    n = grid.n
    d = grid.dim
    half = n // 2
    out = np.zeros(grid.spectral_shape, dtype=complex)
    src_full = np.r_[0:half, m - half + 1:m]
    dst_full = np.r_[0:half, n - half + 1:n]
    idx_src = [src_full] * (d - 1) + [np.arange(half)]
    idx_dst = [dst_full] * (d - 1) + [np.arange(half)]
    out[np.ix_(*idx_dst)] = gh[np.ix_(*idx_src)]
    return out * (n / m) ** d


def padded_product(grid, *factors, order=None):
    """Alias-free pointwise product of scalar fields.

    Each factor is zero-padded to ``m >= (order + 1) n / 2`` points per axis
    (the 3/2 rule for quadratic products, 2x for cubic ones), multiplied in
    physical space and truncated back to ``n`` points.  Nyquist content of the
    factors is discarded.
    """
    order = len(factors) if order is None else order
    m = int(np.ceil((order + 1) * grid.n / 2))
    m += m % 2
    prod = None
    for f in factors:
        fp = np.fft.irfftn(_pad(grid, fft(grid, f), m), s=(m,) * grid.dim, axes=grid.axes)
        prod = fp if prod is None else prod * fp
    gh = np.fft.rfftn(prod, axes=grid.axes)
    return ifft(grid, _truncate(grid, gh, m))


def resample(grid, f, n_new):
    """Trigonometric interpolation of ``f`` onto ``n_new`` points per axis.

    Leading axes (components, species) are resampled one by one; Nyquist
    content is discarded.  Returns ``(new_grid, field)``.
    """
    target = TorusGrid(grid.dim, n_new)
    f = np.asarray(f, dtype=float)
    lead = f.shape[:f.ndim - grid.dim]
    flat = f.reshape((-1,) + grid.shape)
    out = []
    for comp in flat:
        fh = fft(grid, comp)
        if n_new >= grid.n:
            out.append(np.fft.irfftn(_pad(grid, fh, n_new), s=target.shape, axes=grid.axes))
        else:
            out.append(ifft(target, _truncate(target, fh, grid.n)))
    return target, np.stack(out).reshape(lead + target.shape)


# ---------------------------------------------------------------------------
# field serialisation: raw little-endian float64 + JSON sidecar

def save_field(path, grid, f, *, name="field", units=None, time=None):
    """Write ``f`` as raw ``<f8`` bytes (row-major) plus ``<path>.json``."""
    path = Path(path)
    arr = np.ascontiguousarray(np.asarray(f, dtype="<f8"))
    path.write_bytes(arr.tobytes(order="C"))
    meta = {
        "name": name,
        "shape": list(arr.shape),
        "dtype": "<f8",
        "order": "C",
        "grid": grid.metadata(),
        "units": units,
        "time": time,
    }
    path.with_name(path.name + ".json").write_text(json.dumps(meta, indent=2) + "\n")


def load_field(path):
    """Inverse of :func:`save_field`; returns ``(grid, array, metadata)``."""
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    arr = np.frombuffer(path.read_bytes(), dtype=meta["dtype"]).reshape(meta["shape"])
    g = meta["grid"]
    return TorusGrid(g["dim"], g["n"]), arr.astype(float), meta
