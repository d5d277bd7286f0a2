"""Periodic grid on the cube [-R, R)^d, discrete Fourier transforms and the
kernel spectrum that diagonalizes the periodized convolution.

Layout
------
A vector field on the grid is an array of shape ``(d, N, ..., N)``.  Along
every spatial axis the storage offset ``s`` holds the node with centered index
``j = s - N/2``, i.e. coordinates ascend from ``-R`` to ``R - h``.

Spectral coefficients use the same centered ordering, so the coefficient of
frequency ``j`` sits at offset ``j + N/2``.  Kernel multipliers are kept in the
wrapped (plain FFT) order where ``j`` sits at ``j mod N``; a circular
convolution is invariant under the half-period shift between the two layouts,
so :func:`convolve` needs no phase ramps.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.fft as sfft

from .errors import GridError, InvalidCutoffError, NumericFaultError
from .green import origin_weight, truncated_kernel

ORIGIN_RULES = ("zero", "corrected")
# origin treatment used unless a caller asks otherwise
DEFAULT_ORIGIN = "corrected"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``N`` nodes per axis on ``[-R, R)^d``."""

    d: int
    R: float
    N: int

    def __post_init__(self):
        if self.d not in (2, 3):
            raise GridError(f"dimension must be 2 or 3, got {self.d!r}")
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 4 and self.N % 2 == 0):
            raise GridError(f"N must be an even integer >= 4, got {self.N!r}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise GridError(f"R must be positive, got {self.R!r}")

    @property
    def h(self):
        return 2.0 * self.R / self.N

    @property
    def shape(self):
        return (self.N,) * self.d

    @property
    def n_nodes(self):
        return self.N ** self.d

    @property
    def indices(self):
        """Centered index range ``-N/2 .. N/2 - 1`` (one axis)."""
        return np.arange(-self.N // 2, self.N // 2)

    def axis(self):
        return self.indices * self.h

    def node(self, j):
        return np.asarray(j, dtype=float) * self.h

    def offset(self, j):
        """Storage offsets of the centered multi-index ``j``."""
        j = np.asarray(j)
        if np.any(j < -self.N // 2) or np.any(j >= self.N // 2):
            raise GridError(f"index {j.tolist()} outside the centered range")
        return tuple(int(v) for v in (j + self.N // 2).ravel())

    def index(self, offset):
        return np.asarray(offset) - self.N // 2

    def coordinates(self):
        """Node coordinates as an array of shape ``(N, ..., N, d)``."""
        ax = self.axis()
        mesh = np.meshgrid(*([ax] * self.d), indexing="ij")
        return np.stack(mesh, axis=-1)

    def radii(self):
        return np.sqrt(np.sum(self.coordinates() ** 2, axis=-1))

    def frequency_norms(self):
        """``|j|`` for every centered frequency, in centered layout."""
        ax = self.indices.astype(float)
        mesh = np.meshgrid(*([ax] * self.d), indexing="ij")
        return np.sqrt(sum(m * m for m in mesh))


def build_grid(d, R, N):
    return GridSpec(d, float(R), int(N))


def _check_same_grid(a, b):
    if a != b:
        raise GridError(f"grid mismatch: {a} vs {b}")


@dataclass(frozen=True)
class NodalVectorField:
    """Complex d-vector at every node; ``values`` has shape ``(d, N, ..., N)``."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        expected = (self.grid.d,) + self.grid.shape
        if vals.shape != expected:
            raise GridError(f"field shape {vals.shape} does not match grid {expected}")
        if not np.all(np.isfinite(vals)):
            raise NumericFaultError("nodal field contains non-finite values")
        object.__setattr__(self, "values", vals)

    def at(self, j):
        """d-vector at the node with centered index ``j``."""
        return self.values[(slice(None),) + self.grid.offset(j)]

    def flat(self):
        return self.values.reshape(-1)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((grid.d,) + grid.shape, dtype=complex))

    @classmethod
    def from_flat(cls, grid, vec):
        return cls(grid, np.asarray(vec).reshape((grid.d,) + grid.shape))


@dataclass(frozen=True)
class SpectralVectorField:
    """DFT coefficients ``X(j)`` per component, centered frequency layout."""

    grid: GridSpec
    coefficients: np.ndarray = field(repr=False)

    def at(self, j):
        return self.coefficients[(slice(None),) + self.grid.offset(j)]


def _axes(d):
    return tuple(range(1, d + 1))


def to_spectral(fld):
    """Centered DFT ``X(j) = sum_n x(n) exp(-2 pi i n.j / N)`` per component."""
    axes = _axes(fld.grid.d)
    x = sfft.ifftshift(fld.values, axes=axes)
    X = sfft.fftn(x, axes=axes)
    return SpectralVectorField(fld.grid, sfft.fftshift(X, axes=axes))


def from_spectral(spec, grid=None):
    """Inverse of :func:`to_spectral`."""
    if grid is not None:
        _check_same_grid(grid, spec.grid)
    axes = _axes(spec.grid.d)
    X = sfft.ifftshift(spec.coefficients, axes=axes)
    x = sfft.ifftn(X, axes=axes)
    return NodalVectorField(spec.grid, sfft.fftshift(x, axes=axes))


def interpolate(f, grid):
    """Nodal samples of the vector function ``f`` (the interpolation projection).

    ``f`` receives the coordinate array of shape ``(N, ..., N, d)`` and must
    return an array of shape ``(N, ..., N, d)``.  If that vectorized call fails,
    ``f`` is evaluated node by node so the failing node can be reported.
    """
    x = grid.coordinates()
    try:
        vals = np.asarray(f(x), dtype=complex)
        if vals.shape != x.shape:
            raise ValueError(f"expected shape {x.shape}, got {vals.shape}")
    except Exception:
        vals = np.empty(x.shape, dtype=complex)
        for off in np.ndindex(*grid.shape):
            try:
                vals[off] = f(x[off])
            except Exception as exc:
                j = grid.index(off).tolist()
                raise GridError(f"evaluation failed at node index {j} "
                                f"(x={x[off].tolist()}): {exc}") from exc
    return NodalVectorField(grid, np.moveaxis(vals, -1, 0))


@dataclass(frozen=True)
class KernelSpectrum:
    """Per-frequency d x d multipliers of the periodized convolution.

    ``wrapped`` has shape ``(d, d, N, ..., N)`` in plain FFT order; it equals
    ``h^d`` times the centered DFT of the kernel samples.
    """

    grid: GridSpec
    params: object
    cutoff: object
    wrapped: np.ndarray = field(repr=False)
    origin: str = DEFAULT_ORIGIN

    def multiplier(self, j):
        """The d x d matrix ``m(j)`` for the centered frequency ``j``."""
        j = np.asarray(j)
        if np.any(j < -self.grid.N // 2) or np.any(j >= self.grid.N // 2):
            raise GridError(f"frequency {j.tolist()} outside the centered range")
        off = tuple(int(v) for v in np.mod(j, self.grid.N))
        return self.wrapped[(slice(None), slice(None)) + off]

    def centered(self):
        axes = tuple(range(2, 2 + self.grid.d))
        return sfft.fftshift(self.wrapped, axes=axes)


def _spectrum_from_samples(grid, samples):
    """``h^d`` times the centered DFT of kernel samples ``(N, .., N, d, d)``."""
    d = grid.d
    kern = np.moveaxis(np.moveaxis(samples, -1, 0), -1, 0)   # (d, d, N, ..)
    axes = tuple(range(2, 2 + d))
    # wrap so that storage offset 0 holds x = 0
    kern = sfft.ifftshift(kern, axes=axes)
    return grid.h ** d * sfft.fftn(kern, axes=axes)


def build_kernel_spectrum(grid, params, cutoff, origin=DEFAULT_ORIGIN):
    """Spectrum of the truncated kernel by the trapezoidal rule.

    ``origin='zero'`` drops the singular origin sample.  ``origin='corrected'``
    replaces it by :func:`~elastoscatter.green.origin_weight`.
    """
    if origin not in ORIGIN_RULES:
        raise ValueError(f"origin must be one of {ORIGIN_RULES}, got {origin!r}")
    if not grid.R > 2 * cutoff.rho:
        raise InvalidCutoffError(f"R={grid.R} must exceed 2*rho={2 * cutoff.rho}")
    if abs(grid.R - cutoff.R) > 1e-12 * grid.R:
        raise GridError(f"cutoff R={cutoff.R} differs from grid R={grid.R}")
    samples = truncated_kernel(grid.coordinates(), params, cutoff)
    if origin == "corrected":
        samples[(grid.N // 2,) * grid.d] = origin_weight(params, grid.h, grid.d)
    return KernelSpectrum(grid, params, cutoff, _spectrum_from_samples(grid, samples),
                          origin)


def spectrum_of_kernel(grid, kernel, params=None, cutoff=None):
    """Spectrum of an arbitrary kernel ``kernel(x) -> (..., d, d)`` sampled on grid."""
    samples = np.asarray(kernel(grid.coordinates()), dtype=complex)
    return KernelSpectrum(grid, params, cutoff, _spectrum_from_samples(grid, samples),
                          "custom")


def convolve_array(spectrum, values, workers=None):
    """Raw-array version of :func:`convolve` on shape ``(d, N, .., N)``."""
    d = spectrum.grid.d
    axes = _axes(d)
    W = sfft.fftn(values, axes=axes, workers=workers)
    out = np.einsum("ab...,b...->a...", spectrum.wrapped, W)
    return sfft.ifftn(out, axes=axes, overwrite_x=True, workers=workers)


def convolve(spectrum, w):
    """Apply the periodized convolution: ``IDFT[ m(j) DFT(w)(j) ]``."""
    _check_same_grid(spectrum.grid, w.grid)
    return NodalVectorField(w.grid, convolve_array(spectrum, w.values))


@dataclass(frozen=True)
class DecayBand:
    k: int
    lower: float
    upper: float
    count: int
    max_abs: float
    ratio: float


def decay_report(spectrum):
    """Dyadic-band summary of ``|m_ab(j)|`` against ``log|j| / |j|^2``.

    Bands ``2^k <= |j| < 2^(k+1)`` for ``k >= 1`` up to ``|j| < N/2``.  The
    ratio divides the band maximum by ``log(c)/c^2`` at the band midpoint
    ``c = 1.5 * 2^k``.
    """
    grid = spectrum.grid
    norms = grid.frequency_norms()
    mags = np.max(np.abs(spectrum.centered()), axis=(0, 1))
    bands = []
    k = 1
    while 2 ** (k + 1) <= grid.N // 2:
        lo, hi = 2.0 ** k, 2.0 ** (k + 1)
        sel = (norms >= lo) & (norms < hi)
        mx = float(np.max(mags[sel])) if np.any(sel) else 0.0
        mid = 1.5 * lo
        bands.append(DecayBand(k, lo, hi, int(np.count_nonzero(sel)), mx,
                               mx / (math.log(mid) / mid ** 2)))
        k += 1
    return bands


def decay_statistic(spectrum):
    """``max |m_ab(j)| |j|^2 / log|j|`` over ``2 <= |j| <= N/2``."""
    norms = spectrum.grid.frequency_norms()
    mags = np.max(np.abs(spectrum.centered()), axis=(0, 1))
    sel = (norms >= 2) & (norms <= spectrum.grid.N // 2)
    n = norms[sel]
    return float(np.max(mags[sel] * n * n / np.log(n)))
