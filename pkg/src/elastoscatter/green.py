"""Outgoing fundamental tensor of the Lame operator, smooth radial cutoff and
the truncated kernel sampled on the periodic grid.

The tensor has the form ``Phi(x) = phi1(|x|) I + phi2(|x|) x x^T / |x|^2`` with
the scalar profiles below.  Both dimensions are evaluated through formulations
in which the ``1/v^2`` (d=2) and ``1/v^3`` (d=3) parts cancel analytically, so
the profiles stay accurate as ``v -> 0``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import special as sps

from .errors import DomainError, InvalidCutoffError, InvalidMaterialError
from .special import hankel1

# Regularized lattice sums entering the corrected origin weight (square and
# simple cubic lattices): Z2'(0)/2 and Z3(1/2), where Zd(s) = sum' |k|^(-2s).
LATTICE_LOG_CONSTANT_2D = -1.3105329259115095
LATTICE_ZETA_HALF_3D = -2.8372974794806

_SERIES_SWITCH_2D = 2.0
_SERIES_SWITCH_3D = 0.1


@dataclass(frozen=True)
class LameParams:
    """Lame parameters ``lam``, ``mu`` and angular frequency ``omega``."""

    lam: float
    mu: float
    omega: float

    def __post_init__(self):
        for name in ("lam", "mu", "omega"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidMaterialError(f"{name} must be finite, got {value!r}")
        if self.mu <= 0 or 2 * self.mu + self.lam <= 0:
            raise InvalidMaterialError(
                f"strong ellipticity requires mu > 0 and 2 mu + lambda > 0 "
                f"(lambda={self.lam}, mu={self.mu})")
        if self.omega <= 0:
            raise InvalidMaterialError(f"omega must be positive, got {self.omega}")

    @property
    def k_p(self):
        return self.omega / math.sqrt(2 * self.mu + self.lam)

    @property
    def k_s(self):
        return self.omega / math.sqrt(self.mu)

    def with_omega(self, omega):
        return LameParams(self.lam, self.mu, omega)


def wavenumbers(params):
    """Return ``(k_p, k_s)`` for ``params``."""
    return params.k_p, params.k_s


@dataclass(frozen=True)
class CutoffSpec:
    """Potential support radius ``rho`` and half side ``R`` of the cube."""

    rho: float
    R: float

    def __post_init__(self):
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise InvalidCutoffError(f"rho must be positive, got {self.rho!r}")
        if not self.R > 2 * self.rho:
            raise InvalidCutoffError(
                f"the cube half-width R={self.R} must exceed 2*rho={2 * self.rho}")


@dataclass(frozen=True)
class GreenMatrix:
    """The d x d tensor at one point with its radial decomposition."""

    matrix: np.ndarray
    phi1: complex
    phi2: complex
    direction: np.ndarray


def _radii(v):
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise DomainError("radial profiles are defined for v > 0 only")
    return v


def _y2_regular(z):
    """Y2(z) + 4/(pi z^2), the part of Y2 left after removing its pole."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    big = z > _SERIES_SWITCH_2D
    zb = z[big]
    out[big] = sps.yv(2, zb) + 4.0 / (np.pi * zb * zb)
    zs = z[~big]
    if zs.size:
        q = -0.25 * zs * zs
        term = 0.25 * zs * zs / 2.0          # (z/2)^2 / (0! 2!)
        acc = np.zeros_like(zs)
        for m in range(25):
            acc += (sps.digamma(m + 1) + sps.digamma(m + 3)) * term
            term = term * q / ((m + 1) * (m + 3))
        out[~big] = (-1.0 + 2.0 * np.log(0.5 * zs) * sps.jv(2, zs) - acc) / np.pi
    return out


def _h2_regular(z):
    return sps.jv(2, z) + 1j * _y2_regular(z)


def phi_pair_2d(v, params):
    """Radial profiles ``(phi1, phi2)`` of the planar tensor at ``v > 0``.

    Uses ``H1(z)/z = (H0(z) + H2(z))/2`` and ``2 H1(z)/z - H0(z) = H2(z)`` so
    that the pole of H2 cancels between the shear and pressure terms exactly.
    """
    v = _radii(v)
    ks, kp, w2 = params.k_s, params.k_p, params.omega ** 2
    h0s = hankel1(0, ks * v)
    h0p = hankel1(0, kp * v)
    diff2 = ks * ks * _h2_regular(ks * v) - kp * kp * _h2_regular(kp * v)
    phi1 = 0.125j * (h0s / params.mu + h0p / (2 * params.mu + params.lam)) \
        - 0.125j / w2 * diff2
    phi2 = 0.25j / w2 * diff2
    return phi1, phi2


def _phi_pair_3d_direct(v, ks, kp, w2):
    es, ep = np.exp(1j * ks * v), np.exp(1j * kp * v)
    a = (ks * ks * es - kp * kp * ep) / v
    b = (1j * ks * es - 1j * kp * ep) / v ** 2
    c = (es - ep) / v ** 3
    pref = 1.0 / (4 * np.pi * w2)
    phi1 = pref * (ks * ks * es / v + b - c)
    phi2 = pref * (-a - 3 * b + 3 * c)
    return phi1, phi2


def _phi_pair_3d_split(v, ks, kp, w2):
    # Singular parts in closed form; smooth remainders by their Taylor series.
    es = np.exp(1j * ks * v)
    psi1 = np.zeros(v.shape, dtype=complex)
    psi2 = np.zeros(v.shape, dtype=complex)
    for m in range(3, 18):
        coef = (1j * ks) ** m - (1j * kp) ** m
        vm = v ** (m - 3) / math.factorial(m)
        psi1 += (m - 1) * coef * vm
        psi2 += (m - 1) * (m - 3) * coef * vm
    pref = 1.0 / (4 * np.pi * w2)
    phi1 = pref * (ks * ks * es / v + (kp * kp - ks * ks) / (2 * v) + psi1)
    phi2 = pref * ((ks * ks - kp * kp) / (2 * v) + psi2)
    return phi1, phi2


def phi_pair_3d(v, params, split_below=_SERIES_SWITCH_3D):
    """Radial profiles ``(phi1, phi2)`` of the spatial tensor at ``v > 0``.

    Where ``max(k_p, k_s) * v < split_below`` the exponential formulas are
    replaced by their singular terms plus Taylor series of the smooth
    remainders, avoiding the cancellation of the ``1/v^3`` terms.
    """
    v = _radii(v)
    ks, kp, w2 = params.k_s, params.k_p, params.omega ** 2
    scalar = v.ndim == 0
    v = np.atleast_1d(v)
    phi1 = np.empty(v.shape, dtype=complex)
    phi2 = np.empty(v.shape, dtype=complex)
    small = max(ks, kp) * v < split_below
    phi1[~small], phi2[~small] = _phi_pair_3d_direct(v[~small], ks, kp, w2)
    phi1[small], phi2[small] = _phi_pair_3d_split(v[small], ks, kp, w2)
    if scalar:
        return complex(phi1[0]), complex(phi2[0])
    return phi1, phi2


def phi_pair(v, params, d):
    if d == 2:
        return phi_pair_2d(v, params)
    if d == 3:
        return phi_pair_3d(v, params)
    raise DomainError(f"dimension must be 2 or 3, got {d!r}")


def green_tensor_field(points, params):
    """Tensor at every point of an ``(..., d)`` array; returns ``(..., d, d)``."""
    x = np.asarray(points, dtype=float)
    d = x.shape[-1]
    r = np.sqrt(np.sum(x * x, axis=-1))
    if np.any(r == 0):
        raise DomainError("the fundamental tensor is singular at x = 0")
    phi1, phi2 = phi_pair(r, params, d)
    xh = x / r[..., None]
    out = phi2[..., None, None] * xh[..., :, None] * xh[..., None, :]
    idx = np.arange(d)
    out[..., idx, idx] += phi1[..., None]
    return out


def green_tensor(x, params, d=None):
    """Return the :class:`GreenMatrix` at a single nonzero point ``x``."""
    x = np.asarray(x, dtype=float)
    if d is not None and x.shape != (d,):
        raise DomainError(f"expected a point in R^{d}, got shape {x.shape}")
    if x.shape not in ((2,), (3,)):
        raise DomainError(f"expected a point in R^2 or R^3, got shape {x.shape}")
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise DomainError("the fundamental tensor is singular at x = 0")
    mat = green_tensor_field(x[None, :], params)[0]
    phi1, phi2 = phi_pair(np.array([r]), params, x.size)
    return GreenMatrix(mat, complex(phi1[0]), complex(phi2[0]), x / r)


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def cutoff_psi(r, spec):
    """Smooth cutoff equal to 1 on ``[0, 2 rho]`` and 0 on ``[R, inf)``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("cutoff_psi needs r >= 0")
    width = spec.R - 2 * spec.rho
    a = _bump((spec.R - r) / width)
    b = _bump((r - 2 * spec.rho) / width)
    out = a / (a + b)
    return out if out.ndim else float(out)


def truncated_kernel(points, params, spec):
    """``Phi(x) psi(|x|)`` at an ``(..., d)`` array of points.

    The value at the origin is the zero matrix, and so is every point with
    ``|x| >= R``.
    """
    x = np.asarray(points, dtype=float)
    d = x.shape[-1]
    r = np.sqrt(np.sum(x * x, axis=-1))
    out = np.zeros(x.shape[:-1] + (d, d), dtype=complex)
    live = (r > 0) & (r < spec.R)
    if np.any(live):
        out[live] = green_tensor_field(x[live], params) \
            * cutoff_psi(r[live], spec)[:, None, None]
    return out


def origin_weight(params, h, d):
    """Corrected origin sample for the trapezoidal rule on a mesh of size ``h``.

    Replacing the zero origin sample by this matrix removes the leading
    local quadrature error induced by the kernel singularity (the
    ``h^2 log h`` and ``h^2`` terms for d=2, the ``h^2`` term for d=3).
    """
    ks, kp, w2 = params.k_s, params.k_p, params.omega ** 2
    cp = 1.0 / (2 * params.mu + params.lam)
    cs = 1.0 / params.mu
    if d == 2:
        log_coef = -(cs + cp) / (4 * np.pi)
        const = (0.125j * (cs + cp)
                 - ((math.log(ks / 2) + np.euler_gamma) * cs
                    + (math.log(kp / 2) + np.euler_gamma) * cp) / (4 * np.pi)
                 - (cs - cp) / (8 * np.pi))
        phi2_origin = (cs - cp) / (4 * np.pi)
        value = log_coef * (math.log(h) + LATTICE_LOG_CONSTANT_2D) + const \
            + 0.5 * phi2_origin
    elif d == 3:
        a1 = (ks * ks + kp * kp) / (8 * np.pi * w2)
        a2 = (ks * ks - kp * kp) / (8 * np.pi * w2)
        b1 = 1j * (2 * ks ** 3 + kp ** 3) / (12 * np.pi * w2)
        lattice = -LATTICE_ZETA_HALF_3D / h
        value = a1 * lattice + b1 + a2 * lattice / 3.0
    else:
        raise DomainError(f"dimension must be 2 or 3, got {d!r}")
    return value * np.eye(d, dtype=complex)
