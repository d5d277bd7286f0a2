"""Potentials and incident plane waves."""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, GridError, LayoutError, SupportError, WaveError
from .grid import NodalVectorField

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Potential:
    """Real d x d matrix per node, zero outside the ball of radius ``rho``.

    ``values`` has shape ``(d, d, N, ..., N)`` in the grid's centered layout.
    """

    grid: object
    rho: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = self.grid
        vals = np.asarray(self.values, dtype=float)
        expected = (g.d, g.d) + g.shape
        if vals.shape != expected:
            raise LayoutError(f"potential shape {vals.shape}, expected {expected}")
        if not np.all(np.isfinite(vals)):
            raise LayoutError("potential samples must be finite")
        if not self.rho < g.R / 2:
            raise SupportError(f"support radius rho={self.rho} must be below R/2={g.R / 2}")
        outside = (g.radii() > self.rho) & np.any(vals != 0, axis=(0, 1))
        if np.any(outside):
            offs = np.argwhere(outside)
            nodes = [g.index(o).tolist() for o in offs[:20]]
            raise SupportError(
                f"{len(offs)} nonzero node(s) outside |x| <= {self.rho}, e.g. {nodes}",
                offending=[tuple(g.index(o).tolist()) for o in offs])
        object.__setattr__(self, "values", vals)

    @property
    def support(self):
        """Boolean node mask where some entry of Q is nonzero."""
        return np.any(self.values != 0, axis=(0, 1))

    def at(self, j):
        return self.values[(slice(None), slice(None)) + self.grid.offset(j)]

    @classmethod
    def zero(cls, grid, rho):
        return cls(grid, rho, np.zeros((grid.d, grid.d) + grid.shape))

    @classmethod
    def scalar(cls, grid, rho, q):
        """``Q = q I`` from nodal samples ``q`` of shape ``(N, ..., N)``."""
        vals = np.zeros((grid.d, grid.d) + grid.shape)
        for a in range(grid.d):
            vals[a, a] = q
        return cls(grid, rho, vals)


@dataclass(frozen=True)
class IncidentWave:
    """Plane p-wave ``exp(i k_p theta.x) theta`` or s-wave ``exp(i k_s theta.x) pol``."""

    kind: str
    theta: tuple
    omega: float
    pol: tuple = None

    def __post_init__(self):
        if self.kind not in ("p", "s"):
            raise WaveError(f"wave kind must be 'p' or 's', got {self.kind!r}")
        theta = np.asarray(self.theta, dtype=float)
        if theta.shape not in ((2,), (3,)):
            raise WaveError("theta must be a vector in R^2 or R^3")
        if abs(np.linalg.norm(theta) - 1) > _UNIT_TOL:
            raise WaveError("theta must be a unit vector")
        if not self.omega > 0:
            raise WaveError("omega must be positive")
        object.__setattr__(self, "theta", tuple(float(t) for t in theta))
        if self.kind == "s":
            if self.pol is None:
                raise WaveError("s-waves need a polarization vector")
            pol = np.asarray(self.pol, dtype=float)
            if pol.shape != theta.shape:
                raise WaveError("polarization and direction dimensions differ")
            if abs(np.linalg.norm(pol) - 1) > _UNIT_TOL or abs(pol @ theta) > _UNIT_TOL:
                raise WaveError("polarization must be a unit vector orthogonal to theta")
            object.__setattr__(self, "pol", tuple(float(p) for p in pol))
        elif self.pol is not None:
            object.__setattr__(self, "pol", tuple(float(p) for p in self.pol))

    @property
    def d(self):
        return len(self.theta)

    @property
    def amplitude_vector(self):
        return np.array(self.theta if self.kind == "p" else self.pol)

    def with_omega(self, omega):
        return IncidentWave(self.kind, self.theta, omega, self.pol)


def direction_2d(angle):
    """Unit vector ``(cos a, sin a)``."""
    return (math.cos(angle), math.sin(angle))


def plane_wave_2d(kind, angle, omega):
    """2D plane wave at direction angle ``angle``; s-waves use ``theta_perp``."""
    theta = direction_2d(angle)
    pol = (-theta[1], theta[0]) if kind == "s" else None
    return IncidentWave(kind, theta, omega, pol)


def plane_wave_3d(kind, polar, azimuth, omega, pol_angle=0.0):
    """3D plane wave; the polarization is ``cos(phi) e_polar + sin(phi) e_azimuth``."""
    st, ct = math.sin(polar), math.cos(polar)
    sp, cp = math.sin(azimuth), math.cos(azimuth)
    theta = (st * cp, st * sp, ct)
    pol = None
    if kind == "s":
        e_pol = np.array([ct * cp, ct * sp, -st])
        e_az = np.array([-sp, cp, 0.0])
        pol = tuple(math.cos(pol_angle) * e_pol + math.sin(pol_angle) * e_az)
    return IncidentWave(kind, theta, omega, pol)


def eval_incident(w, params, x):
    """Incident displacement at points ``x`` of shape ``(..., d)``."""
    if abs(params.omega - w.omega) > 1e-12 * w.omega:
        raise WaveError(f"wave frequency {w.omega} differs from params omega {params.omega}")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != w.d:
        raise WaveError(f"points in R^{x.shape[-1]} for a wave in R^{w.d}")
    k = params.k_p if w.kind == "p" else params.k_s
    phase = np.exp(1j * k * (x @ np.asarray(w.theta)))
    return phase[..., None] * w.amplitude_vector


def sample_incident(w, params, grid):
    """Nodal samples of the incident wave as a :class:`NodalVectorField`."""
    vals = eval_incident(w, params, grid.coordinates())
    return NodalVectorField(grid, np.moveaxis(vals, -1, 0))


def experiment2_q(x):
    """Annulus ``0.6 < |x| < 0.8`` plus 1.2 times the diamond ``|x1| + |x2| < 0.2``."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    ring = (r > 0.6) & (r < 0.8)
    diamond = np.abs(x[..., 0]) + np.abs(x[..., 1]) < 0.2
    return ring.astype(float) + 1.2 * diamond


def experiment2_potential(grid):
    """``Q = q I`` with the two-inclusion profile :func:`experiment2_q`, rho = 1."""
    if grid.d != 2:
        raise DomainError("the two-inclusion potential is defined for d = 2 only")
    if not grid.R > 2:
        raise SupportError(f"rho = 1 needs R > 2, got R={grid.R}")
    return Potential.scalar(grid, 1.0, experiment2_q(grid.coordinates()))


def _bump_poly(x):
    # (1 - |x|^2)^4 and its derivatives up to order two, zero outside the unit ball
    x = np.asarray(x, dtype=float)
    s = np.sum(x * x, axis=-1)
    t = np.where(s < 1, 1 - s, 0.0)
    p = t ** 4
    grad = -8 * t[..., None] ** 3 * x
    d = x.shape[-1]
    hess = (-8 * t[..., None, None] ** 3 * np.eye(d)
            + 48 * t[..., None, None] ** 2 * x[..., :, None] * x[..., None, :])
    return p, grad, hess


@dataclass(frozen=True)
class ManufacturedCase:
    """Exact triple for the integral equation with ``Q = I`` on the unit disk."""

    params: object
    grid: object
    Q: Potential
    f: NodalVectorField

    def g(self, x):
        p, _, _ = _bump_poly(x)
        return p[..., None] * np.ones(np.shape(x)[-1])

    def v_exact(self, x):
        return manufactured_v(self.params, x)

    def f_exact(self, x):
        return self.v_exact(x) + self.g(x)


def manufactured_v(params, x):
    """``(Lame + omega^2) g`` for ``g = (1 - |x|^2)_+^4 (1, .., 1)``."""
    p, _, hess = _bump_poly(x)
    d = np.shape(x)[-1]
    c = np.ones(d)
    lap = np.trace(hess, axis1=-2, axis2=-1)
    return (params.mu * lap[..., None] * c + (params.lam + params.mu) * (hess @ c)
            + params.omega ** 2 * p[..., None] * c)


def manufactured_case(params, grid):
    """Potential, right-hand side and exact solution of the smooth-bump test.

    With the outgoing tensor normalized so that ``(Lame + omega^2) Phi = -delta I``,
    convolving ``v = (Lame + omega^2) g`` returns ``-g``; the right-hand side in
    ``v = f + K(Q v)`` is therefore ``f = v + g``.
    """
    if grid.d != 2:
        raise DomainError("the manufactured case is defined for d = 2 only")
    if not grid.R > 2:
        raise SupportError(f"rho = 1 needs R > 2, got R={grid.R}")
    x = grid.coordinates()
    inside = (grid.radii() < 1.0).astype(float)
    Q = Potential.scalar(grid, 1.0, inside)
    case = ManufacturedCase(params, grid, Q, None)
    f = NodalVectorField(grid, np.moveaxis(case.f_exact(x), -1, 0))
    return ManufacturedCase(params, grid, Q, f)


def apply_potential(Q, u):
    """Nodewise ``Q(x) u(x)``."""
    if Q.grid != u.grid:
        raise GridError(f"grid mismatch: {Q.grid} vs {u.grid}")
    return NodalVectorField(u.grid, apply_potential_array(Q.values, u.values))


def apply_potential_array(qvals, uvals):
    return np.einsum("ab...,b...->a...", qvals, uvals)


def load_potential(samples, grid, rho):
    """Validated :class:`Potential` from samples of shape ``(d, d, N, .., N)``.

    Samples shaped ``(N, .., N, d, d)`` (node-major, as stored on disk) are
    accepted too, as is the flat form of that layout.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        if arr.size != grid.n_nodes * grid.d * grid.d:
            raise LayoutError(f"{arr.size} flat samples, expected "
                              f"{grid.n_nodes * grid.d * grid.d}")
        arr = arr.reshape(grid.shape + (grid.d, grid.d))
    node_first = grid.shape + (grid.d, grid.d)
    if arr.shape == node_first and arr.shape != (grid.d, grid.d) + grid.shape:
        arr = np.moveaxis(np.moveaxis(arr, -2, 0), -1, 1)
    if arr.shape != (grid.d, grid.d) + grid.shape:
        raise LayoutError(f"{arr.size} samples with shape {arr.shape} do not match "
                          f"{grid.d}x{grid.d} matrices on {grid.shape} nodes")
    return Potential(grid, float(rho), arr)
