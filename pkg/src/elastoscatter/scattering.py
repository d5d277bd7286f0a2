"""Far-field scattering amplitudes and frequency-angle sinograms."""

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .errors import DomainError, GridError
from .fields import IncidentWave
from .grid import DEFAULT_ORIGIN, build_kernel_spectrum
from .solver import SolverConfig, solve_scattering

log = logging.getLogger(__name__)


@dataclass
class AmplitudeRecord:
    """Longitudinal and transverse amplitudes for one observation direction."""

    omega: float
    incident: IncidentWave
    theta_prime: np.ndarray
    v_p_inf: np.ndarray
    v_s_inf: np.ndarray

    def __post_init__(self):
        self.theta_prime = np.asarray(self.theta_prime, dtype=float)
        self.v_p_inf = np.asarray(self.v_p_inf, dtype=complex)
        self.v_s_inf = np.asarray(self.v_s_inf, dtype=complex)

    @property
    def d(self):
        return self.theta_prime.size


def _unit_directions(theta_prime, d):
    t = np.atleast_2d(np.asarray(theta_prime, dtype=float))
    if t.shape[-1] != d:
        raise DomainError(f"observation directions must lie in R^{d}")
    if np.any(np.abs(np.linalg.norm(t, axis=-1) - 1) > 1e-12):
        raise DomainError("observation directions must be unit vectors")
    return t


def _project_out(w, t):
    # two passes keep  w . t  at roundoff relative to the result
    for _ in range(2):
        w = w - np.sum(w * t, axis=-1, keepdims=True) * t
    return w


def far_field(params, Q, u_h, theta_prime):
    """Discrete longitudinal and transverse amplitudes of the total field ``u_h``.

    ``v_p = h^d/(2 mu + lam) sum_j exp(-i k_p t.x_j) ((Q u)(x_j).t) t`` and
    ``v_s = h^d/mu sum_j exp(-i k_s t.x_j) [(Q u) - ((Q u).t) t](x_j)``,
    summed over the support of Q.  ``theta_prime`` is one unit vector or an
    array of them; the returned arrays match its leading shape.
    """
    grid = Q.grid
    if u_h.grid != grid:
        raise GridError("u_h and Q live on different grids")
    single = np.ndim(theta_prime) == 1
    t = _unit_directions(theta_prime, grid.d)
    mask = Q.support
    y = grid.coordinates()[mask]
    qu = np.einsum("abs,bs->sa", Q.values[(slice(None), slice(None), mask)],
                   u_h.values[(slice(None), mask)])            # (S, d)
    hd = grid.h ** grid.d
    ty = t @ y.T                                               # (T, S)
    wp = np.exp(-1j * params.k_p * ty) @ qu                    # (T, d)
    ws = np.exp(-1j * params.k_s * ty) @ qu
    vp = (hd / (2 * params.mu + params.lam)) * np.sum(wp * t, axis=-1, keepdims=True) * t
    vs = (hd / params.mu) * _project_out(ws, t)
    if single:
        return vp[0], vs[0]
    return vp, vs


def far_field_naive(params, Q, u_h, theta_prime):
    """Term-by-term loop over every node; reference for :func:`far_field`."""
    grid = Q.grid
    t = np.asarray(theta_prime, dtype=float)
    vp = np.zeros(grid.d, dtype=complex)
    vs = np.zeros(grid.d, dtype=complex)
    x = grid.coordinates()
    for off in np.ndindex(*grid.shape):
        q = Q.values[(slice(None), slice(None)) + off]
        u = u_h.values[(slice(None),) + off]
        qu = q @ u
        xt = float(np.dot(t, x[off]))
        along = np.dot(qu, t)
        vp += np.exp(-1j * params.k_p * xt) * along * t
        vs += np.exp(-1j * params.k_s * xt) * (qu - along * t)
    hd = grid.h ** grid.d
    return hd * vp / (2 * params.mu + params.lam), hd * vs / params.mu


def observation_angles(count):
    """``count`` uniform angles in ``[0, 2 pi)``."""
    return 2 * np.pi * np.arange(count) / count


def directions_2d(angles):
    a = np.asarray(angles, dtype=float)
    return np.stack([np.cos(a), np.sin(a)], axis=-1)


def directions_3d(n_lon, n_colat):
    """Longitude x colatitude product grid of unit vectors, cell-centred in colatitude."""
    lon = 2 * np.pi * np.arange(n_lon) / n_lon
    colat = np.pi * (np.arange(n_colat) + 0.5) / n_colat
    L, C = np.meshgrid(lon, colat, indexing="ij")
    return np.stack([np.sin(C) * np.cos(L), np.sin(C) * np.sin(L), np.cos(C)],
                    axis=-1).reshape(-1, 3)


@dataclass(frozen=True)
class Selector:
    """Which scalar to extract from a pair of amplitude vectors.

    ``component`` is an axis index, ``'norm'``, ``'radial'`` (along theta') or
    ``'tangential'`` (along the rotated theta', d = 2 only).
    """

    amplitude: str = "s"
    part: str = "re"
    component: object = "tangential"

    def __post_init__(self):
        if self.amplitude not in ("p", "s"):
            raise ValueError(f"amplitude must be 'p' or 's', got {self.amplitude!r}")
        if self.part not in ("re", "im", "abs"):
            raise ValueError(f"part must be 're', 'im' or 'abs', got {self.part!r}")
        if not (isinstance(self.component, int)
                or self.component in ("norm", "radial", "tangential")):
            raise ValueError(f"bad component {self.component!r}")

    @classmethod
    def default_for(cls, amplitude):
        """Real part of the component along the amplitude's own polarization."""
        return cls(amplitude, "re", "radial" if amplitude == "p" else "tangential")

    def __call__(self, vp, vs, t):
        v = vp if self.amplitude == "p" else vs
        if self.component == "norm":
            if self.part != "abs":
                raise ValueError("component 'norm' requires part 'abs'")
            return np.linalg.norm(v, axis=-1)
        if self.component == "radial":
            c = np.sum(v * t, axis=-1)
        elif self.component == "tangential":
            if t.shape[-1] != 2:
                raise ValueError("'tangential' needs d = 2")
            c = -v[..., 0] * t[..., 1] + v[..., 1] * t[..., 0]
        else:
            c = v[..., self.component]
        return {"re": np.real, "im": np.imag, "abs": np.abs}[self.part](c)


@dataclass
class Sinogram:
    """Selected amplitude values, rows indexed by omega, columns by theta'."""

    omega_grid: np.ndarray
    theta_prime: np.ndarray
    values: np.ndarray
    selector: Selector
    failures: list = field(default_factory=list)
    records: dict = field(default_factory=dict, repr=False)

    @property
    def shape(self):
        return self.values.shape


def _sinogram_row(params, grid, cutoff, Q, incident, omega, t, config, origin):
    p = params.with_omega(omega)
    w = incident.with_omega(omega)
    spec = build_kernel_spectrum(grid, p, cutoff, origin)
    res = solve_scattering(p, grid, cutoff, Q, w, config, spectrum=spec)
    vp, vs = far_field(p, Q, res.u_h, t)
    return res, vp, vs


def sinogram(params, grid, cutoff, Q, incident, omega_grid, theta_prime, config=SolverConfig(),
             selector=None, workers=1, origin=DEFAULT_ORIGIN, keep_amplitudes=False,
             selectors=None):
    """Amplitude sinogram over ``omega_grid`` x ``theta_prime``.

    Each frequency rebuilds the spectrum and re-solves; frequencies may run on
    ``workers`` threads.  Rows whose solve fails or does not converge are NaN
    and listed in ``failures``.  ``selectors`` (a dict name -> Selector)
    returns several sinograms from the same solves.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.ndim != 1 or np.any(omega_grid <= 0):
        raise DomainError("omega_grid must be a 1D array of positive frequencies")
    if np.any(np.diff(omega_grid) <= 0):
        raise DomainError("omega_grid must be increasing")
    t = _unit_directions(theta_prime, grid.d)
    if selectors is None:
        selectors = {"value": selector or Selector.default_for("s")}
    values = {k: np.full((omega_grid.size, t.shape[0]), np.nan) for k in selectors}
    failures = []
    amps = {}

    def run(i):
        try:
            return i, _sinogram_row(params, grid, cutoff, Q, incident, omega_grid[i], t,
                                    config, origin), None
        except Exception as exc:
            return i, None, f"{type(exc).__name__}: {exc}"

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(omega_grid.size)))
    else:
        results = [run(i) for i in range(omega_grid.size)]
    for i, out, err in results:
        omega = float(omega_grid[i])
        if out is None:
            failures.append({"row": i, "omega": omega, "reason": err})
            continue
        res, vp, vs = out
        if not res.converged:
            failures.append({"row": i, "omega": omega, "reason": "not converged",
                             "residual": res.final_residual,
                             "iterations": res.iterations})
            continue
        for k, sel in selectors.items():
            values[k][i] = sel(vp, vs, t)
        if keep_amplitudes:
            amps[i] = (vp, vs)
    out = {k: Sinogram(omega_grid, t, values[k], selectors[k], list(failures), amps)
           for k in selectors}
    return out if len(out) > 1 or "value" not in out else out["value"]




def _angles(v):
    v = np.asarray(v, dtype=float)
    if v.size == 2:
        return [math.atan2(v[1], v[0])]
    polar = math.acos(max(-1.0, min(1.0, v[2])))
    return [polar, math.atan2(v[1], v[0])]


def amplitude_header(d):
    axes = "xyz"[:d]
    head = ["omega", "kind"]
    head += [f"theta_{a}" for a in axes] + [f"pol_{a}" for a in axes]
    head += [f"theta_prime_{a}" for a in axes]
    head += [f"theta_prime_angle_{i}" for i in range(d - 1)]
    for amp in ("vp", "vs"):
        for a in axes:
            head += [f"{amp}_{a}_re", f"{amp}_{a}_im"]
    return head


def amplitude_table(records):
    """Flat rows (header first) for a list of :class:`AmplitudeRecord`."""
    dims = {r.d for r in records}
    if len(dims) > 1:
        raise DomainError(f"records mix dimensions {sorted(dims)}")
    d = dims.pop() if dims else 2
    rows = [amplitude_header(d)]
    for r in records:
        pol = r.incident.pol if r.incident.pol is not None else (math.nan,) * d
        row = [r.omega, r.incident.kind, *r.incident.theta, *pol, *r.theta_prime,
               *_angles(r.theta_prime)]
        for v in (r.v_p_inf, r.v_s_inf):
            for c in v:
                row += [c.real, c.imag]
        rows.append(row)
    return rows


def write_amplitude_csv(records, fh):
    writer = csv.writer(fh, lineterminator="\n")
    for row in amplitude_table(records):
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x
                         for x in row])


def read_amplitude_csv(fh):
    """Inverse of :func:`write_amplitude_csv`."""
    reader = csv.reader(fh)
    header = next(reader)
    d = sum(1 for h in header if h.startswith("theta_prime_") and "angle" not in h)
    out = []
    for row in reader:
        vals = dict(zip(header, row))
        axes = "xyz"[:d]
        theta = tuple(float(vals[f"theta_{a}"]) for a in axes)
        pol = tuple(float(vals[f"pol_{a}"]) for a in axes)
        kind = vals["kind"]
        inc = IncidentWave(kind, theta, float(vals["omega"]),
                           pol if kind == "s" else None)
        tp = [float(vals[f"theta_prime_{a}"]) for a in axes]
        vp = [complex(float(vals[f"vp_{a}_re"]), float(vals[f"vp_{a}_im"])) for a in axes]
        vs = [complex(float(vals[f"vs_{a}_re"]), float(vals[f"vs_{a}_im"])) for a in axes]
        out.append(AmplitudeRecord(float(vals["omega"]), inc, tp, vp, vs))
    return out


def amplitude_records(params, Q, u_h, incident, theta_prime):
    """:class:`AmplitudeRecord` per observation direction."""
    t = _unit_directions(theta_prime, Q.grid.d)
    vp, vs = far_field(params, Q, u_h, t)
    return [AmplitudeRecord(params.omega, incident, t[i], vp[i], vs[i])
            for i in range(t.shape[0])]
