"""Matrix-free collocation system, its iterative solution, exterior evaluation
and the manufactured-solution convergence study."""

from dataclasses import dataclass, field
import logging
import math
import threading

import numpy as np
import scipy.sparse.linalg as spla

from .errors import DomainError, GridError, NumericFaultError, WaveError
from .fields import (ManufacturedCase, Potential, apply_potential_array, eval_incident,
                     manufactured_case, sample_incident)
from .green import CutoffSpec, green_tensor_field
from .grid import (DEFAULT_ORIGIN, NodalVectorField, build_grid, build_kernel_spectrum,
                   convolve_array)

log = logging.getLogger(__name__)

DENSE_LIMIT = 4096


@dataclass(frozen=True)
class SolverConfig:
    """Restarted GMRES settings; ``tol`` is the relative residual target."""

    tol: float = 1e-8
    restart: int = 30
    max_iterations: int = 500

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise ValueError(f"tol must lie in (0, 1), got {self.tol}")
        if int(self.restart) < 1 or int(self.max_iterations) < 1:
            raise ValueError("restart and max_iterations must be positive")


@dataclass
class IterativeResult:
    x: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    history: list = field(default_factory=list)
    info: int = 0


@dataclass
class SolveResult:
    v_h: NodalVectorField
    u_h: NodalVectorField
    iterations: int
    final_residual: float
    converged: bool
    history: list = field(default_factory=list)
    rhs: NodalVectorField = None


def _check_grids(spectrum, Q, *fields):
    for obj in (Q,) + fields:
        if obj.grid != spectrum.grid:
            raise GridError(f"grid mismatch: {obj.grid} vs {spectrum.grid}")


def apply_system_array(spectrum, qvals, vals):
    return vals - convolve_array(spectrum, apply_potential_array(qvals, vals))


def apply_system(spectrum, Q, v):
    """``v - K(Q v)`` where ``K`` is the periodized convolution."""
    _check_grids(spectrum, Q, v)
    return NodalVectorField(v.grid, apply_system_array(spectrum, Q.values, v.values))


def build_rhs(spectrum, Q, w, params=None):
    """``K(Q u_i)`` sampled at the nodes."""
    params = spectrum.params if params is None else params
    if params != spectrum.params:
        raise WaveError("params differ from those of the kernel spectrum")
    _check_grids(spectrum, Q)
    ui = sample_incident(w, params, spectrum.grid)
    vals = convolve_array(spectrum, apply_potential_array(Q.values, ui.values))
    return NodalVectorField(spectrum.grid, vals)


def iterative_solve(apply, rhs, config=SolverConfig()):
    """Restarted GMRES for ``apply(x) = rhs`` on flat complex vectors.

    Breakdown or stagnation is reported through ``converged=False``; an
    operator producing non-finite values raises :class:`NumericFaultError`.
    """
    b = np.asarray(rhs, dtype=complex).ravel()
    n = b.size
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return IterativeResult(np.zeros(n, dtype=complex), 0, 0.0, True)

    def matvec(x):
        # copy: gmres work vectors must not alias the operator's input
        y = np.array(apply(x), dtype=complex).ravel()
        if not np.all(np.isfinite(y)):
            raise NumericFaultError("operator returned non-finite values")
        return y

    history = []
    op = spla.LinearOperator((n, n), matvec=matvec, dtype=complex)
    restart = min(int(config.restart), n)
    cycles = max(1, math.ceil(int(config.max_iterations) / restart))
    try:
        x, info = spla.gmres(op, b, rtol=config.tol, atol=0.0, restart=restart,
                             maxiter=cycles, callback=history.append,
                             callback_type="pr_norm")
    except NumericFaultError:
        raise
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        log.warning("GMRES breakdown: %s", exc)
        return IterativeResult(np.zeros(n, dtype=complex), len(history), 1.0, False,
                               history, info=-1)
    res = float(np.linalg.norm(b - matvec(x)) / bnorm)
    converged = res <= config.tol
    if not converged:
        log.warning("GMRES stopped at relative residual %.3e after %d iterations",
                    res, len(history))
    return IterativeResult(x, len(history), res, converged, history, info)


def solve_system(spectrum, Q, f, config=SolverConfig()):
    """Solve ``v - K(Q v) = f`` for the nodal field ``v``."""
    _check_grids(spectrum, Q, f)
    shape = f.values.shape
    qv = Q.values
    if not np.any(qv):
        # the system is the identity
        return (NodalVectorField(f.grid, f.values.copy()),
                IterativeResult(f.values.ravel().copy(), 0, 0.0, True))
    res = iterative_solve(lambda x: apply_system_array(spectrum, qv, x.reshape(shape)),
                          f.values, config)
    v = NodalVectorField(f.grid, res.x.reshape(shape))
    return v, res


class SpectrumCache:
    """Thread-safe cache of kernel spectra keyed by grid, material and cutoff."""

    def __init__(self, maxsize=8):
        self.maxsize = maxsize
        self._data = {}
        self._lock = threading.Lock()

    def get(self, grid, params, cutoff, origin=DEFAULT_ORIGIN):
        key = (grid.d, grid.R, grid.N, params.lam, params.mu, params.omega,
               cutoff.rho, origin)
        with self._lock:
            hit = self._data.get(key)
        if hit is not None:
            return hit
        spec = build_kernel_spectrum(grid, params, cutoff, origin)
        with self._lock:
            if len(self._data) >= self.maxsize:
                self._data.pop(next(iter(self._data)))
            self._data[key] = spec
        return spec

    def clear(self):
        with self._lock:
            self._data.clear()


default_cache = SpectrumCache()


def solve_scattering(params, grid, cutoff, Q, w, config=SolverConfig(), *,
                     spectrum=None, cache=default_cache, origin=DEFAULT_ORIGIN):
    """Scattered and total field for the incident wave ``w``."""
    if spectrum is None:
        spectrum = cache.get(grid, params, cutoff, origin) if cache is not None \
            else build_kernel_spectrum(grid, params, cutoff, origin)
    f = build_rhs(spectrum, Q, w, params)
    v, res = solve_system(spectrum, Q, f, config)
    ui = sample_incident(w, params, grid)
    u = NodalVectorField(grid, ui.values + v.values)
    return SolveResult(v, u, res.iterations, res.final_residual, res.converged,
                       res.history, f)


def _support_nodes(Q):
    mask = Q.support
    grid = Q.grid
    y = grid.coordinates()[mask]                              # (S, d)
    q = np.moveaxis(Q.values[(slice(None), slice(None), mask)], -1, 0)   # (S, d, d)
    return mask, y, q


def evaluate_exterior(points, params, Q, v_h, w=None, f=None, chunk=64):
    """Scattered field at points outside the support by the trapezoidal rule.

    ``v(x) = f(x) + h^d sum_j Phi(x - jh) Q(jh) v_h(jh)``.  The source term is
    the same quadrature applied to ``Q u_i`` when the incident wave ``w`` is
    given, otherwise ``f(x)`` from the callable ``f`` (zero if neither).
    """
    grid = Q.grid
    if v_h.grid != grid:
        raise GridError("v_h and Q live on different grids")
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[-1] != grid.d:
        raise DomainError(f"points must lie in R^{grid.d}")
    r = np.linalg.norm(x, axis=-1)
    if np.any(r <= Q.rho):
        raise DomainError(f"exterior points need |x| > rho = {Q.rho}")
    mask, y, q = _support_nodes(Q)
    out = np.zeros(x.shape, dtype=complex)
    if y.shape[0] == 0:
        if f is not None:
            out += np.asarray(f(x), dtype=complex)
        return out
    dens = v_h.values[(slice(None), mask)].T                  # (S, d)
    if w is not None:
        dens = dens + eval_incident(w, params, y)
    src = np.einsum("sab,sb->sa", q, dens)                    # (S, d)
    hd = grid.h ** grid.d
    for start in range(0, x.shape[0], chunk):
        xs = x[start:start + chunk]
        phi = green_tensor_field(xs[:, None, :] - y[None, :, :], params)  # (P, S, d, d)
        out[start:start + chunk] = hd * np.einsum("psab,sb->pa", phi, src)
    if f is not None and w is None:
        out += np.asarray(f(x), dtype=complex)
    return out


@dataclass
class ConvergenceRow:
    N: int
    h: float
    linf: float
    l2: float
    order_linf: float = None
    order_l2: float = None
    iterations: int = 0
    converged: bool = True
    failed: bool = False
    message: str = ""


def manufactured_errors(case, v_h):
    """L-infinity and discrete L2 errors against the exact field on ``|x| <= rho``."""
    grid = case.grid
    inside = grid.radii() <= case.Q.rho
    exact = np.moveaxis(case.v_exact(grid.coordinates()), -1, 0)
    err = np.abs(v_h.values - exact)[(slice(None), inside)]
    linf = float(np.max(np.linalg.norm(err, axis=0)))
    l2 = float(math.sqrt(grid.h ** grid.d * np.sum(err ** 2)))
    return linf, l2


def convergence_study(params, R, N_list, config=SolverConfig(), origin=DEFAULT_ORIGIN,
                      potential_scale=1.0):
    """Errors of the manufactured case over a list of grid sizes.

    ``potential_scale=0`` replaces Q by zero with a right-hand side equal to
    the exact field, which the solver must reproduce exactly.
    """
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly increasing")
    cutoff = CutoffSpec(1.0, R)
    rows = []
    for N in N_list:
        grid = build_grid(2, R, N)
        try:
            case = manufactured_case(params, grid)
            if potential_scale != 1.0:
                Q = Potential(grid, 1.0, potential_scale * case.Q.values)
                f = case.f
                if potential_scale == 0.0:
                    exact = np.moveaxis(case.v_exact(grid.coordinates()), -1, 0)
                    f = NodalVectorField(grid, exact)
                case = ManufacturedCase(params, grid, Q, f)
            spec = build_kernel_spectrum(grid, params, cutoff, origin)
            v, res = solve_system(spec, case.Q, case.f, config)
            linf, l2 = manufactured_errors(case, v)
            rows.append(ConvergenceRow(N, grid.h, linf, l2, iterations=res.iterations,
                                       converged=res.converged))
        except Exception as exc:   # recorded per row
            log.error("convergence row N=%d failed: %s", N, exc)
            rows.append(ConvergenceRow(N, grid.h, math.nan, math.nan, failed=True,
                                       converged=False, message=str(exc)))
    for prev, row in zip(rows, rows[1:]):
        ratio = math.log(prev.h / row.h)
        if prev.linf > 0 and row.linf > 0:
            row.order_linf = math.log(prev.linf / row.linf) / ratio
        if prev.l2 > 0 and row.l2 > 0:
            row.order_l2 = math.log(prev.l2 / row.l2) / ratio
    return rows


def _centered_dft_matrix(N):
    j = np.arange(-N // 2, N // 2)
    return np.exp(-2j * np.pi * np.outer(j, j) / N)


def dense_assemble(spectrum, Q):
    """Explicit collocation matrix ``I - F^-1 K F diag(Q)`` for small grids.

    The DFT is built as a Kronecker product of centered 1D DFT matrices and the
    multipliers are arranged block-diagonally, independent of the FFT path.
    Unknowns are ordered component-major, then nodes in centered layout.
    """
    grid = spectrum.grid
    d, M = grid.d, grid.n_nodes
    n = d * M
    if n > DENSE_LIMIT:
        raise GridError(f"dense assembly limited to {DENSE_LIMIT} unknowns, got {n}")
    F1 = _centered_dft_matrix(grid.N)
    F = F1
    for _ in range(d - 1):
        F = np.kron(F, F1)
    Finv = F.conj().T / M
    mult = spectrum.centered().reshape(d, d, M)
    KF = np.zeros((n, n), dtype=complex)
    for a in range(d):
        for b in range(d):
            KF[a * M:(a + 1) * M, b * M:(b + 1) * M] = Finv @ (mult[a, b][:, None] * F)
    Qd = np.zeros((n, n))
    qv = Q.values.reshape(d, d, M)
    for a in range(d):
        for b in range(d):
            Qd[a * M:(a + 1) * M, b * M:(b + 1) * M] = np.diag(qv[a, b])
    return np.eye(n) - KF @ Qd
