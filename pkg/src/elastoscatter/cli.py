"""Command-line driver: ``elastoscatter <command> --config run.toml``."""

import argparse
import json
import logging
import math
from pathlib import Path
import sys

import numpy as np

from . import __version__
from . import io as sio
from .config import load_config
from .errors import (ConfigError, ConvergenceError, ElastoScatterError, LayoutError,
                     NumericFaultError, SupportError)
from .fields import (Potential, experiment2_potential, load_potential, manufactured_case,
                     plane_wave_2d, plane_wave_3d)
from .grid import build_kernel_spectrum, decay_report, decay_statistic, spectrum_of_kernel
from .scattering import (amplitude_records, directions_2d, observation_angles, sinogram,
                         write_amplitude_csv)
from .solver import convergence_study, solve_scattering

log = logging.getLogger("elastoscatter")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_IO = 0, 1, 2, 3, 4
CSV_FIELD_LIMIT = 128


class _NotConverged(Exception):
    def __init__(self, message, detail):
        super().__init__(message)
        self.detail = detail


def build_potential(cfg, grid):
    if cfg.potential_file is not None:
        path = Path(cfg.potential_file)
        if cfg.source and not path.is_absolute():
            path = Path(cfg.source).parent / path
        try:
            rho, samples = sio.read_potential_samples(path, grid)
        except OSError as exc:
            raise LayoutError(f"cannot read potential {path}: {exc}") from exc
        if abs(rho - cfg.rho) > 1e-12:
            raise ConfigError(f"potential file has rho={rho}, config says {cfg.rho}")
        return load_potential(samples, grid, rho)
    if cfg.potential == "experiment2":
        return experiment2_potential(grid)
    if cfg.potential == "manufactured":
        return manufactured_case(cfg.params(), grid).Q
    return Potential.zero(grid, cfg.rho)


def incident_kinds(cfg):
    return ("s", "p") if cfg.incident_kind == "both" else (cfg.incident_kind,)


def build_incident(cfg, kind, omega):
    th = [a * math.pi for a in cfg.theta]
    if cfg.dimension == 2:
        return plane_wave_2d(kind, th[0], omega)
    return plane_wave_3d(kind, th[0], th[1], omega, cfg.pol * math.pi)


def theta_prime(cfg):
    """Observation directions as unit vectors, shape ``(M, d)``."""
    if cfg.theta_prime is None:
        if cfg.dimension != 2:
            raise ConfigError("3D runs need an explicit outputs.theta_prime list")
        return directions_2d(observation_angles(cfg.theta_prime_count))
    if cfg.dimension == 2:
        return directions_2d(np.array(cfg.theta_prime) * math.pi)
    out = []
    for polar, az in cfg.theta_prime:
        p, a = polar * math.pi, az * math.pi
        out.append((math.sin(p) * math.cos(a), math.sin(p) * math.sin(a), math.cos(p)))
    return np.array(out)


def _single_omega(cfg):
    om = cfg.omega_values()
    if om.size != 1:
        raise ConfigError("this command takes a single 'omega'")
    return float(om[0])


def _inner_block(grid, rho):
    ax = grid.axis()
    sel = np.nonzero(np.abs(ax) <= rho + 1e-12 * grid.h)[0]
    return slice(sel[0], sel[-1] + 1), int(sel[0]) - grid.N // 2


def cmd_solve(cfg, out, args):
    omega = _single_omega(cfg)
    params, grid, cutoff = cfg.params(omega), cfg.grid(), cfg.cutoff()
    Q = build_potential(cfg, grid)
    spec = build_kernel_spectrum(grid, params, cutoff, cfg.origin)
    blk, imin = _inner_block(grid, cfg.rho)
    inner = (slice(None),) + (blk,) * grid.d
    files, runs, bad = [], {}, []
    for kind in incident_kinds(cfg):
        w = build_incident(cfg, kind, omega)
        res = solve_scattering(params, grid, cutoff, Q, w, cfg.solver(), spectrum=spec)
        runs[kind] = {"iterations": res.iterations, "residual": res.final_residual,
                      "converged": res.converged}
        if not res.converged:
            bad.append(kind)
        for name, fld in (("scattered", res.v_h), ("total", res.u_h)):
            base = out / f"{name}_{kind}"
            if "bin" in cfg.formats:
                files += sio.write_field(base, grid, fld.values)
                files += sio.write_field(out / f"{name}_{kind}_inner", grid,
                                         fld.values[inner], [imin] * grid.d, "inner")
            if "csv" in cfg.formats and grid.N <= CSV_FIELD_LIMIT:
                files += sio.write_field_csv(base.with_suffix(".csv"), grid, fld.values)
    _manifest(cfg, out, "solve", files, {"runs": runs})
    if bad:
        raise _NotConverged(f"GMRES did not converge for incidence {bad}", runs)


def cmd_convergence(cfg, out, args):
    if cfg.dimension != 2:
        raise ConfigError("the convergence study is two-dimensional")
    rows = convergence_study(cfg.params(_single_omega(cfg)), cfg.R, cfg.N_list,
                             cfg.solver(), cfg.origin)
    path = out / "convergence.csv"
    with open(path, "w") as fh:
        fh.write("N,h,linf,l2,order_linf,order_l2,iterations,converged\n")
        for r in rows:
            vals = [r.N, repr(r.h), repr(r.linf), repr(r.l2),
                    "" if r.order_linf is None else repr(r.order_linf),
                    "" if r.order_l2 is None else repr(r.order_l2),
                    r.iterations, int(r.converged)]
            fh.write(",".join(str(v) for v in vals) + "\n")
    _manifest(cfg, out, "convergence", [path], {})
    bad = [r.N for r in rows if not r.converged]
    if bad:
        raise _NotConverged(f"rows N={bad} failed or did not converge",
                            {r.N: r.message for r in rows if not r.converged})


def cmd_sinogram(cfg, out, args):
    if cfg.dimension != 2:
        raise ConfigError("sinograms are produced for dimension 2")
    grid, cutoff = cfg.grid(), cfg.cutoff()
    Q = build_potential(cfg, grid)
    omegas = cfg.omega_values()
    tp = theta_prime(cfg)
    files = sio.write_vector_csv(out / "omega.csv", "omega", omegas)
    files += sio.write_vector_csv(out / "theta_prime.csv", "theta_prime",
                                  np.mod(np.arctan2(tp[:, 1], tp[:, 0]), 2 * math.pi))
    selectors = {"s": cfg.selector("s"), "p": cfg.selector("p")}
    info, failures = {}, {}
    for kind in incident_kinds(cfg):
        inc = build_incident(cfg, kind, float(omegas[0]))
        sinos = sinogram(cfg.params(float(omegas[0])), grid, cutoff, Q, inc, omegas, tp,
                         cfg.solver(), workers=args.workers or 1, origin=cfg.origin,
                         selectors=selectors)
        for amp, s in sinos.items():
            base = out / f"sinogram_{kind}inc_{amp}amp"
            if "csv" in cfg.formats:
                files += sio.write_matrix_csv(base.with_suffix(".csv"), s.values)
            if "bin" in cfg.formats:
                files += sio.write_matrix_bin(base.with_suffix(".bin"), s.values)
            if "pgm" in cfg.formats:
                lo, hi = sio.write_pgm(base.with_suffix(".pgm"), s.values)
                info[base.name] = {"min": lo, "max": hi, "rows": s.shape[0],
                                   "cols": s.shape[1]}
            failures[kind] = s.failures
    _manifest(cfg, out, "sinogram", files, {"images": info, "failures": failures})
    if any(failures.values()):
        raise _NotConverged("some frequencies failed", failures)


def cmd_amplitude(cfg, out, args):
    grid, cutoff = cfg.grid(), cfg.cutoff()
    Q = build_potential(cfg, grid)
    tp = theta_prime(cfg)
    records, bad = [], []
    for omega in cfg.omega_values():
        params = cfg.params(float(omega))
        spec = build_kernel_spectrum(grid, params, cutoff, cfg.origin)
        for kind in incident_kinds(cfg):
            w = build_incident(cfg, kind, float(omega))
            res = solve_scattering(params, grid, cutoff, Q, w, cfg.solver(), spectrum=spec)
            if not res.converged:
                bad.append({"omega": float(omega), "kind": kind,
                            "residual": res.final_residual})
                continue
            records += amplitude_records(params, Q, res.u_h, w, tp)
    path = out / "amplitudes.csv"
    with open(path, "w", newline="") as fh:
        write_amplitude_csv(records, fh)
    _manifest(cfg, out, "amplitude", [path], {"failures": bad})
    if bad:
        raise _NotConverged("some solves did not converge", bad)


def cmd_kernel_decay(cfg, out, args):
    grid = cfg.grid()
    params = cfg.params(_single_omega(cfg))
    if cfg.kernel == "gaussian":
        d = grid.d
        spec = spectrum_of_kernel(
            grid, lambda x: np.exp(-np.sum(x * x, axis=-1))[..., None, None] * np.eye(d))
    else:
        spec = build_kernel_spectrum(grid, params, cfg.cutoff(), cfg.origin)
    bands = decay_report(spec)
    path = out / "decay.csv"
    with open(path, "w") as fh:
        fh.write("k,lower,upper,count,max_abs,ratio\n")
        for b in bands:
            fh.write(f"{b.k},{b.lower!r},{b.upper!r},{b.count},{b.max_abs!r},{b.ratio!r}\n")
    _manifest(cfg, out, "kernel-decay", [path],
              {"statistic": decay_statistic(spec), "bands": len(bands)})


COMMANDS = {
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "sinogram": cmd_sinogram,
    "amplitude": cmd_amplitude,
    "kernel-decay": cmd_kernel_decay,
}


def _manifest(cfg, out, command, files, extra):
    payload = {"command": command, "version": __version__, "config": cfg.canonical()}
    payload.update(extra)
    sio.write_manifest(out, payload, files)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", required=True, help="TOML run configuration")
    common.add_argument("-o", "--output", help="output directory (overrides the config)")
    common.add_argument("-w", "--workers", type=int, help="worker threads")
    common.add_argument("-v", "--verbose", action="count", default=0)
    parser = argparse.ArgumentParser(prog="elastoscatter",
                                     description="Elastic scattering by trigonometric "
                                                 "collocation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _fail(code, kind, message, detail=None):
    doc = {"error": kind, "message": str(message), "exit_code": code}
    if detail is not None:
        doc["detail"] = detail
    sys.stderr.write(json.dumps(doc, default=str) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][
        min(args.verbose, 2)], format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be at least 1")
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "ConfigError", exc)
    out = Path(args.output or cfg.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "ConfigError", exc)
    except _NotConverged as exc:
        return _fail(EXIT_NONCONVERGED, "ConvergenceError", exc, exc.detail)
    except (ConvergenceError, NumericFaultError) as exc:
        return _fail(EXIT_NONCONVERGED, type(exc).__name__, exc)
    except (OSError, LayoutError, SupportError) as exc:
        return _fail(EXIT_IO, type(exc).__name__, exc)
    except ElastoScatterError as exc:
        return _fail(EXIT_FAILURE, type(exc).__name__, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
