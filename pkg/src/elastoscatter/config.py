"""TOML run configuration for the command line.

Angles are given in units of pi.  Unknown keys are rejected so that typos
surface as configuration errors instead of silently using defaults.

Example::

    dimension = 2
    omega = 50.0

    [material]
    lambda = 1.0
    mu = 4.0

    [geometry]
    rho = 1.0
    R = 2.5
    N = 256

    [potential]
    builtin = "experiment2"

    [incident]
    kind = "s"
    theta = 0.0
"""

from dataclasses import asdict, dataclass, field
import math

try:
    import tomllib
except ModuleNotFoundError:   # Python < 3.11
    import tomli as tomllib

import numpy as np

from .errors import ConfigError, ElastoScatterError
from .green import CutoffSpec, LameParams
from .grid import ORIGIN_RULES, DEFAULT_ORIGIN, build_grid
from .scattering import Selector
from .solver import SolverConfig

_TOP = {"dimension", "omega", "omega_grid", "material", "geometry", "potential",
        "incident", "solver", "outputs", "kernel_decay"}
_SECTIONS = {
    "omega_grid": {"min", "max", "count"},
    "material": {"lambda", "mu"},
    "geometry": {"rho", "R", "N", "N_list"},
    "potential": {"builtin", "file"},
    "incident": {"kind", "theta", "pol"},
    "solver": {"tol", "restart", "max_iterations", "origin"},
    "outputs": {"directory", "formats", "theta_prime_count", "theta_prime", "selector"},
    "kernel_decay": {"kernel"},
}
BUILTIN_POTENTIALS = ("experiment2", "manufactured", "zero")
FORMATS = ("bin", "csv", "pgm")


@dataclass
class RunConfig:
    dimension: int
    lam: float
    mu: float
    omega: float = None
    omega_grid: tuple = None          # (min, max, count)
    rho: float = 1.0
    R: float = 2.5
    N: int = 512
    N_list: tuple = (40, 80, 160, 320)
    potential: str = None             # None: experiment2 in 2D, zero in 3D
    potential_file: str = None
    incident_kind: str = "s"
    theta: tuple = (0.0,)             # units of pi
    pol: float = 0.0                  # units of pi, 3D s-waves
    tol: float = 1e-8
    restart: int = 30
    max_iterations: int = 500
    origin: str = DEFAULT_ORIGIN
    directory: str = "out"
    formats: tuple = FORMATS
    theta_prime_count: int = 256
    theta_prime: tuple = None
    selector_part: str = "re"
    selector_component: object = "default"
    kernel: str = "lame"
    source: str = field(default=None, compare=False)

    def params(self, omega=None):
        om = self.omega if omega is None else omega
        if om is None:
            om = self.omega_values()[0]
        return LameParams(self.lam, self.mu, om)

    def grid(self, N=None):
        return build_grid(self.dimension, self.R, self.N if N is None else N)

    def cutoff(self):
        return CutoffSpec(self.rho, self.R)

    def solver(self):
        return SolverConfig(self.tol, self.restart, self.max_iterations)

    def omega_values(self):
        if self.omega_grid is not None:
            lo, hi, n = self.omega_grid
            return np.linspace(lo, hi, n)
        return np.array([self.omega])

    def selector(self, amplitude):
        if self.selector_component == "default":
            return Selector(amplitude, self.selector_part,
                            Selector.default_for(amplitude).component)
        return Selector(amplitude, self.selector_part, self.selector_component)

    def canonical(self):
        """Plain-dict form with every default filled in, for manifests."""
        d = asdict(self)
        d.pop("source")
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _check_keys(table, allowed, where):
    if not isinstance(table, dict):
        raise ConfigError(f"{where} must be a table")
    extra = sorted(set(table) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _num(v, name, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number, got {v!r}")
    if integer and not isinstance(v, int):
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    if not math.isfinite(v) or (positive and v <= 0):
        raise ConfigError(f"{name} must be {'positive and ' if positive else ''}finite, got {v!r}")
    return v


def parse_config(doc, source=None):
    """Validated :class:`RunConfig` from a parsed TOML document."""
    _check_keys(doc, _TOP, "top level")
    for name, keys in _SECTIONS.items():
        if name in doc:
            _check_keys(doc[name], keys, f"[{name}]")
    if "dimension" not in doc:
        raise ConfigError("missing 'dimension'")
    d = _num(doc["dimension"], "dimension", integer=True)
    if d not in (2, 3):
        raise ConfigError(f"dimension must be 2 or 3, got {d}")
    mat = doc.get("material")
    if mat is None or "lambda" not in mat or "mu" not in mat:
        raise ConfigError("[material] needs 'lambda' and 'mu'")
    kw = dict(dimension=d, lam=_num(mat["lambda"], "lambda"),
              mu=_num(mat["mu"], "mu", positive=True), source=source)

    if "omega" in doc and "omega_grid" in doc:
        raise ConfigError("give either 'omega' or [omega_grid], not both")
    if "omega" in doc:
        kw["omega"] = _num(doc["omega"], "omega", positive=True)
    elif "omega_grid" in doc:
        g = doc["omega_grid"]
        try:
            lo, hi, n = g["min"], g["max"], g["count"]
        except KeyError as exc:
            raise ConfigError(f"[omega_grid] missing {exc.args[0]!r}") from None
        lo = _num(lo, "omega_grid.min", positive=True)
        hi = _num(hi, "omega_grid.max", positive=True)
        n = _num(n, "omega_grid.count", positive=True, integer=True)
        if hi < lo or (n > 1 and hi == lo):
            raise ConfigError("omega_grid needs min < max")
        kw["omega_grid"] = (float(lo), float(hi), n)
    else:
        kw["omega"] = 1.0

    geo = doc.get("geometry", {})
    for key in ("rho", "R"):
        if key in geo:
            kw[key] = float(_num(geo[key], f"geometry.{key}", positive=True))
    if "N" in geo:
        kw["N"] = _num(geo["N"], "geometry.N", integer=True)
    if "N_list" in geo:
        if not isinstance(geo["N_list"], list) or not geo["N_list"]:
            raise ConfigError("geometry.N_list must be a non-empty list")
        kw["N_list"] = tuple(_num(n, "geometry.N_list entry", integer=True)
                             for n in geo["N_list"])

    pot = doc.get("potential", {})
    if "builtin" in pot and "file" in pot:
        raise ConfigError("[potential] takes 'builtin' or 'file', not both")
    if "file" in pot:
        kw["potential"] = None
        kw["potential_file"] = str(pot["file"])
    elif "builtin" in pot:
        if pot["builtin"] not in BUILTIN_POTENTIALS:
            raise ConfigError(f"potential.builtin must be one of {BUILTIN_POTENTIALS}")
        kw["potential"] = pot["builtin"]

    inc = doc.get("incident", {})
    if "kind" in inc:
        if inc["kind"] not in ("p", "s", "both"):
            raise ConfigError("incident.kind must be 'p', 's' or 'both'")
        kw["incident_kind"] = inc["kind"]
    if "theta" in inc:
        th = inc["theta"]
        th = [th] if not isinstance(th, list) else th
        th = tuple(float(_num(t, "incident.theta")) for t in th)
        if len(th) != d - 1:
            raise ConfigError(f"incident.theta needs {d - 1} angle(s) in dimension {d}")
        kw["theta"] = th
    elif d == 3:
        kw["theta"] = (0.5, 0.0)
    if "pol" in inc:
        kw["pol"] = float(_num(inc["pol"], "incident.pol"))

    sol = doc.get("solver", {})
    if "tol" in sol:
        kw["tol"] = float(_num(sol["tol"], "solver.tol", positive=True))
    for key in ("restart", "max_iterations"):
        if key in sol:
            kw[key] = _num(sol[key], f"solver.{key}", positive=True, integer=True)
    if "origin" in sol:
        if sol["origin"] not in ORIGIN_RULES:
            raise ConfigError(f"solver.origin must be one of {ORIGIN_RULES}")
        kw["origin"] = sol["origin"]

    out = doc.get("outputs", {})
    if "directory" in out:
        kw["directory"] = str(out["directory"])
    if "formats" in out:
        fm = out["formats"]
        if not isinstance(fm, list) or any(f not in FORMATS for f in fm):
            raise ConfigError(f"outputs.formats must be a list drawn from {FORMATS}")
        kw["formats"] = tuple(fm)
    if "theta_prime_count" in out:
        kw["theta_prime_count"] = _num(out["theta_prime_count"],
                                       "outputs.theta_prime_count", positive=True,
                                       integer=True)
    if "theta_prime" in out:
        kw["theta_prime"] = _parse_theta_prime(out["theta_prime"], d)
    if "selector" in out:
        sel = out["selector"]
        _check_keys(sel, {"part", "component"}, "outputs.selector")
        kw["selector_part"] = sel.get("part", "re")
        kw["selector_component"] = sel.get("component", "default")

    kd = doc.get("kernel_decay", {})
    if "kernel" in kd:
        if kd["kernel"] not in ("lame", "gaussian"):
            raise ConfigError("kernel_decay.kernel must be 'lame' or 'gaussian'")
        kw["kernel"] = kd["kernel"]

    if "potential" not in kw:
        kw["potential"] = "experiment2" if d == 2 else "zero"
    cfg = RunConfig(**kw)
    _validate(cfg)
    return cfg


def _parse_theta_prime(v, d):
    if not isinstance(v, list) or not v:
        raise ConfigError("outputs.theta_prime must be a non-empty list")
    if d == 2:
        return tuple(float(_num(a, "outputs.theta_prime entry")) for a in v)
    pairs = []
    for a in v:
        if not isinstance(a, list) or len(a) != 2:
            raise ConfigError("3D outputs.theta_prime entries are [polar, azimuth]")
        pairs.append(tuple(float(_num(x, "outputs.theta_prime angle")) for x in a))
    return tuple(pairs)


def _validate(cfg):
    """Build every derived object once so bad combinations fail early."""
    try:
        for om in cfg.omega_values():
            cfg.params(om)
        cfg.cutoff()
        cfg.grid()
        for n in cfg.N_list:
            cfg.grid(n)
        cfg.solver()
        cfg.selector("p")
        cfg.selector("s")
    except (ElastoScatterError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc
    if cfg.potential == "experiment2" and cfg.dimension != 2:
        raise ConfigError("the experiment2 potential is two-dimensional")
    if cfg.potential == "manufactured" and (cfg.dimension != 2 or cfg.rho != 1.0):
        raise ConfigError("the manufactured potential needs dimension 2 and rho = 1")
    if cfg.potential == "experiment2" and cfg.rho != 1.0:
        raise ConfigError("the experiment2 potential has rho = 1")


def load_config(path):
    """Read and validate a TOML file."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(doc, source=str(path))
