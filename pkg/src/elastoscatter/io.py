"""On-disk artifact formats.

Field files
    ``<name>.bin``: little-endian float64, ``(re, im)`` pairs per component,
    components interleaved per node, nodes in axis-major order over centered
    indices ascending.  ``<name>.hdr``: ``key = value`` text sidecar with
    ``d``, ``N``, ``R``, ``h``, ``components``, ``shape`` and ``index_min``.

Potential files
    ``<name>.bin``: little-endian float64 d x d matrix (row-major) per node in
    the same node order; the sidecar holds ``d``, ``N``, ``R`` and ``rho``.

Sinogram images
    Binary PGM (P5), 16-bit big-endian, linear min-max normalization over the
    finite cells; NaN cells are black.  Row 0 is the largest frequency.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import LayoutError
from .grid import NodalVectorField

HEADER_SUFFIX = ".hdr"


def write_header(path, entries):
    with open(path, "w") as fh:
        for k, v in entries.items():
            if isinstance(v, (list, tuple)):
                v = " ".join(str(x) for x in v)
            fh.write(f"{k} = {v}\n")


def read_header(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


def write_field(base, grid, values, index_min=None, kind="field"):
    """Write ``values`` of shape ``(d, n1, .., nd)`` as ``base.bin`` + ``base.hdr``."""
    base = Path(base)
    values = np.asarray(values, dtype=complex)
    d = values.shape[0]
    shape = values.shape[1:]
    if index_min is None:
        index_min = [-grid.N // 2] * grid.d
    node_major = np.moveaxis(values, 0, -1)
    bin_path = base.with_suffix(".bin")
    np.ascontiguousarray(node_major).astype("<c16").tofile(bin_path)
    hdr_path = base.with_suffix(HEADER_SUFFIX)
    write_header(hdr_path, {
        "format": "elastoscatter-field-1",
        "kind": kind,
        "d": grid.d,
        "N": grid.N,
        "R": repr(grid.R),
        "h": repr(grid.h),
        "components": d,
        "shape": list(shape),
        "index_min": list(index_min),
        "dtype": "float64-le interleaved re,im",
        "layout": "node-major, axis-major centered indices ascending",
    })
    return [bin_path, hdr_path]


def read_field(base):
    """Return ``(header, values)`` with ``values`` of shape ``(d, n1, .., nd)``."""
    base = Path(base)
    hdr = read_header(base.with_suffix(HEADER_SUFFIX))
    shape = tuple(int(s) for s in hdr["shape"].split())
    comps = int(hdr["components"])
    raw = np.fromfile(base.with_suffix(".bin"), dtype="<c16")
    if raw.size != comps * int(np.prod(shape)):
        raise LayoutError(f"{base}: {raw.size} values, header expects "
                          f"{comps} x {shape}")
    return hdr, np.moveaxis(raw.reshape(shape + (comps,)), -1, 0)


def read_nodal_field(base, grid):
    hdr, vals = read_field(base)
    return NodalVectorField(grid, vals)


def write_field_csv(path, grid, values, index_min=None):
    values = np.asarray(values, dtype=complex)
    shape = values.shape[1:]
    if index_min is None:
        index_min = [-grid.N // 2] * grid.d
    axes = "xyz"[:grid.d]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(axes) + [f"{p}{c}" for c in range(values.shape[0])
                                 for p in ("re", "im")])
        for off in np.ndindex(*shape):
            x = [repr(float((o + m) * grid.h)) for o, m in zip(off, index_min)]
            v = values[(slice(None),) + off]
            w.writerow(x + [repr(float(f)) for c in v for f in (c.real, c.imag)])
    return [Path(path)]


def write_potential(base, Q):
    base = Path(base)
    node_major = np.moveaxis(np.moveaxis(Q.values, 0, -1), 0, -1)   # (.., d_row, d_col)
    bin_path = base.with_suffix(".bin")
    np.ascontiguousarray(node_major).astype("<f8").tofile(bin_path)
    hdr_path = base.with_suffix(HEADER_SUFFIX)
    g = Q.grid
    write_header(hdr_path, {
        "format": "elastoscatter-potential-1",
        "d": g.d, "N": g.N, "R": repr(g.R), "rho": repr(Q.rho),
        "dtype": "float64-le", "layout": "node-major row-major d x d matrices",
    })
    return [bin_path, hdr_path]


def read_potential_samples(base, grid):
    """Samples from ``base.bin`` checked against ``grid``; returns ``(rho, array)``."""
    base = Path(base)
    if base.suffix == ".bin":
        base = base.with_suffix("")
    hdr = read_header(base.with_suffix(HEADER_SUFFIX))
    if int(hdr["d"]) != grid.d or int(hdr["N"]) != grid.N:
        raise LayoutError(f"{base}: header grid d={hdr['d']} N={hdr['N']} does not "
                          f"match d={grid.d} N={grid.N}")
    if abs(float(hdr["R"]) - grid.R) > 1e-12 * grid.R:
        raise LayoutError(f"{base}: header R={hdr['R']} differs from R={grid.R}")
    raw = np.fromfile(base.with_suffix(".bin"), dtype="<f8")
    want = grid.n_nodes * grid.d * grid.d
    if raw.size != want:
        raise LayoutError(f"{base}: {raw.size} samples, expected {want}")
    return float(hdr["rho"]), raw.reshape(grid.shape + (grid.d, grid.d))


def write_matrix_csv(path, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(values):
            w.writerow([repr(float(x)) for x in row])
    return [Path(path)]


def write_vector_csv(path, name, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([name])
        for x in np.asarray(values).ravel():
            w.writerow([repr(float(x))])
    return [Path(path)]


def write_matrix_bin(path, values):
    np.ascontiguousarray(values, dtype="<f8").tofile(path)
    return [Path(path)]


def write_pgm(path, values):
    """16-bit P5 image of a real matrix; returns the normalization bounds."""
    vals = np.asarray(values, dtype=float)[::-1]
    finite = np.isfinite(vals)
    if np.any(finite):
        lo, hi = float(np.min(vals[finite])), float(np.max(vals[finite]))
    else:
        lo = hi = 0.0
    img = np.zeros(vals.shape, dtype=">u2")
    if hi > lo:
        scaled = np.round((vals[finite] - lo) / (hi - lo) * 65535.0)
        img[finite] = scaled.astype(np.uint16)
    rows, cols = vals.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n65535\n".encode("ascii"))
        fh.write(img.tobytes())
    return lo, hi


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise LayoutError(f"{path}: not a binary PGM")
    cols, rows = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=">u2").reshape(rows, cols)


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(directory, payload, files):
    directory = Path(directory)
    entries = {}
    for f in files:
        f = Path(f)
        entries[f.name] = {"sha256": sha256(f), "bytes": f.stat().st_size}
    doc = dict(payload)
    doc["files"] = dict(sorted(entries.items()))
    path = directory / "manifest.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
