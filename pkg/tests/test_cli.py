import csv
import json
import math

import numpy as np
import pytest

from elastoscatter import ConfigError, build_grid, experiment2_potential, read_amplitude_csv
from elastoscatter import io as sio
from elastoscatter.cli import main
from elastoscatter.config import load_config, parse_config

BASE = """
dimension = 2
omega = 5.0
[material]
lambda = 1.0
mu = 4.0
[geometry]
rho = 1.0
R = 2.5
N = 32
"""


def _write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _run(cmd, cfg, out, *extra):
    return main([cmd, "--config", str(cfg), "--output", str(out), *extra])


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_parse_defaults_and_canonical(tmp_path):
    cfg = load_config(_write(tmp_path, BASE))
    assert cfg.potential == "experiment2" and cfg.incident_kind == "s"
    assert cfg.params().k_s == pytest.approx(2.5)
    can = cfg.canonical()
    assert can["tol"] == 1e-8 and can["restart"] == 30 and can["origin"] == "corrected"
    json.dumps(can)


@pytest.mark.parametrize("extra,msg", [
    ("bogus = 1\n", "unknown"),
    ("[solver]\ntolerance = 1e-3\n", "unknown"),
    ("[incident]\nkind = 'x'\n", "incident.kind"),
    ("[incident]\ntheta = [0.1, 0.2]\n", "angle"),
    ("[omega_grid]\nmin = 1.0\nmax = 2.0\ncount = 3\n", "not both"),
    ("[potential]\nbuiltin = 'disk'\n", "builtin"),
    ("[solver]\ntol = 2.0\n", "tol"),
])
def test_parse_rejections(tmp_path, extra, msg):
    with pytest.raises(ConfigError, match=msg):
        load_config(_write(tmp_path, BASE + extra))


def test_parse_invalid_geometry_and_material():
    doc = {"dimension": 2, "material": {"lambda": 1.0, "mu": 1.0},
           "geometry": {"rho": 1.0, "R": 2.0}}
    with pytest.raises(ConfigError, match="R=2.0"):
        parse_config(doc)
    doc = {"dimension": 2, "material": {"lambda": -3.0, "mu": 1.0}}
    with pytest.raises(ConfigError):
        parse_config(doc)
    with pytest.raises(ConfigError):
        parse_config({"dimension": 4, "material": {"lambda": 1.0, "mu": 1.0}})
    with pytest.raises(ConfigError):
        parse_config({"dimension": 2, "material": {"lambda": 1.0, "mu": 1.0},
                      "geometry": {"N": 33}})


def test_missing_and_malformed_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "dimension = = 2"))


def test_field_file_round_trip(tmp_path, rng):
    g = build_grid(2, 2.5, 8)
    vals = rng.normal(size=(2, 8, 8)) + 1j * rng.normal(size=(2, 8, 8))
    sio.write_field(tmp_path / "f", g, vals)
    hdr, back = sio.read_field(tmp_path / "f")
    assert np.array_equal(back, vals)
    assert hdr["d"] == "2" and hdr["N"] == "8" and hdr["components"] == "2"
    raw = np.fromfile(tmp_path / "f.bin", dtype="<f8")
    # first node is j = (-4, -4); the second differs in the last axis
    assert raw[0] == vals[0, 0, 0].real and raw[1] == vals[0, 0, 0].imag
    assert raw[2] == vals[1, 0, 0].real and raw[4] == vals[0, 0, 1].real
    (tmp_path / "f.bin").write_bytes(b"\0" * 16)
    with pytest.raises(sio.LayoutError):
        sio.read_field(tmp_path / "f")


def test_pgm_export(tmp_path):
    v = np.array([[0.0, 1.0], [np.nan, 0.5]])
    lo, hi = sio.write_pgm(tmp_path / "a.pgm", v)
    assert (lo, hi) == (0.0, 1.0)
    img = sio.read_pgm(tmp_path / "a.pgm")
    assert img.tolist() == [[0, 32768], [0, 65535]]     # largest omega row on top
    assert (tmp_path / "a.pgm").read_bytes().startswith(b"P5\n2 2\n65535\n")
    sio.write_pgm(tmp_path / "b.pgm", np.full((3, 4), 2.5))
    assert np.all(sio.read_pgm(tmp_path / "b.pgm") == 0)


def test_solve_command(tmp_path):
    cfg = _write(tmp_path, BASE + "[incident]\nkind = 's'\ntheta = 0.25\n")
    out = tmp_path / "out"
    assert _run("solve", cfg, out) == 0
    m = _manifest(out)
    assert m["runs"]["s"]["converged"] and m["config"]["N"] == 32
    for name, meta in m["files"].items():
        assert sio.sha256(out / name) == meta["sha256"]
    hdr, inner = sio.read_field(out / "scattered_s_inner")
    assert inner.shape == (2, 13, 13) and hdr["index_min"] == "-6 -6"
    _, full = sio.read_field(out / "scattered_s")
    assert np.array_equal(full[:, 10:23, 10:23], inner)
    with open(out / "scattered_s.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "re0", "im0", "re1", "im1"] and len(rows) == 1 + 32 * 32


def test_solve_zero_potential(tmp_path):
    cfg = _write(tmp_path, BASE + "[potential]\nbuiltin = 'zero'\n")
    out = tmp_path / "out"
    assert _run("solve", cfg, out) == 0
    _, v = sio.read_field(out / "scattered_s")
    assert np.all(v == 0)


def test_solve_from_potential_file(tmp_path):
    g = build_grid(2, 2.5, 32)
    sio.write_potential(tmp_path / "q", experiment2_potential(g))
    cfg = _write(tmp_path, BASE + "[potential]\nfile = 'q.bin'\n")
    assert _run("solve", cfg, tmp_path / "a") == 0
    ref = _write(tmp_path, BASE, "ref.toml")
    assert _run("solve", ref, tmp_path / "b") == 0
    assert (tmp_path / "a" / "scattered_s.bin").read_bytes() == \
        (tmp_path / "b" / "scattered_s.bin").read_bytes()


def test_exit_codes(tmp_path, capsys):
    bad_geo = _write(tmp_path, BASE.replace("R = 2.5", "R = 1.5"), "geo.toml")
    out = tmp_path / "none"
    assert _run("solve", bad_geo, out) == 2
    assert not out.exists()
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["exit_code"] == 2 and err["error"] == "ConfigError"
    hard = _write(tmp_path, BASE + "[solver]\ntol = 1e-14\nrestart = 1\nmax_iterations = 1\n",
                  "hard.toml")
    assert _run("solve", hard, tmp_path / "h") == 3
    assert json.loads(capsys.readouterr().err.strip())["exit_code"] == 3
    missing = _write(tmp_path, BASE + "[potential]\nfile = 'nope.bin'\n", "miss.toml")
    assert _run("solve", missing, tmp_path / "m") == 4
    assert _run("sinogram", _write(tmp_path, BASE, "one.toml"), tmp_path / "s") == 0


def test_convergence_command(tmp_path):
    text = BASE.replace("omega = 5.0", "omega = 1.0").replace("mu = 4.0", "mu = 1.0")
    text += "[potential]\nbuiltin = 'manufactured'\n"
    cfg = _write(tmp_path, text.replace("N = 32", "N_list = [20, 40, 80]"))
    assert _run("convergence", cfg, tmp_path / "a") == 0
    assert _run("convergence", cfg, tmp_path / "b") == 0
    a = (tmp_path / "a" / "convergence.csv").read_bytes()
    assert a == (tmp_path / "b" / "convergence.csv").read_bytes()
    rows = list(csv.DictReader(a.decode().splitlines()))
    assert len(rows) == 3 and rows[0]["order_linf"] == ""
    assert all(float(r["order_linf"]) >= 1.8 for r in rows[1:])
    single = _write(tmp_path, text.replace("N = 32", "N_list = [20]"), "single.toml")
    assert _run("convergence", single, tmp_path / "c") == 0
    rows = list(csv.DictReader((tmp_path / "c" / "convergence.csv").read_text().splitlines()))
    assert len(rows) == 1 and rows[0]["order_l2"] == ""


def test_sinogram_command(tmp_path):
    text = BASE.replace("omega = 5.0\n", "").replace("N = 32", "N = 16")
    text += ("[omega_grid]\nmin = 2.0\nmax = 6.0\ncount = 3\n[incident]\nkind = 'both'\n"
             "theta = 0.25\n[outputs]\ntheta_prime_count = 8\n")
    out = tmp_path / "s"
    assert _run("sinogram", _write(tmp_path, text), out, "--workers", "2") == 0
    for inc in "sp":
        for amp in "sp":
            base = out / f"sinogram_{inc}inc_{amp}amp"
            v = np.fromfile(base.with_suffix(".bin"), dtype="<f8").reshape(3, 8)
            c = np.loadtxt(base.with_suffix(".csv"), delimiter=",")
            assert np.array_equal(v, c)
            assert sio.read_pgm(base.with_suffix(".pgm")).shape == (3, 8)
    m = _manifest(out)
    assert m["images"]["sinogram_sinc_samp"]["rows"] == 3
    assert np.allclose(np.loadtxt(out / "theta_prime.csv", skiprows=1),
                       2 * math.pi * np.arange(8) / 8)


def test_sinogram_single_cell_and_zero(tmp_path):
    text = BASE.replace("N = 32", "N = 16") + (
        "[potential]\nbuiltin = 'zero'\n[outputs]\ntheta_prime = [0.5]\n")
    out = tmp_path / "z"
    assert _run("sinogram", _write(tmp_path, text), out) == 0
    v = np.fromfile(out / "sinogram_sinc_samp.bin", dtype="<f8")
    assert v.shape == (1,) and v[0] == 0
    assert np.all(sio.read_pgm(out / "sinogram_sinc_samp.pgm") == 0)


def test_amplitude_command(tmp_path):
    text = BASE + "[outputs]\ntheta_prime = [0.25]\n"
    out = tmp_path / "a"
    assert _run("amplitude", _write(tmp_path, text), out) == 0
    with open(out / "amplitudes.csv") as fh:
        recs = read_amplitude_csv(fh)
    assert len(recs) == 1
    zero = _write(tmp_path, BASE + "[potential]\nbuiltin = 'zero'\n"
                  "[outputs]\ntheta_prime = [0.0, 1.0]\n", "zero.toml")
    assert _run("amplitude", zero, tmp_path / "z") == 0
    with open(tmp_path / "z" / "amplitudes.csv") as fh:
        recs = read_amplitude_csv(fh)
    assert len(recs) == 2 and all(np.all(r.v_s_inf == 0) and np.all(r.v_p_inf == 0)
                                  for r in recs)


def test_amplitude_3d(tmp_path):
    text = ("dimension = 3\nomega = 4.0\n[material]\nlambda = 1.0\nmu = 4.0\n"
            "[geometry]\nN = 8\n[incident]\nkind = 's'\ntheta = [0.5, 0.0]\npol = 0.5\n"
            "[outputs]\ntheta_prime = [[0.5, 0.0], [0.25, 1.0]]\n")
    assert _run("amplitude", _write(tmp_path, text), tmp_path / "a") == 0


@pytest.mark.parametrize("d,N", [(2, 64), (3, 16)])
def test_kernel_decay_command(tmp_path, d, N):
    text = (f"dimension = {d}\nomega = 10.0\n[material]\nlambda = 1.0\nmu = 4.0\n"
            f"[geometry]\nN = {N}\n")
    out = tmp_path / "k"
    assert _run("kernel-decay", _write(tmp_path, text), out) == 0
    rows = list(csv.DictReader((out / "decay.csv").read_text().splitlines()))
    assert len(rows) == int(math.log2(N // 2)) - 1
    assert _manifest(out)["bands"] == len(rows)


def test_kernel_decay_gaussian(tmp_path):
    text = ("dimension = 2\nomega = 10.0\n[material]\nlambda = 1.0\nmu = 4.0\n"
            "[geometry]\nR = 6.0\nN = 64\n[kernel_decay]\nkernel = 'gaussian'\n")
    out = tmp_path / "g"
    assert _run("kernel-decay", _write(tmp_path, text), out) == 0
    ratios = [float(r["ratio"]) for r in
              csv.DictReader((out / "decay.csv").read_text().splitlines())]
    assert ratios[-1] < 1e-5 * ratios[0]
