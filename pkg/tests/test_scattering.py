import io
import math

import numpy as np
import pytest

from elastoscatter import (AmplitudeRecord, CutoffSpec, DomainError, GridError, LameParams,
                           NodalVectorField, Potential, Selector, SolverConfig, build_grid,
                           experiment2_potential, far_field, far_field_naive,
                           manufactured_case, observation_angles, plane_wave_2d,
                           plane_wave_3d, read_amplitude_csv, sinogram, solve_scattering,
                           write_amplitude_csv)
from elastoscatter.scattering import (amplitude_records, amplitude_table, directions_2d,
                                      directions_3d)

P = LameParams(1.0, 4.0, 10.0)
CUT = CutoffSpec(1.0, 2.5)




@pytest.fixture(scope="module")
def solved2():
    g = build_grid(2, 2.5, 16)
    Q = experiment2_potential(g)
    w = plane_wave_2d("s", math.pi / 4, P.omega)
    return g, Q, w, solve_scattering(P, g, CUT, Q, w)


@pytest.fixture(scope="module")
def solved3():
    g = build_grid(3, 2.5, 16)
    inside = g.radii() <= 1.0
    rng = np.random.default_rng(5)
    Q = Potential(g, 1.0, rng.uniform(0, 1, size=(3, 3) + g.shape) * inside)
    w = plane_wave_3d("p", 0.3, 1.2, P.omega)
    return g, Q, w, solve_scattering(P, g, CUT, Q, w)


def test_far_field_matches_naive_2d(solved2):
    g, Q, w, res = solved2
    dirs = directions_2d(observation_angles(24))
    vp, vs = far_field(P, Q, res.u_h, dirs)
    naive = [far_field_naive(P, Q, res.u_h, t) for t in dirs]
    np_, ns = (np.array([n[k] for n in naive]) for k in (0, 1))
    # relative to the largest amplitude: some directions have vanishing p-parts
    assert np.max(np.abs(vp - np_)) <= 1e-12 * np.max(np.abs(np_))
    assert np.max(np.abs(vs - ns)) <= 1e-12 * np.max(np.abs(ns))


def test_far_field_matches_naive_3d(solved3):
    g, Q, w, res = solved3
    dirs = directions_3d(3, 2)
    vp, vs = far_field(P, Q, res.u_h, dirs)
    naive = [far_field_naive(P, Q, res.u_h, t) for t in dirs]
    np_, ns = (np.array([n[k] for n in naive]) for k in (0, 1))
    assert np.max(np.abs(vp - np_)) <= 1e-12 * np.max(np.abs(np_))
    assert np.max(np.abs(vs - ns)) <= 1e-12 * np.max(np.abs(ns))


def test_far_field_manufactured_naive(unit_params):
    g = build_grid(2, 2.5, 16)
    case = manufactured_case(unit_params, g)
    u = case.f                       # any nodal field will do for the sum identity
    t = np.array([0.6, 0.8])
    vp, vs = far_field(unit_params, case.Q, u, t)
    np_, ns = far_field_naive(unit_params, case.Q, u, t)
    assert np.allclose(vp, np_, rtol=1e-12) and np.allclose(vs, ns, rtol=1e-12)


@pytest.mark.parametrize("fixture", ["solved2", "solved3"])
def test_projection_identities(fixture, request):
    g, Q, w, res = request.getfixturevalue(fixture)
    t = directions_2d(observation_angles(64)) if g.d == 2 else directions_3d(8, 6)
    vp, vs = far_field(P, Q, res.u_h, t)
    along = np.sum(vp * t, -1, keepdims=True) * t
    assert np.all(np.linalg.norm(vp - along, axis=-1) <= 1e-12 * np.linalg.norm(vp, axis=-1))
    assert np.all(np.abs(np.sum(vs * t, -1)) <= 1e-12 * np.linalg.norm(vs, axis=-1))


def test_far_field_linear_and_zero(solved2, rng):
    g, Q, w, res = solved2
    t = directions_2d([0.3, 2.0])
    u1 = res.u_h
    u2 = NodalVectorField(g, rng.normal(size=(2,) + g.shape) + 1j * rng.normal(size=(2,) + g.shape))
    comb = NodalVectorField(g, 2 * u1.values - 1j * u2.values)
    a = far_field(P, Q, comb, t)
    b1, b2 = far_field(P, Q, u1, t), far_field(P, Q, u2, t)
    for k in range(2):
        ref = 2 * b1[k] - 1j * b2[k]
        assert np.max(np.abs(a[k] - ref)) <= 1e-12 * np.max(np.abs(ref))
    z = far_field(P, Potential.zero(g, 1.0), u1, t)
    assert np.all(z[0] == 0) and np.all(z[1] == 0)


def test_far_field_errors(solved2):
    g, Q, w, res = solved2
    with pytest.raises(DomainError):
        far_field(P, Q, res.u_h, [1.0, 1.0])
    with pytest.raises(DomainError):
        far_field(P, Q, res.u_h, [1.0, 0.0, 0.0])
    with pytest.raises(GridError):
        far_field(P, Q, NodalVectorField.zeros(build_grid(2, 2.5, 8)), [1.0, 0.0])


def test_selector_validation_and_defaults():
    assert Selector.default_for("s") == Selector("s", "re", "tangential")
    assert Selector.default_for("p") == Selector("p", "re", "radial")
    with pytest.raises(ValueError):
        Selector("x")
    with pytest.raises(ValueError):
        Selector("s", "phase")
    with pytest.raises(ValueError):
        Selector("s", "re", "diagonal")
    t = np.array([[1.0, 0.0]])
    with pytest.raises(ValueError):
        Selector("s", "re", "norm")(t, t, t)


def test_sinogram_single_cell_matches_far_field(solved2):
    g, Q, w, res = solved2
    t = np.array([[math.cos(1.0), math.sin(1.0)]])
    s = sinogram(P, g, CUT, Q, w, [P.omega], t)
    assert s.shape == (1, 1)
    vp, vs = far_field(P, Q, res.u_h, t[0])
    tang = -vs[0] * t[0, 1] + vs[1] * t[0, 0]
    assert s.values[0, 0] == pytest.approx(tang.real, rel=1e-9, abs=1e-14)


def test_sinogram_zero_potential():
    g = build_grid(2, 2.5, 16)
    w = plane_wave_2d("p", 0.0, 1.0)
    s = sinogram(P, g, CUT, Potential.zero(g, 1.0), w, [1.0, 2.0, 3.0],
                 directions_2d(observation_angles(8)))
    assert np.all(s.values == 0) and not s.failures


def test_sinogram_deterministic_across_workers():
    g = build_grid(2, 2.5, 32)
    Q = experiment2_potential(g)
    w = plane_wave_2d("s", math.pi / 4, 1.0)
    t = directions_2d(observation_angles(16))
    om = np.linspace(2.0, 12.0, 4)
    sel = {"s": Selector.default_for("s"), "p": Selector("p", "abs", "norm")}
    a = sinogram(P, g, CUT, Q, w, om, t, workers=1, selectors=sel)
    b = sinogram(P, g, CUT, Q, w, om, t, workers=3, selectors=sel)
    for k in sel:
        np.testing.assert_array_equal(a[k].values, b[k].values)


def test_sinogram_failures_are_nan_rows():
    g = build_grid(2, 2.5, 32)
    Q = experiment2_potential(g)
    w = plane_wave_2d("s", 0.0, 1.0)
    cfg = SolverConfig(tol=1e-14, restart=1, max_iterations=1)
    s = sinogram(P, g, CUT, Q, w, [5.0, 20.0], directions_2d(observation_angles(4)), cfg)
    assert np.all(np.isnan(s.values))
    assert [f["row"] for f in s.failures] == [0, 1]
    assert all(f["reason"] == "not converged" for f in s.failures)


def test_sinogram_rejects_bad_grid():
    g = build_grid(2, 2.5, 8)
    w = plane_wave_2d("p", 0.0, 1.0)
    with pytest.raises(DomainError):
        sinogram(P, g, CUT, Potential.zero(g, 1.0), w, [2.0, 1.0], [[1.0, 0.0]])
    with pytest.raises(DomainError):
        sinogram(P, g, CUT, Potential.zero(g, 1.0), w, [0.0], [[1.0, 0.0]])


def test_amplitude_table_export(solved2, solved3):
    assert len(amplitude_table([])) == 1
    g, Q, w, res = solved2
    recs = amplitude_records(P, Q, res.u_h, w, directions_2d(observation_angles(5)))
    rows = amplitude_table(recs)
    assert len(rows) == 1 + len(recs)
    buf = io.StringIO()
    write_amplitude_csv(recs, buf)
    back = read_amplitude_csv(io.StringIO(buf.getvalue()))
    assert len(back) == len(recs)
    for a, b in zip(recs, back):
        assert a.omega == b.omega and a.incident == b.incident
        assert np.array_equal(a.theta_prime, b.theta_prime)
        assert np.array_equal(a.v_p_inf, b.v_p_inf) and np.array_equal(a.v_s_inf, b.v_s_inf)
    g3, Q3, w3, res3 = solved3
    recs3 = amplitude_records(P, Q3, res3.u_h, w3, directions_3d(2, 1))
    buf = io.StringIO()
    write_amplitude_csv(recs3, buf)
    back3 = read_amplitude_csv(io.StringIO(buf.getvalue()))
    assert np.array_equal(back3[0].v_s_inf, recs3[0].v_s_inf)
    with pytest.raises(DomainError):
        amplitude_table(recs[:1] + recs3[:1])
