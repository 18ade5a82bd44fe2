import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rif_forge.catalog import catalog, catalog_names
from rif_forge.errors import InsufficientTailSamples
from rif_forge.fitting import axis_parallel_lines, direct_index, fit_decay
from rif_forge.l1 import l1_norm, partial_derivative_torus
from rif_forge.sampling import lp_proxy_norm, omega_measure, parse_local, sample_delta
from rif_forge.scan import singular_scan

TWO_PI_SQ = (2 * np.pi) ** 2


@pytest.fixture(scope="module")
def iso_uniform():
    return sample_delta(catalog("ex_iso1"), 3, "uniform", 100_000, seed=1)


@pytest.fixture(scope="module")
def vl1_uniform():
    return sample_delta(catalog("ex_vl1"), 3, "uniform", 50_000, seed=2)


# ------------------------------------------------------------------ sampling

def test_iso_deltas_in_unit_interval(iso_uniform):
    d = iso_uniform.delta[iso_uniform.valid]
    assert np.all((d > 0) & (d < 1))
    assert iso_uniform.exceptional_fraction() < 1e-3
    assert np.all(np.abs(iso_uniform.angles) <= np.pi)


def test_vl1_deltas_concentrate_at_half(vl1_uniform):
    d = vl1_uniform.delta[vl1_uniform.valid]
    assert np.std(d) < 1e-6 and np.mean(d) == pytest.approx(0.5, abs=1e-9)


def test_seeded_determinism_across_threads():
    r = catalog("ex_curve")
    a = sample_delta(r, 3, "stratified", 40_000, seed=9, threads=1)
    b = sample_delta(r, 3, "stratified", 40_000, seed=9, threads=4)
    assert np.array_equal(a.angles, b.angles)
    assert np.array_equal(a.delta, b.delta, equal_nan=True)
    assert np.array_equal(a.weights, b.weights)
    c = sample_delta(r, 3, "stratified", 40_000, seed=10, threads=1)
    assert not np.array_equal(a.angles, c.angles)


@settings(max_examples=5, deadline=None)
@given(st.sampled_from(catalog_names()), st.integers(0, 2 ** 31), st.integers(1, 3))
def test_seeded_determinism_property(name, seed, threads):
    r = catalog(name)
    j = r.nvars
    a = sample_delta(r, j, "uniform", 2_000, seed=seed, threads=threads)
    b = sample_delta(r, j, "uniform", 2_000, seed=seed, threads=1)
    assert np.array_equal(a.delta, b.delta, equal_nan=True)


def test_profile_exports(vl1_uniform):
    buf = io.StringIO()
    vl1_uniform.to_csv(buf)
    header = buf.getvalue().splitlines()[0].split(",")
    assert header[-3:] == ["delta", "weight", "exceptional"]
    d = json.loads(vl1_uniform.to_json())
    assert d["variable"] == 3


# ------------------------------------------------------------------ Omega_x

def test_omega_full_torus_at_x_one(iso_uniform):
    m = omega_measure(iso_uniform, 1.0)
    assert m["estimate"] == pytest.approx(TWO_PI_SQ, abs=3 * m["stderr"] + 1e-9)


def test_omega_vl1_empty_beyond_two(vl1_uniform):
    m = omega_measure(vl1_uniform, 3.0, strict=False)
    assert m["estimate"] == 0.0 and m["tail"] == 0
    with pytest.raises(InsufficientTailSamples):
        omega_measure(vl1_uniform, 3.0)


def test_omega_iso_slope():
    prof = sample_delta(catalog("ex_iso1"), 3, "stratified", 400_000, seed=4)
    xs = np.geomspace(1e2, 1e4, 9)
    est = [omega_measure(prof, x)["estimate"] for x in xs]
    slope = np.polyfit(np.log(xs), np.log(est), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)


@settings(max_examples=20, deadline=None)
@given(st.floats(1.0, 1e4), st.floats(1.0, 1e4))
def test_omega_monotone(x1, x2):
    prof = _iso_profile()
    x1, x2 = sorted((x1, x2))
    a = omega_measure(prof, x1, strict=False)
    b = omega_measure(prof, x2, strict=False)
    assert a["estimate"] >= b["estimate"] - 2 * (a["stderr"] + b["stderr"])


_CACHE = {}


def _iso_profile():
    if "iso" not in _CACHE:
        _CACHE["iso"] = sample_delta(catalog("ex_iso1"), 3, "stratified", 100_000, seed=8)
    return _CACHE["iso"]


# ------------------------------------------------------------ proxy norms

def test_proxy_at_p_one_is_total_measure(iso_uniform):
    assert lp_proxy_norm(iso_uniform, 1.0)["estimate"] == pytest.approx(TWO_PI_SQ, rel=1e-12)


def test_proxy_vl1_p4(vl1_uniform):
    res = lp_proxy_norm(vl1_uniform, 4.0)
    assert not res["divergent"]
    assert res["estimate"] == pytest.approx(8 * TWO_PI_SQ, rel=0.05)


def test_proxy_iso_diverges_above_two():
    prof = sample_delta(catalog("ex_iso1"), 3, "stratified", 400_000, seed=5)
    assert lp_proxy_norm(prof, 2.5)["divergent"]
    assert not lp_proxy_norm(prof, 1.5)["divergent"]


# ------------------------------------------------------------------ fitting

def test_fit_iso_var3():
    prof = sample_delta(catalog("ex_iso1"), 3, "stratified", 400_000, seed=6)
    rep = fit_decay(prof)
    assert 1.85 <= rep.p_star <= 2.15
    assert rep.p_star == pytest.approx(1 + rep.alpha_hat)
    assert 0 <= rep.fit_r2 <= 1 and rep.x_window[0] < rep.x_window[1]
    assert rep.alpha_ci[0] <= rep.alpha_hat <= rep.alpha_ci[1]
    assert [c["p"] for c in rep.direct_checks] == pytest.approx(
        [rep.p_star - 0.25, rep.p_star, rep.p_star + 0.25])


def test_fit_vl1_var3_has_no_tail(vl1_uniform):
    rep = fit_decay(vl1_uniform)
    assert rep.p_star == np.inf and "no_tail" in rep.flags
    assert all(c["integral_estimate"] != "DIVERGENT" for c in rep.direct_checks)
    assert json.loads(json.dumps(rep.to_json_dict()))["p_star"] == "inf"


def test_fit_grid_validation(iso_uniform):
    with pytest.raises(ValueError):
        fit_decay(iso_uniform, np.geomspace(1, 10, 5))


def test_direct_index_iso():
    prof = sample_delta(catalog("ex_iso1"), 3, "stratified", 400_000, seed=6)
    rep = direct_index(prof)
    assert rep.p_direct == pytest.approx(2.0, abs=0.3)


def test_local_box_parsing():
    box = parse_local("pi,*")
    assert box.centers()[0] == pytest.approx(np.pi) and box.volume() == pytest.approx(2 * np.pi)


# ---------------------------------------------------------------------- L1

def test_partial_derivative_against_difference_quotient():
    r = catalog("ex_curve")
    theta = np.array([[0.3, -1.2, 2.0]])
    h = 1e-6
    z = np.exp(1j * theta)
    zp = z.copy()
    zp[0, 2] += h
    zm = z.copy()
    zm[0, 2] -= h
    fd = (r.phi(zp) - r.phi(zm)) / (2 * h)
    assert partial_derivative_torus(r, 3, theta)[0] == pytest.approx(fd[0], rel=1e-7)


@pytest.mark.parametrize("name", ["ex_iso1", "ex_vl1", "ex_curve"])
def test_l1_identity_small_budget(name):
    r = catalog(name)
    for j in range(1, 4):
        est = l1_norm(r, j, samples=100_000, seed=3)
        assert est.relative_error < 0.02, (j, est)


# ---------------------------------------------------------------------- scan

def test_scan_iso_single_point():
    s = singular_scan(catalog("ex_iso1"))
    assert s.dimensions == [0]
    assert np.allclose(s.components[0].center, 0, atol=1e-6)
    assert np.all(s.residuals < s.tolerance)


def test_scan_curve_three_curves():
    s = singular_scan(catalog("ex_curve"))
    assert s.dimensions == [1, 1, 1]


def test_scan_curve2_line_and_curve():
    s = singular_scan(catalog("ex_curve2"))
    assert sorted(s.dimensions) == [1, 1]
    lines = axis_parallel_lines(s, 3)
    assert len(lines) == 1
    # |p| grows very slowly off the line along theta1 = -theta2, so some
    # accepted points sit a few 1e-3 away from it
    pts = s.component_points(lines[0])
    assert np.max(np.abs(pts[:, :2])) < 0.05
    assert np.allclose(np.mean(pts[:, :2], axis=0), 0, atol=1e-3)


def test_scan_empty_for_nonsingular():
    from rif_forge.poly import parse_poly
    from rif_forge.rif import make_rif

    r = make_rif(parse_poly("4 - z1 - z2", 2), (1, 1))
    assert len(singular_scan(r)) == 0


@pytest.mark.slow
@pytest.mark.parametrize("name", catalog_names())
def test_scan_stable_under_doubled_resolution(name):
    r = catalog(name)
    a = singular_scan(r, resolution=64)
    b = singular_scan(r, resolution=128)
    assert len(a) == len(b)
    assert sorted(a.dimensions) == sorted(b.dimensions)
