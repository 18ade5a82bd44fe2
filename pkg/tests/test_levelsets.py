import copy
import io

import numpy as np
import pytest
import sympy

from rif_forge.catalog import catalog, catalog_names
from rif_forge.errors import DegreeMismatch, PsiSingular, VerificationFailed
from rif_forge.gaussian import gr
from rif_forge.levelsets import (
    as_unimodular, lambda_grid, level_set_sample, level_set_singularities, psi_lambda,
    psi_lambda_angles, q_lambda, q_lambda_tilde, verify_cl_equals_ll, zero_curve,
)
from rif_forge.poly import parse_poly
from rif_forge.refine import torus_distance, wrap
from rif_forge.scan import singular_scan

MN1 = [n for n in catalog_names() if catalog(n).degree[2] == 1]


def test_q_lambda_iso():
    r = catalog("ex_iso1")
    lam = gr(3, 4) / 5
    assert q_lambda(r, lam) == parse_poly("3 - z1 - z2", 2) * lam + parse_poly("z1*z2", 2)
    q = q_lambda(r, -1)
    assert q == parse_poly("-3 + z1 + z2 + z1*z2", 2)
    assert q(1, 1) == 0
    with pytest.raises(DegreeMismatch):
        q_lambda(catalog("ex_curveiso2"), 1)


@pytest.mark.parametrize("name", MN1)
def test_q_nonvanishing_at_origin_and_in_disk(name):
    r = catalog(name)
    rng = np.random.default_rng(0)
    rad = np.sqrt(rng.uniform(0, 0.98, (4000, 2)))
    z = rad * np.exp(1j * rng.uniform(-np.pi, np.pi, (4000, 2)))
    for lam in lambda_grid(16):
        q = q_lambda(r, lam)
        assert abs(complex(q(0, 0))) > 0
        assert np.min(np.abs(q.numeric().eval(z))) > 1e-8


def test_psi_iso_minus_one_formula():
    r = catalog("ex_iso1")
    rng = np.random.default_rng(1)
    z1, z2 = sympy.symbols("z1 z2")
    closed = (-3 + z1 + z2 + z1 * z2) / (-1 - z1 - z2 + 3 * z1 * z2)
    for t in rng.uniform(-np.pi, np.pi, (10, 2)):
        tau = np.exp(1j * t)
        expect = complex(closed.subs({z1: tau[0], z2: tau[1]}))
        assert psi_lambda(r, -1, tau) == pytest.approx(expect, abs=1e-12)
    with pytest.raises(PsiSingular):
        psi_lambda(r, -1, (1, 1))


def test_psi_curve2_is_minus_one():
    r = catalog("ex_curve2")
    rng = np.random.default_rng(2)
    vals, sing = psi_lambda_angles(r, 1, rng.uniform(-np.pi, np.pi, (500, 2)))
    assert np.allclose(vals[~sing], -1, atol=1e-12)


@pytest.mark.parametrize("name", MN1)
def test_psi_unimodular_and_on_level_set(name):
    r = catalog(name)
    rng = np.random.default_rng(3)
    theta = rng.uniform(-np.pi, np.pi, (10_000, 2))
    for lam in lambda_grid(16):
        vals, sing = psi_lambda_angles(r, lam, theta)
        ok = ~sing
        assert np.max(np.abs(np.abs(vals[ok]) - 1)) < 1e-10
        full = np.column_stack([theta[ok], np.angle(vals[ok])])
        res = r.p_tilde.numeric().eval_torus(full) - complex(lam) * r.p.numeric().eval_torus(full)
        assert np.max(np.abs(res)) < 1e-8 * r.scale


def test_level_set_sample_curve_lines():
    r = catalog("ex_curve")
    for lam in lambda_grid(16)[1:]:
        lam_c = complex(lam)
        s = level_set_sample(r, lam, grid=32)
        expect = np.unique(np.angle(np.array([[1, -lam_c], [-lam_c, 1]])), axis=0)
        # at lambda = -1 the two lines (1, -lambda) and (-lambda, 1) coincide
        assert len(s.vertical_lines) == len(expect)
        for e in expect:
            assert np.min(np.linalg.norm(wrap(s.vertical_lines - e), axis=1)) < 1e-8


def test_level_set_sample_curve2_lines():
    r = catalog("ex_curve2")
    for lam in lambda_grid(16)[1:]:
        s = level_set_sample(r, lam, grid=32)
        assert len(s.vertical_lines) == 1
        assert np.allclose(wrap(s.vertical_lines[0]), 0, atol=1e-8)


def test_level_set_sample_iso_surface_total():
    r = catalog("ex_iso1")
    s = level_set_sample(r, 1j, grid=32)
    assert len(s.vertical_lines) == 0 and len(s.surface) == 32 * 32
    assert s.max_modulus_error < 1e-10 and s.max_level_residual < 1e-8


def test_level_set_csv_contract():
    s = level_set_sample(catalog("ex_curve"), -1j, grid=16)
    buf = io.StringIO()
    s.to_csv(buf, line_points=8)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "theta1,theta2,theta3,kind"
    kinds = {row.rsplit(",", 1)[1] for row in rows[1:]}
    assert kinds <= {"surface", "vertical", "psi-singular"} and "vertical" in kinds


def test_level_set_singularities_iso_dichotomy():
    r = catalog("ex_iso1")
    grid = lambda_grid(16)
    assert complex(grid[8]) == -1
    for k, lam in enumerate(grid):
        zeros = level_set_singularities(r, lam)
        if k == 8:
            assert len(zeros) == 1 and np.allclose(zeros[0], 0, atol=1e-8)
        else:
            assert len(zeros) == 0
    # the reflected polynomial has the same torus zeros
    qt = q_lambda_tilde(r, -1)
    assert abs(complex(qt(1, 1))) == 0


def test_level_set_singularities_curve():
    r = catalog("ex_curve")
    lam = np.exp(0.7j)
    zeros = level_set_singularities(r, lam)
    expect = np.angle(np.array([[1, -lam], [-lam, 1]]))
    assert len(zeros) == 2
    assert np.all(torus_distance(zeros[:, None, :], expect[None]).min(axis=1) < 1e-8)


def test_zero_curves_detected():
    assert zero_curve(catalog("ex_curve"), 1)
    assert zero_curve(catalog("ex_vl2"), -1)
    assert not zero_curve(catalog("ex_curve"), 1j)


def test_as_unimodular():
    assert as_unimodular(-1.0) == gr(-1)
    assert as_unimodular(0.6 + 0.8j) == gr(3, 4) / 5
    with pytest.raises(ValueError):
        as_unimodular(2)


def test_verify_iso_all_lambda():
    r = catalog("ex_iso1")
    scan = singular_scan(r)
    for lam in lambda_grid(16):
        out = verify_cl_equals_ll(r, lam, scan, tol=1e-3, grid=512)
        assert out and max(e["distance"] for e in out) < 1e-3


def test_verify_empty_scan():
    from rif_forge.rif import make_rif

    r = make_rif(parse_poly("4 - z1 - z2 + z3", 3), (1, 1, 1))
    assert verify_cl_equals_ll(r, 1, singular_scan(r)) == []


def test_verify_failure_is_reported():
    # a level set never passes through a point that is not singular, so
    # feeding a fake scan point must fail
    r = catalog("ex_iso1")
    scan = copy.deepcopy(singular_scan(r))
    scan.points[:] = [[1.0, 2.0, -2.5]]
    with pytest.raises(VerificationFailed):
        verify_cl_equals_ll(r, 1j, scan, tol=1e-3, grid=64)
