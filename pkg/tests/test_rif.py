from fractions import Fraction

import numpy as np
import pytest
import sympy

from rif_forge.catalog import catalog, catalog_denominator, catalog_names, phi_d_numerator
from rif_forge.errors import (
    DegreeMismatch, ExceptionalSlice, StabilityViolation, UnknownExample,
)
from rif_forge.poly import MultiPoly, parse_poly, reflect
from rif_forge.realize import RealizationInput, aty_realize, pick_function
from rif_forge.rif import delta, make_rif, mn1_split, slice_deltas, slice_roots, vertical_lines

MN1 = [n for n in catalog_names() if catalog(n).degree[2] == 1]


# ------------------------------------------------------------- make_rif

def test_make_rif_iso():
    r = make_rif(parse_poly("3 - z1 - z2 - z3", 3), (1, 1, 1))
    assert r.p_tilde == parse_poly("3*z1*z2*z3 - z2*z3 - z1*z3 - z1*z2", 3)
    assert r.stability.min_modulus_interior > 0


def test_make_rif_rejects_interior_zero():
    with pytest.raises(StabilityViolation) as err:
        make_rif(parse_poly("1 - 2*z1", 1), (1,))
    assert abs(err.value.point[0] - 0.5) < 1e-6


def test_make_rif_combined_example_is_stable():
    r = make_rif(catalog_denominator("ex_curveiso"), (6, 2, 1))
    assert r.degree == (6, 2, 1)


def test_json_roundtrip_model():
    d = catalog("ex_vl1").to_json_dict()
    assert d["degree"] == [1, 1, 1] and "stability" in d
    assert MultiPoly.from_json_dict(d) == catalog("ex_vl1").p


# ------------------------------------------------------------- catalog

def test_catalog_listing():
    names = catalog_names()
    assert len(names) == 9 and "ex_iso1" in names and "phi_d(3)" in names
    assert catalog("phi_d(3)").p == catalog("ex_iso1").p
    assert catalog("ex_curveiso2").degree == (2, 2, 2)
    with pytest.raises(UnknownExample):
        catalog("ex_nothing")


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_phi_d_numerator_matches_reflection(d):
    assert catalog(f"phi_d({d})").p_tilde == phi_d_numerator(d)


# ------------------------------------------------------------- (m,n,1) split

def test_split_iso():
    s = mn1_split(catalog("ex_iso1"))
    assert s.p1 == parse_poly("3 - z1 - z2", 2)
    assert s.p2 == MultiPoly.constant(-1, 2)


def test_split_vl1():
    s = mn1_split(catalog("ex_vl1"))
    assert s.p1 == parse_poly("2 - z1 - z2", 2)
    assert s.p2 == parse_poly("z1*z2 - z1/2 - z2/2", 2)


def test_split_degenerate_and_mismatch():
    r = make_rif(parse_poly("2 - z1 - z2", 3), (1, 1, 1))
    s = mn1_split(r)
    assert s.p2.is_zero() and s.p1 == parse_poly("2 - z1 - z2", 2)
    with pytest.raises(DegreeMismatch):
        mn1_split(catalog("ex_curveiso2"))


# ------------------------------------------------------------- vertical lines

def test_vertical_lines_examples():
    for name in ("ex_vl1", "ex_curve2"):
        v = vertical_lines(catalog(name))
        assert len(v) == 1 and not v.nonfinite_suspect
        assert np.allclose(v.points[0], (1, 1), atol=1e-8)
    assert len(vertical_lines(catalog("ex_iso1"))) == 0


def test_vertical_lines_residual():
    r = catalog("ex_vl2")
    s = mn1_split(r)
    for z in vertical_lines(r):
        assert abs(s.p1(z)) < 1e-12 and abs(s.p2(z)) < 1e-12


# ------------------------------------------------------------- slices

def test_slice_root_iso():
    sr = slice_roots(catalog("ex_iso1"), 3, (-1, -1))
    assert sr.roots.size == 1 and sr.roots[0] == pytest.approx(0.2, abs=1e-14)
    assert delta(catalog("ex_iso1"), 3, (-1, -1)) == pytest.approx(0.8, abs=1e-14)
    with pytest.raises(ExceptionalSlice):
        slice_roots(catalog("ex_iso1"), 3, (1, 1))


def test_delta_vl1_is_one_half():
    rng = np.random.default_rng(3)
    for t in rng.uniform(-np.pi, np.pi, (20, 2)):
        assert delta(catalog("ex_vl1"), 3, np.exp(1j * t)) == pytest.approx(0.5, abs=1e-12)


def test_delta_root_at_origin():
    # slice z3 * (something nonvanishing) has its only root at 0
    r = make_rif(parse_poly("2 - z1*z2", 3), (1, 1, 1))
    assert delta(r, 3, (1j, -1)) == pytest.approx(1.0)


def test_roots_agree_with_sympy():
    r = catalog("ex_curve")
    fixed = np.exp(1j * np.array([0.7, -2.1]))
    z3 = sympy.symbols("z3")
    expr = sum(complex(c) * fixed[0] ** e[0] * fixed[1] ** e[1] * z3 ** e[2]
               for e, c in r.p_tilde.terms.items())
    expect = sorted(complex(x) for x in sympy.Poly(expr, z3).nroots(n=30))
    got = sorted(complex(x) for x in slice_roots(r, 3, fixed).roots)
    assert np.allclose(sorted(got, key=abs), sorted(expect, key=abs), atol=1e-12)


@pytest.mark.parametrize("name", catalog_names())
def test_slices_are_inner(name):
    # |phi| = 1 on sampled slices; all roots lie strictly inside the disk
    r = catalog(name)
    rng = np.random.default_rng(11)
    theta = rng.uniform(-np.pi, np.pi, (200, r.nvars))
    vals = r.phi_torus(theta)
    assert np.max(np.abs(np.abs(vals) - 1)) < 1e-10
    for j in range(1, r.nvars + 1):
        d, exc = slice_deltas(r, j, theta[:, 1:])
        assert np.all((d[~exc] > 0) & (d[~exc] <= 1))


@pytest.mark.parametrize("name", catalog_names())
def test_exceptional_slices_are_rare(name):
    r = catalog(name)
    rng = np.random.default_rng(5)
    angles = rng.uniform(-np.pi, np.pi, (20000, r.nvars - 1))
    for j in range(1, r.nvars + 1):
        _, exc = slice_deltas(r, j, angles)
        assert exc.mean() < 1e-3


def test_delta_permutation_invariance():
    # swapping z1 and z2 in p swaps the frozen coordinates of a z3 slice
    r = catalog("ex_curve")
    swapped = make_rif(MultiPoly(3, {(b, a, c): v for (a, b, c), v in r.p.terms.items()}),
                       (1, 2, 1))
    rng = np.random.default_rng(2)
    for t in rng.uniform(-np.pi, np.pi, (10, 2)):
        z = np.exp(1j * t)
        assert delta(r, 3, z) == pytest.approx(delta(swapped, 3, z[::-1]), abs=1e-12)


# ------------------------------------------------------------- realization

CURVE_A = [[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]]
CURVE_Y = [np.diag([1, 1, 0, 0]).tolist(), np.diag([0, 0, 1, 0]).tolist(),
           np.diag([0, 0, 0, 1]).tolist()]


def test_realize_curve_examples():
    r = aty_realize(RealizationInput(CURVE_A, CURVE_Y, [1, 0, 0, 0]))
    assert r.p_tilde == parse_poly(
        "1 - 2*z1 + z1^2 - z2 - 2*z1*z2 - z1^2*z2 + 4*z1^2*z2*z3", 3)
    assert r.p == catalog("ex_curve").p
    r2 = aty_realize(RealizationInput(CURVE_A, CURVE_Y, [0, 0, 0, 1]))
    assert r2.p_tilde == parse_poly(
        "1 - z1 - z1*z2 + z1^2*z2 - 2*z3 - z1*z3 - z1^2*z3 + z2*z3 - z1*z2*z3"
        " + 4*z1^2*z2*z3", 3)
    assert r2.p == catalog("ex_curve2").p


def test_realize_vl2_up_to_unimodular_constant():
    # reproduces the catalog model after z2 -> -z2 and with v = e3
    A = [[0, 1, 0], [1, 0, 1], [0, 1, 0]]
    Ys = [[[1, 0, 0], [0, 0, 0], [0, 0, 0]],
          [[0, 0, 0], [0, 1, 0], [0, 0, Fraction(1, 2)]],
          [[0, 0, 0], [0, 0, 0], [0, 0, Fraction(1, 2)]]]
    r = aty_realize(RealizationInput(A, Ys, [0, 0, 1]))
    flipped = MultiPoly(3, {e: c * (-1) ** e[1] for e, c in r.p.terms.items()})
    target = catalog("ex_vl2").p
    ratio = flipped.coefficient((0, 0, 0)) / target.coefficient((0, 0, 0))
    assert ratio.abs2() == 1
    assert flipped == target * ratio


def test_realization_input_validation():
    with pytest.raises(ValueError):
        RealizationInput([[0, 1], [2, 0]], [np.eye(2).tolist()], [1, 0])
    with pytest.raises(ValueError):
        RealizationInput([[0, 1], [1, 0]], [np.diag([1, 0]).tolist()], [1, 0])


def test_pick_function_maps_upper_half_space_to_itself():
    num, den = pick_function(RealizationInput(CURVE_A, CURVE_Y, [1, 0, 0, 0]))
    rng = np.random.default_rng(0)
    for _ in range(100):
        w = rng.normal(size=3) + 1j * rng.uniform(0.01, 3, 3)
        assert (num(w) / den(w)).imag > 0


def test_reflect_catalog_numerators():
    printed = {
        "ex_iso1": "3*z1*z2*z3 - z1*z2 - z1*z3 - z2*z3",
        "ex_lifted": "2*z1*z2*z3 - z1 - z2",
        "ex_vl2": "-1 + z1 - 2*z1*z2 - z2^2 + 3*z1*z2^2 + z3 + z1*z3 - 2*z2*z3"
                  " - 4*z1*z2*z3 - z2^2*z3 + 5*z1*z2^2*z3",
    }
    for name, text in printed.items():
        r = catalog(name)
        assert reflect(r.p, r.degree) == parse_poly(text, 3)
