import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from rif_forge.errors import DegreeError, DimensionMismatch, PolySyntaxError
from rif_forge.gaussian import GaussianRational, gr
from rif_forge.poly import (
    MultiPoly, evaluate, parse_poly, partial_derivative, reflect, render, torus_modulus_squared,
    trig_taylor, univariate_slice, TrigSeries,
)

Z = sympy.symbols("z1:4")


def to_sympy(p: MultiPoly):
    expr = 0
    for e, c in p.terms.items():
        coef = sympy.Rational(c.re.numerator, c.re.denominator) + \
            sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)
        expr += coef * sympy.prod([Z[k] ** n for k, n in enumerate(e)])
    return sympy.expand(expr)


def from_sympy(expr, nvars: int) -> MultiPoly:
    poly = sympy.Poly(sympy.expand(expr), *Z[:nvars])
    terms = {}
    for mon, c in poly.terms():
        re, im = sympy.re(c), sympy.im(c)
        terms[mon] = GaussianRational(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
    return MultiPoly(nvars, terms)


# ------------------------------------------------------------------ parsing

def test_parse_iso_denominator():
    p = parse_poly("3 - z1 - z2 - z3", 3)
    assert dict(p.terms) == {(0, 0, 0): 3, (1, 0, 0): -1, (0, 1, 0): -1, (0, 0, 1): -1}


def test_parse_zero_is_empty():
    assert dict(parse_poly("0", 2).terms) == {}


def test_parse_render_roundtrip():
    p = parse_poly("(2 - z1 - z2)", 2)
    assert parse_poly(render(p), 2) == p


def test_parse_features():
    p = parse_poly("2z1z2 + (1+i)*z1^2 - 3/4 + z2**2/2", 2)
    q = MultiPoly(2, {(1, 1): 2, (2, 0): gr(1, 1), (0, 0): Fraction(-3, 4), (0, 2): Fraction(1, 2)})
    assert p == q


def test_parse_errors():
    with pytest.raises(PolySyntaxError) as err:
        parse_poly("3 - * z1", 3)
    assert "position" in str(err.value) or "at" in str(err.value)
    with pytest.raises(PolySyntaxError):
        parse_poly("z4", 3)


# --------------------------------------------------------------- evaluation

def test_evaluate_examples():
    p = parse_poly("3 - z1 - z2 - z3", 3)
    assert evaluate(p, (1, 1, 1)) == 0
    assert evaluate(p, (0, 0, 0)) == 3
    assert evaluate(p, (gr(0, 1), 0, 0)) == gr(3, -1)
    assert evaluate(p, (1j, 0, 0)) == pytest.approx(3 - 1j)
    with pytest.raises(DimensionMismatch):
        evaluate(p, (1, 1))


def test_float_evaluation_matches_sympy():
    p = parse_poly("192 + 48*z3 - 72*z1*z3 + 27*z1^2*z3 + 3*z1^6*z2^2*z3", 3)
    pt = (0.3 + 0.2j, -0.7j, 0.5 - 0.1j)
    expect = complex(to_sympy(p).subs(dict(zip(Z, pt))))
    assert evaluate(p, pt) == pytest.approx(expect, rel=1e-13)
    assert p.numeric().eval(np.array([pt]))[0] == pytest.approx(expect, rel=1e-13)


# --------------------------------------------------------------- reflection

def test_reflect_iso_denominator():
    p = parse_poly("3 - z1 - z2 - z3", 3)
    assert reflect(p, (1, 1, 1)) == parse_poly("3*z1*z2*z3 - z2*z3 - z1*z3 - z1*z2", 3)


def test_reflect_constant_conjugates():
    assert reflect(MultiPoly.constant(gr(2, 5), 2), (0, 0)) == MultiPoly.constant(gr(2, -5), 2)


def test_reflect_matches_sympy_definition():
    p = parse_poly("(1+2i) - z1*z2 + 3/2*z1^2*z3", 3)
    n = (2, 1, 1)
    expr = to_sympy(p)
    conj = sympy.expand(sympy.conjugate(expr.subs({z: 1 / sympy.conjugate(z) for z in Z})))
    oracle = sympy.expand(Z[0] ** 2 * Z[1] * Z[2] * conj)
    assert reflect(p, n) == from_sympy(oracle.subs({sympy.conjugate(z): z for z in Z}), 3)


def test_reflect_degree_too_small():
    with pytest.raises(DegreeError):
        reflect(parse_poly("z1^2", 1), (1,))


# -------------------------------------------------------------- derivatives

def test_partial_derivative_examples():
    p = parse_poly("3 - z1 - z2 - z3", 3)
    assert partial_derivative(p, 3) == MultiPoly.constant(-1, 3)
    assert partial_derivative(parse_poly("z1^2*z2", 2), 1) == parse_poly("2*z1*z2", 2)
    assert partial_derivative(MultiPoly.constant(5, 2), 2).is_zero()
    with pytest.raises(Exception):
        partial_derivative(p, 4)


# ------------------------------------------------------------------- slices

def test_univariate_slice_examples():
    p = parse_poly("3 - z1 - z2 - z3", 3)
    s = univariate_slice(p, 3, (1, 1))
    assert s.coeffs == [1, -1] and s.effective_degree == 1
    s = univariate_slice(parse_poly("z1*z2*z3", 3), 3, (0, 1))
    assert s.coeffs == [0] and s.effective_degree == 0


def test_univariate_slice_printed_polynomials():
    # the printed ex_curve denominator gives [4, -4]; the combined example
    # denominator gives [192, 192]
    curve = parse_poly("4 - z3 - 2*z1*z3 - z1^2*z3 + z2*z3 - 2*z1*z2*z3 + z1^2*z2*z3", 3)
    assert univariate_slice(curve, 3, (1, 1)).coeffs == [4, -4]
    from rif_forge.catalog import catalog_denominator

    assert univariate_slice(catalog_denominator("ex_curveiso"), 3, (1, 1)).coeffs == [192, 192]


# -------------------------------------------------------------- trig series

def test_torus_modulus_one_minus_z():
    t = torus_modulus_squared(parse_poly("1 - z1", 1))
    assert t.terms == {(0,): 2, (1,): -1, (-1,): -1}
    assert torus_modulus_squared(MultiPoly.constant(gr(3, 4), 1)).terms == {(0,): 25}


def test_torus_modulus_iso_constant_term():
    t = torus_modulus_squared(parse_poly("3*z1*z2 - z1 - z2", 2))
    assert t.terms[(0, 0)] == 11
    assert t.terms[(1, 0)] == -3 and t.terms[(-1, 0)] == -3
    assert t.terms[(1, -1)] == 1 and t.terms[(-1, 1)] == 1
    assert t.is_hermitian()


def test_trig_taylor_cosine():
    t = torus_modulus_squared(parse_poly("1 - z1", 1))
    table = trig_taylor(t, (0,), 4)
    assert table.exact
    assert table.real_part() == {(2,): 1, (4,): Fraction(-1, 12)}
    const = trig_taylor(TrigSeries(1, {(0,): gr(7)}), (0,), 5)
    assert const.real_part() == {(0,): 7}


def test_trig_taylor_iso_quadratic():
    # 11 - 6 cos t1 - 6 cos t2 + 2 cos(t1 - t2) = 1 + 3t1^2 + 3t2^2 - (t1 - t2)^2 + ...
    t = torus_modulus_squared(parse_poly("3*z1*z2 - z1 - z2", 2))
    table = trig_taylor(t, (0, 0), 2)
    assert table.real_part() == {(0, 0): 1, (2, 0): 2, (1, 1): 2, (0, 2): 2}


def test_trig_taylor_at_pi_matches_sympy():
    p = parse_poly("2 - z1 + 3*z1*z2^2", 2)
    table = trig_taylor(torus_modulus_squared(p), ("pi", 0), 4)
    t1, t2 = sympy.symbols("t1 t2", real=True)
    f = to_sympy(p).subs({Z[0]: -sympy.exp(sympy.I * t1), Z[1]: sympy.exp(sympy.I * t2)})
    mod2 = sympy.expand(f * sympy.conjugate(f))
    ser = sympy.expand(sympy.series(sympy.series(mod2, t1, 0, 5).removeO(), t2, 0, 5).removeO())
    poly = sympy.Poly(ser, t1, t2)
    expect = {m: sympy.nsimplify(c) for m, c in poly.terms() if sum(m) <= 4}
    got = table.real_part()
    for m, c in expect.items():
        assert got.get(m, 0) == Fraction(int(c.p), int(c.q))
    assert set(got) <= set(expect)


def test_trig_taylor_generic_center_is_flagged():
    t = torus_modulus_squared(parse_poly("1 - z1", 1))
    table = trig_taylor(t, (0.3,), 2)
    assert not table.exact and table.precision_digits == 50
    assert table.real_part()[(1,)] == pytest.approx(2 * math.sin(0.3), rel=1e-14)


# --------------------------------------------------------------------- JSON

def test_json_roundtrip():
    p = parse_poly("(1/2 - i/3) + z1*z2^2 - 7*z2", 2, degree=(2, 3))
    q = MultiPoly.from_json(p.to_json())
    assert q == p and q.declared_degree == (2, 3)


# ------------------------------------------------------------- properties

small_fractions = st.builds(Fraction, st.integers(-50, 50), st.integers(1, 20))
coef = st.builds(GaussianRational, small_fractions,
                 small_fractions)


@st.composite
def polys(draw, nvars=3, top=2):
    exps = draw(st.lists(st.tuples(*[st.integers(0, top)] * nvars), min_size=1, max_size=8))
    return MultiPoly(nvars, {e: draw(coef) for e in exps})


@given(polys())
def test_reflection_involution(p):
    n = (2, 2, 2)
    assert reflect(reflect(p, n), n) == p


@given(polys())
def test_reflection_preserves_torus_modulus_exactly(p):
    n = (2, 2, 2)
    assert torus_modulus_squared(reflect(p, n)) == torus_modulus_squared(p)


@settings(max_examples=30)
@given(polys(), st.lists(st.floats(-np.pi, np.pi), min_size=3, max_size=3))
def test_reflection_preserves_torus_modulus_numerically(p, theta):
    zeta = np.exp(1j * np.array(theta))
    a = abs(evaluate(p, tuple(zeta)))
    b = abs(evaluate(reflect(p, (2, 2, 2)), tuple(zeta)))
    assert b == pytest.approx(a, abs=1e-12 * max(1.0, a))


@given(polys())
def test_modulus_series_is_hermitian(p):
    assert torus_modulus_squared(p).is_hermitian()


@given(polys())
def test_render_roundtrip_property(p):
    assert parse_poly(render(p), 3) == p


@settings(max_examples=15, deadline=None)
@given(polys(nvars=2, top=2), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_trig_taylor_matches_finite_differences(p, a, b):
    # second-order mixed partials from the table against central differences
    t = torus_modulus_squared(p)
    table = trig_taylor(t, (0, 0), 2).real_part()
    h = 1e-3
    f = lambda x, y: float(np.real(t.evaluate(np.array([x, y]))))  # noqa: E731
    f0 = f(0, 0)
    fx = (f(h, 0) - f(-h, 0)) / (2 * h)
    fxx = (f(h, 0) - 2 * f0 + f(-h, 0)) / h ** 2
    fxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h ** 2)
    scale = max(1.0, sum(abs(complex(c)) for c in t.terms.values()))
    assert float(table.get((0, 0), 0)) == pytest.approx(f0, abs=1e-12 * scale)
    assert float(table.get((1, 0), 0)) == pytest.approx(fx, abs=1e-6 * scale)
    assert float(table.get((2, 0), 0)) == pytest.approx(fxx / 2, abs=1e-5 * scale)
    assert float(table.get((1, 1), 0)) == pytest.approx(fxy, abs=1e-5 * scale)
