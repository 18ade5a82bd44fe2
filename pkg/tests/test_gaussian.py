from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rif_forge.gaussian import GaussianRational, gr

fractions = st.builds(Fraction, st.integers(-1000, 1000), st.integers(1, 50))
gaussians = st.builds(GaussianRational, fractions, fractions)


def test_canonical_form():
    z = GaussianRational(Fraction(4, 6), Fraction(-3, 9))
    assert z.re == Fraction(2, 3) and z.im == Fraction(-1, 3)
    assert z.re.denominator > 0
    assert GaussianRational(1, 2) == gr(1, 2)
    assert hash(GaussianRational(Fraction(2, 4))) == hash(GaussianRational(Fraction(1, 2)))


def test_basic_arithmetic_against_complex():
    a, b = gr(1, 2), gr(Fraction(1, 3), -1)
    assert complex(a * b) == pytest.approx((1 + 2j) * (1 / 3 - 1j))
    assert complex(a / b) == pytest.approx((1 + 2j) / (1 / 3 - 1j))
    assert a.conjugate() == gr(1, -2)
    assert a.abs2() == 5


def test_predicates():
    assert gr(0).is_zero()
    assert gr(3).is_real()
    assert gr(2, -5).is_gaussian_integer()
    assert not gr(Fraction(1, 2)).is_gaussian_integer()


def test_from_complex_recovers_simple_values():
    assert GaussianRational.from_complex(0.5 - 0.25j) == gr(Fraction(1, 2), Fraction(-1, 4))


@given(gaussians, gaussians)
def test_field_axioms(a, b):
    assert a + b == b + a
    assert a * b == b * a
    assert (a - b) + b == a
    if not b.is_zero():
        assert (a / b) * b == a
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert (a * a.conjugate()) == GaussianRational(a.abs2())
