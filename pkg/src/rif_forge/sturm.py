"""Exact univariate polynomial helpers over the rationals.

Polynomials are lists of :class:`fractions.Fraction`, constant term first.
Used to count real roots with multiplicity for edge polynomials of a Newton
polygon.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Poly = list


def trim(a: Sequence) -> Poly:
    out = [Fraction(x) for x in a]
    while out and out[-1] == 0:
        out.pop()
    return out


def derivative(a: Sequence) -> Poly:
    return trim([k * a[k] for k in range(1, len(a))])


def divmod_poly(a: Sequence, b: Sequence) -> tuple[Poly, Poly]:
    a, b = trim(a), trim(b)
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        factor = r[-1] / b[-1]
        q[shift] = factor
        for i, c in enumerate(b):
            r[i + shift] -= factor * c
        r = trim(r)
    return trim(q), r


def gcd(a: Sequence, b: Sequence) -> Poly:
    """Monic greatest common divisor."""
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_poly(a, b)[1]
    if not a:
        return []
    return [c / a[-1] for c in a]


def squarefree_decomposition(a: Sequence) -> list[Poly]:
    """Yun's algorithm: returns ``[f1, f2, ...]`` with ``a = c * prod fi**i``
    and each ``fi`` square-free and pairwise coprime."""
    a = trim(a)
    if len(a) <= 1:
        return []
    da = derivative(a)
    g = gcd(a, da)
    b = divmod_poly(a, g)[0]
    c = divmod_poly(da, g)[0]
    d = [x - y for x, y in _pad(c, derivative(b))]
    factors = []
    while len(b) > 1:
        g = gcd(b, d)
        factors.append(g)
        b = divmod_poly(b, g)[0]
        c = divmod_poly(d, g)[0]
        d = [x - y for x, y in _pad(c, derivative(b))]
        d = trim(d)
    while factors and len(factors[-1]) <= 1:
        factors.pop()
    return factors


def _pad(a: Sequence, b: Sequence):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return zip(a, b)


def sturm_sequence(a: Sequence) -> list[Poly]:
    seq = [trim(a), derivative(a)]
    while seq[-1]:
        r = divmod_poly(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _sign_changes(values) -> int:
    signs = [v for v in values if v != 0]
    return sum(1 for x, y in zip(signs, signs[1:]) if (x > 0) != (y > 0))


def _sign_at_infinity(p: Poly, positive: bool) -> int:
    lead = p[-1]
    deg = len(p) - 1
    s = 1 if lead > 0 else -1
    if not positive and deg % 2:
        s = -s
    return s


def count_real_roots(a: Sequence) -> int:
    """Number of distinct real roots (Sturm's theorem on the whole line)."""
    a = trim(a)
    if len(a) <= 1:
        return 0
    seq = sturm_sequence(a)
    lo = _sign_changes([_sign_at_infinity(s, False) for s in seq])
    hi = _sign_changes([_sign_at_infinity(s, True) for s in seq])
    return lo - hi


def max_real_multiplicity(a: Sequence, exclude_zero: bool = True) -> int:
    """Largest multiplicity of a real root of ``a`` (0 when none).

    With ``exclude_zero`` a root at the origin is ignored.
    """
    best = 0
    for mult, f in enumerate(squarefree_decomposition(a), start=1):
        n = count_real_roots(f)
        if exclude_zero and f and f[0] == 0:
            n -= 1
        if n > 0:
            best = mult
    return best
