"""Rational inner functions from Hermitian matrix realizations.

Given a Hermitian ``A``, positive semidefinite ``Y_1..Y_d`` summing to the
identity and a vector ``v``, the Pick function

    f(w) = < (A - sum_k w_k Y_k)^{-1} v, v >

maps the poly-upper half-plane into the upper half-plane. Substituting
``w_k = i (1 - z_k) / (1 + z_k)`` and applying ``(i - f) / (i + f)`` gives a
rational inner function on the polydisk. Everything here is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DegenerateRealization, RealizationMismatch
from .gaussian import ONE, ZERO, GaussianRational
from .poly import MultiPoly, reflect
from .rif import RIFModel, make_rif

__all__ = ["RealizationInput", "aty_realize", "pick_function", "mobius_to_halfplane"]


def _exact(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    if isinstance(x, str):
        return GaussianRational(Fraction(x))
    if isinstance(x, (np.integer,)):
        return GaussianRational(int(x))
    if isinstance(x, (float, np.floating)) and float(x).is_integer():
        return GaussianRational(int(x))
    raise TypeError(f"realization entries must be exact, got {x!r}")


def _matrix(m) -> list[list[GaussianRational]]:
    return [[_exact(x) for x in row] for row in m]


@dataclass(frozen=True)
class RealizationInput:
    """Exact realization data; validated on construction."""

    A: tuple
    Ys: tuple
    v: tuple

    def __init__(self, A, Ys, v):
        A = _matrix(A)
        Ys = [_matrix(Y) for Y in Ys]
        v = [_exact(x) for x in v]
        k = len(A)
        if any(len(row) != k for row in A) or len(v) != k:
            raise ValueError("A must be square and match the length of v")
        for Y in Ys:
            if len(Y) != k or any(len(row) != k for row in Y):
                raise ValueError("every Y must have the shape of A")
        for i in range(k):
            for j in range(k):
                if A[i][j] != A[j][i].conjugate():
                    raise ValueError("A is not Hermitian")
                total = sum((Y[i][j] for Y in Ys), ZERO)
                if total != (ONE if i == j else ZERO):
                    raise ValueError("the Y matrices do not sum to the identity")
                for Y in Ys:
                    if Y[i][j] != Y[j][i].conjugate():
                        raise ValueError("a Y matrix is not Hermitian")
        for Y in Ys:
            eig = np.linalg.eigvalsh(np.array([[complex(x) for x in row] for row in Y]))
            if eig.min() < -1e-12:
                raise ValueError("a Y matrix is not positive semidefinite")
        object.__setattr__(self, "A", tuple(tuple(r) for r in A))
        object.__setattr__(self, "Ys", tuple(tuple(tuple(r) for r in Y) for Y in Ys))
        object.__setattr__(self, "v", tuple(v))

    @property
    def size(self) -> int:
        return len(self.A)

    @property
    def nvars(self) -> int:
        return len(self.Ys)


def _determinant(M: list[list[MultiPoly]]) -> MultiPoly:
    """Laplace expansion along rows, memoized over the remaining columns."""
    k = len(M)
    nvars = M[0][0].nvars

    @lru_cache(maxsize=None)
    def minor(row: int, cols: int) -> MultiPoly:
        if row == k:
            return MultiPoly.constant(1, nvars)
        total = MultiPoly(nvars)
        sign = 1
        for c in range(k):
            if not cols >> c & 1:
                continue
            entry = M[row][c]
            if not entry.is_zero():
                sub = minor(row + 1, cols & ~(1 << c))
                total = total + entry * sub if sign > 0 else total - entry * sub
            sign = -sign
        return total

    return minor(0, (1 << k) - 1)


def pick_function(inp: RealizationInput) -> tuple[MultiPoly, MultiPoly]:
    """Numerator and denominator of ``f`` as polynomials in ``w``.

    Uses ``<adj(M) v, v> = det(M + v v*) - det(M)`` so only determinants are
    needed.
    """
    k, d = inp.size, inp.nvars
    w = [MultiPoly.variable(j + 1, d) for j in range(d)]

    def build(extra: bool) -> list[list[MultiPoly]]:
        rows = []
        for i in range(k):
            row = []
            for j in range(k):
                entry = MultiPoly.constant(inp.A[i][j], d)
                for Y, wj in zip(inp.Ys, w):
                    if not Y[i][j].is_zero():
                        entry = entry - wj * Y[i][j]
                if extra:
                    entry = entry + MultiPoly.constant(inp.v[i] * inp.v[j].conjugate(), d)
                row.append(entry)
            rows.append(row)
        return rows

    det = _determinant(build(False))
    num = _determinant(build(True)) - det
    return num, det


def mobius_to_halfplane(P: MultiPoly, degrees: Sequence[int]) -> MultiPoly:
    """``prod_k (1 + z_k)**r_k * P(i (1 - z)/(1 + z))`` as a polynomial in z."""
    d = P.nvars
    up = []
    down = []
    for j in range(d):
        z = MultiPoly.variable(j + 1, d)
        a = (MultiPoly.constant(1, d) - z) * GaussianRational(0, 1)
        b = MultiPoly.constant(1, d) + z
        up.append([a ** n for n in range(degrees[j] + 1)])
        down.append([b ** n for n in range(degrees[j] + 1)])
    out = MultiPoly(d)
    for alpha, c in P.terms.items():
        term = MultiPoly.constant(c, d)
        for j, a in enumerate(alpha):
            term = term * up[j][a] * down[j][degrees[j] - a]
        out = out + term
    return out


def _divide_by_one_plus(P: MultiPoly, j: int) -> MultiPoly | None:
    """Exact quotient ``P / (1 + z_j)`` or None when not divisible."""
    groups = P.coefficients_in(j)
    if not groups:
        return None
    top = max(groups)
    coeffs = [groups.get(k, MultiPoly(P.nvars - 1)) for k in range(top + 1)]
    # synthetic division by (z + 1), highest power first
    quot = [None] * top
    carry = MultiPoly(P.nvars - 1)
    for k in range(top, 0, -1):
        carry = coeffs[k] - carry if k != top else coeffs[k]
        quot[k - 1] = carry
    if not (coeffs[0] - carry).is_zero():
        return None
    out = MultiPoly(P.nvars)
    pos = [i for i in range(1, P.nvars + 1) if i != j]
    zj = MultiPoly.variable(j, P.nvars)
    for k, q in enumerate(quot):
        out = out + q.embed(P.nvars, pos) * zj ** k
    return out


def _phase_rotation(lam: GaussianRational) -> GaussianRational:
    """A Gaussian rational ``mu`` with ``conj(mu) / mu == lam``."""
    if lam == GaussianRational(-1):
        return GaussianRational(0, 1)
    return ONE + lam.conjugate()


def aty_realize(inp: RealizationInput, grid: int | None = None) -> RIFModel:
    """Rational inner function of a matrix realization, computed exactly.

    The result satisfies ``phi = p_tilde / p`` with ``p_tilde = reflect(p)``.
    When the realized quotient is ``lam * reflect(p) / p`` for a unimodular
    ``lam`` other than 1, ``p`` is multiplied by a Gaussian rational ``mu``
    with ``conj(mu)/mu = lam`` so the convention still holds. Coefficients are
    finally scaled to coprime integers.
    """
    num_w, den_w = pick_function(inp)
    if num_w.is_zero():
        raise DegenerateRealization("the realized Pick function vanishes identically")
    d = inp.nvars
    degs = [max(num_w.actual_degree()[j], den_w.actual_degree()[j]) for j in range(d)]
    N = mobius_to_halfplane(num_w, degs)
    D = mobius_to_halfplane(den_w, degs)
    i_unit = GaussianRational(0, 1)
    denom = D * i_unit + N
    numer = D * i_unit - N
    for j in range(1, d + 1):
        while True:
            qd, qn = _divide_by_one_plus(denom, j), _divide_by_one_plus(numer, j)
            if qd is None or qn is None:
                break
            denom, numer = qd, qn
    degree = tuple(max(a, b) for a, b in zip(denom.actual_degree(), numer.actual_degree()))
    if not any(degree):
        raise DegenerateRealization("the realized function is constant")
    refl = reflect(denom, degree)
    anchor = next(iter(refl.terms))
    lam = numer.coefficient(anchor) / refl.coefficient(anchor)
    if numer != refl * lam or lam.abs2() != 1:
        raise RealizationMismatch("realized numerator is not a unimodular multiple of "
                                  "the reflected denominator")
    p = denom * _phase_rotation(lam) if lam != ONE else denom
    p = p.content_normalized()
    lead = p.coefficient((0,) * d)
    if lead.is_zero():
        lead = next(iter(p))[1]
    if lead.re < 0 or (lead.re == 0 and lead.im < 0):
        p = -p
    return make_rif(p, degree, grid=grid)
