"""Truncated multivariate power series with exact coefficients.

Used for Taylor expansions of real-analytic densities around a torus point,
where the expansion variables are real angle offsets. Because the variables
are real, complex conjugation of a series acts coefficient-wise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .gaussian import ZERO, GaussianRational
from .poly import _multi_indices


def _zero_like(c):
    return ZERO if isinstance(c, GaussianRational) else 0j


@dataclass(frozen=True)
class TruncatedSeries:
    """``sum_a c_a t**a`` over exponent tuples with ``|a| <= order``."""

    nvars: int
    order: int
    coeffs: Mapping[tuple, object] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for a, c in self.coeffs.items():
            if sum(a) <= self.order and not _iszero(c):
                clean[tuple(a)] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def constant(cls, c, nvars: int, order: int) -> "TruncatedSeries":
        return cls(nvars, order, {(0,) * nvars: c})

    def __getitem__(self, a) -> object:
        return self.coeffs.get(tuple(a), ZERO)

    def constant_term(self):
        return self[(0,) * self.nvars]

    def valuation(self) -> int | None:
        """Lowest total degree carrying a nonzero coefficient."""
        return min((sum(a) for a in self.coeffs), default=None)

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out[a] + c if a in out else c
        return TruncatedSeries(self.nvars, min(self.order, other.order), out)

    def __neg__(self):
        return TruncatedSeries(self.nvars, self.order, {a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.order, {a: c * s for a, c in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        order = min(self.order, other.order)
        out: dict = {}
        for a, ca in self.coeffs.items():
            da = sum(a)
            for b, cb in other.coeffs.items():
                if da + sum(b) > order:
                    continue
                k = tuple(x + y for x, y in zip(a, b))
                v = ca * cb
                out[k] = out[k] + v if k in out else v
        return TruncatedSeries(self.nvars, order, out)

    __rmul__ = __mul__

    def conjugate(self) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.order,
                               {a: c.conjugate() for a, c in self.coeffs.items()})

    def reciprocal(self) -> "TruncatedSeries":
        """``1/self`` via the geometric series in the non-constant part."""
        c0 = self.constant_term()
        if _iszero(c0):
            raise ZeroDivisionError("series with zero constant term is not invertible")
        inv0 = 1 / c0
        h = (self - TruncatedSeries.constant(c0, self.nvars, self.order)).scale(-inv0)
        total = TruncatedSeries.constant(1, self.nvars, self.order)
        power = total
        for _ in range(self.order):
            power = power * h
            if not power.coeffs:
                break
            total = total + power
        return total.scale(inv0)

    def __truediv__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self * other.reciprocal()

    def compose_poly(self, coefficients: list) -> "TruncatedSeries":
        """Evaluate ``sum_j coefficients[j] * self**j`` (Horner), where each
        coefficient is itself a series."""
        acc = TruncatedSeries(self.nvars, self.order, {})
        for c in reversed(coefficients):
            acc = acc * self + c
        return acc

    def real_table(self) -> dict[tuple, Fraction]:
        """Real parts of all coefficients up to ``order`` (zeros omitted)."""
        out = {}
        for a in _multi_indices(self.nvars, self.order):
            c = self[a]
            v = c.re if isinstance(c, GaussianRational) else c.real
            if v != 0:
                out[a] = v
        return out

    def max_imag(self):
        """Largest absolute imaginary part among coefficients."""
        vals = [abs(c.im) if isinstance(c, GaussianRational) else abs(c.imag)
                for c in self.coeffs.values()]
        return max(vals, default=0)


def _iszero(c) -> bool:
    if isinstance(c, GaussianRational):
        return c.is_zero()
    return c == 0
