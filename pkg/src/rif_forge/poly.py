"""Sparse multivariate polynomials with exact or floating coefficients.

A :class:`MultiPoly` maps exponent tuples to coefficients. In exact mode the
coefficients are :class:`~rif_forge.gaussian.GaussianRational`; in float mode
they are Python ``complex``. Variables are named ``z1 .. zd`` and every public
function that takes a variable index uses that 1-based numbering.

:class:`TrigSeries` holds trigonometric polynomials ``sum_k c_k exp(i k.theta)``
such as ``|p(exp(i theta))|**2``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegreeError, DimensionMismatch, PolySyntaxError
from .gaussian import ONE, ZERO, GaussianRational

__all__ = [
    "MultiPoly",
    "TrigSeries",
    "TaylorTable",
    "parse_poly",
    "render",
    "evaluate",
    "reflect",
    "partial_derivative",
    "univariate_slice",
    "torus_modulus_squared",
    "trig_taylor",
    "exact_angle_sign",
]

Exponent = tuple


def _is_zero(c) -> bool:
    if isinstance(c, GaussianRational):
        return c.is_zero()
    return c == 0


def _to_coeff(c):
    """Normalize a user supplied coefficient (exact types stay exact)."""
    if isinstance(c, GaussianRational):
        return c
    if isinstance(c, (int, Fraction)):
        return GaussianRational(c)
    if isinstance(c, (float, complex, np.floating, np.complexfloating)):
        return complex(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _conj(c):
    return c.conjugate()


class MultiPoly:
    """Immutable sparse polynomial in ``nvars`` variables.

    Parameters
    ----------
    nvars : int
        Number of variables.
    terms : mapping
        Exponent tuple -> coefficient. Zero coefficients are dropped.
    degree : sequence of int, optional
        Declared degree vector. Reflection uses it rather than the actual
        degree, because a factor of a RIF denominator can have lower degree
        than the RIF itself.
    """

    __slots__ = ("nvars", "_terms", "declared_degree", "_numeric")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None,
                 degree: Sequence[int] | None = None):
        if nvars < 0:
            raise DimensionMismatch("nvars must be nonnegative")
        clean: dict[Exponent, object] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise DimensionMismatch(
                    f"exponent {exp} has length {len(exp)}, expected {nvars}")
            if any(e < 0 for e in exp):
                raise DimensionMismatch(f"negative exponent {exp}")
            c = _to_coeff(c)
            if exp in clean:
                c = clean[exp] + c
            clean[exp] = c
        clean = {e: c for e, c in clean.items() if not _is_zero(c)}
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_numeric", None)
        if degree is not None:
            degree = tuple(int(n) for n in degree)
            if len(degree) != nvars:
                raise DimensionMismatch("declared degree has wrong length")
            actual = self.actual_degree()
            if any(a > n for a, n in zip(actual, degree)):
                raise DegreeError(
                    f"declared degree {degree} is below actual degree {actual}")
        object.__setattr__(self, "declared_degree", degree)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # ------------------------------------------------------------ builders
    @classmethod
    def constant(cls, c, nvars: int) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, j: int, nvars: int) -> "MultiPoly":
        """The monomial ``z_j`` (1-based)."""
        _check_index(j, nvars)
        exp = [0] * nvars
        exp[j - 1] = 1
        return cls(nvars, {tuple(exp): 1})

    def with_degree(self, degree: Sequence[int] | None) -> "MultiPoly":
        return MultiPoly(self.nvars, self._terms, degree)

    # ---------------------------------------------------------- properties
    @property
    def terms(self) -> Mapping[Exponent, object]:
        return MappingProxyType(self._terms)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, GaussianRational) for c in self._terms.values())

    def is_zero(self) -> bool:
        return not self._terms

    def actual_degree(self) -> tuple:
        if not self._terms:
            return (0,) * self.nvars
        return tuple(max(e[k] for e in self._terms) for k in range(self.nvars))

    @property
    def degree(self) -> tuple:
        """Declared degree when present, else the actual degree."""
        return self.declared_degree or self.actual_degree()

    def coefficient(self, exp: Sequence[int]):
        return self._terms.get(tuple(exp), ZERO if self.exact else 0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms.items(), key=lambda kv: _order_key(kv[0])))

    # ---------------------------------------------------------- arithmetic
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise DimensionMismatch("polynomials have different nvars")
            return other
        return MultiPoly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return MultiPoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = _to_coeff(other)
            return MultiPoly(self.nvars, {e: v * c for e, v in self._terms.items()})
        other = self._coerce(other)
        out: dict[Exponent, object] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                out[e] = out[e] + prod if e in out else prod
        return MultiPoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = MultiPoly.constant(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self._terms.items())))

    def conjugate_coefficients(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: _conj(c) for e, c in self._terms.items()},
                         self.declared_degree)

    def to_float(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: complex(c) for e, c in self._terms.items()},
                         self.declared_degree)

    def content_normalized(self) -> "MultiPoly":
        """Scale an exact polynomial so its coefficients are coprime integers
        (real and imaginary parts share no common factor)."""
        if not self.exact or not self._terms:
            return self
        den = 1
        for c in self._terms.values():
            den = math.lcm(den, c.re.denominator, c.im.denominator)
        nums = []
        for c in self._terms.values():
            nums += [int(c.re * den), int(c.im * den)]
        g = 0
        for n in nums:
            g = math.gcd(g, n)
        scale = Fraction(den, g)
        return MultiPoly(self.nvars, {e: c * scale for e, c in self._terms.items()},
                         self.declared_degree)

    # ----------------------------------------------------------- structure
    def coefficients_in(self, j: int) -> dict[int, "MultiPoly"]:
        """Group terms by the power of ``z_j``.

        Returns ``{k: a_k}`` with ``self = sum_k a_k * z_j**k`` and each
        ``a_k`` a polynomial in the remaining ``nvars - 1`` variables.
        """
        _check_index(j, self.nvars)
        groups: dict[int, dict] = {}
        for e, c in self._terms.items():
            rest = e[: j - 1] + e[j:]
            groups.setdefault(e[j - 1], {})[rest] = c
        return {k: MultiPoly(self.nvars - 1, t) for k, t in sorted(groups.items())}

    def embed(self, nvars: int, positions: Sequence[int]) -> "MultiPoly":
        """Re-home this polynomial inside a larger variable set.

        ``positions[k]`` is the 1-based target index of variable ``k + 1``.
        """
        out = {}
        for e, c in self._terms.items():
            ne = [0] * nvars
            for k, p in enumerate(positions):
                ne[p - 1] = e[k]
            out[tuple(ne)] = c
        return MultiPoly(nvars, out)

    # ---------------------------------------------------------- evaluation
    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (list, tuple, np.ndarray)):
            point = tuple(point[0])
        return evaluate(self, point)

    def numeric(self) -> "NumericPoly":
        """Vectorized float evaluator (cached)."""
        if self._numeric is None:
            object.__setattr__(self, "_numeric", NumericPoly(self))
        return self._numeric

    # ------------------------------------------------------------- display
    def __repr__(self):
        deg = f", degree={self.declared_degree}" if self.declared_degree else ""
        return f"MultiPoly({self.nvars}, {render(self)!r}{deg})"

    def __str__(self):
        return render(self)

    # ---------------------------------------------------------------- JSON
    def to_json_dict(self) -> dict:
        terms = []
        for e, c in self:
            if isinstance(c, GaussianRational):
                terms.append({"exp": list(e), "re": str(c.re), "im": str(c.im)})
            else:
                terms.append({"exp": list(e), "re": repr(c.real), "im": repr(c.imag)})
        return {"nvars": self.nvars, "degree": list(self.degree), "terms": terms}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "MultiPoly":
        nvars = int(data["nvars"])
        terms = {}
        for t in data["terms"]:
            re_s, im_s = str(t.get("re", "0")), str(t.get("im", "0"))
            try:
                c = GaussianRational(Fraction(re_s), Fraction(im_s))
            except ValueError:
                c = complex(float(re_s), float(im_s))
            e = tuple(t["exp"])
            terms[e] = terms[e] + c if e in terms else c
        return cls(nvars, terms, data.get("degree"))

    @classmethod
    def from_json(cls, text: str) -> "MultiPoly":
        return cls.from_json_dict(json.loads(text))


def _check_index(j: int, nvars: int) -> None:
    if not (1 <= j <= nvars):
        raise DimensionMismatch(f"variable index {j} outside 1..{nvars}")


def _order_key(e: Exponent):
    return (sum(e), tuple(-x for x in e))


# ===================================================================== numeric

class NumericPoly:
    """Float view of a polynomial for batched evaluation with numpy."""

    def __init__(self, p: MultiPoly):
        self.nvars = p.nvars
        items = list(p.terms.items())
        self.exps = np.array([e for e, _ in items], dtype=np.int64).reshape(-1, p.nvars)
        self.coefs = np.array([complex(c) for _, c in items], dtype=complex)
        self.abs_sum = float(np.abs(self.coefs).sum()) if items else 0.0

    def eval(self, z: np.ndarray) -> np.ndarray:
        """Evaluate at complex points ``z`` of shape ``(..., nvars)``."""
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.nvars:
            raise DimensionMismatch("point dimension does not match nvars")
        if self.coefs.size == 0:
            return np.zeros(z.shape[:-1], dtype=complex)
        flat = z.reshape(-1, self.nvars)
        out = np.zeros(flat.shape[0], dtype=complex)
        # powers table per variable, then a product over variables per term
        maxdeg = self.exps.max(axis=0) if self.exps.size else np.zeros(self.nvars, int)
        pows = [flat[:, k, None] ** np.arange(maxdeg[k] + 1) for k in range(self.nvars)]
        for t in range(self.coefs.size):
            term = np.full(flat.shape[0], self.coefs[t])
            for k in range(self.nvars):
                if self.exps[t, k]:
                    term = term * pows[k][:, self.exps[t, k]]
            out += term
        return out.reshape(z.shape[:-1])

    def eval_torus(self, theta: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
        """Evaluate at ``exp(i*theta)`` for real angles of shape ``(..., nvars)``."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.nvars:
            raise DimensionMismatch("angle dimension does not match nvars")
        flat = theta.reshape(-1, self.nvars)
        out = np.empty(flat.shape[0], dtype=complex)
        if self.coefs.size == 0:
            out[:] = 0
            return out.reshape(theta.shape[:-1])
        ef = self.exps.astype(float).T
        for s in range(0, flat.shape[0], chunk):
            block = flat[s:s + chunk]
            out[s:s + chunk] = np.exp(1j * (block @ ef)) @ self.coefs
        return out.reshape(theta.shape[:-1])

    def grad_torus(self, theta: np.ndarray):
        """Value and angle-gradient of ``p(exp(i*theta))``.

        Returns ``(value, grad)`` with ``grad[..., k] = d p / d theta_k``.
        """
        theta = np.asarray(theta, dtype=float)
        flat = theta.reshape(-1, self.nvars)
        if self.coefs.size == 0:
            z = np.zeros(flat.shape[0], complex)
            return z.reshape(theta.shape[:-1]), np.zeros(theta.shape, complex)
        phase = np.exp(1j * (flat @ self.exps.astype(float).T)) * self.coefs
        value = phase.sum(axis=1)
        grad = 1j * phase @ self.exps.astype(float)
        return value.reshape(theta.shape[:-1]), grad.reshape(theta.shape)


# ====================================================================== parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<var>z\d+)|(?P<imag>i)|(?P<op>\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise PolySyntaxError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, nvars: int):
        self.text = text
        self.nvars = nvars
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg: str):
        raise PolySyntaxError(msg, self.peek()[2], self.text)

    def parse(self) -> MultiPoly:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        result = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return result

    def expr(self) -> MultiPoly:
        result = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def _starts_atom(self) -> bool:
        kind, val, _ = self.peek()
        return kind in ("num", "var", "imag") or (kind == "op" and val == "(")

    def term(self) -> MultiPoly:
        result = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                result = result * self.unary()
            elif kind == "op" and val == "/":
                self.take()
                pos = self.peek()[2]
                divisor = self.unary()
                if divisor.is_zero() or any(divisor.actual_degree()):
                    raise PolySyntaxError("division only by nonzero constants", pos, self.text)
                result = result * (ONE / divisor.coefficient((0,) * self.nvars))
            elif self._starts_atom():
                result = result * self.power()  # implicit multiplication
            else:
                return result

    def unary(self) -> MultiPoly:
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            inner = self.unary()
            return inner if val == "+" else -inner
        return self.power()

    def power(self) -> MultiPoly:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val in ("^", "**"):
            self.take()
            kind, num, pos = self.peek()
            if kind != "num" or "." in num:
                self.fail("exponent must be a nonnegative integer")
            self.take()
            return base ** int(num)
        return base

    def atom(self) -> MultiPoly:
        kind, val, pos = self.take()
        if kind == "num":
            return MultiPoly.constant(GaussianRational(Fraction(val)), self.nvars)
        if kind == "imag":
            return MultiPoly.constant(GaussianRational(0, 1), self.nvars)
        if kind == "var":
            j = int(val[1:])
            if not (1 <= j <= self.nvars):
                raise PolySyntaxError(
                    f"variable {val} out of range for {self.nvars} variables", pos, self.text)
            return MultiPoly.variable(j, self.nvars)
        if kind == "op" and val == "(":
            inner = self.expr()
            if self.peek()[1] != ")":
                self.fail("expected ')'")
            self.take()
            return inner
        self.i -= 1
        self.fail("expected a number, variable, 'i' or '('" if kind != "end"
                  else "unexpected end of expression")


def parse_poly(text: str, nvars: int, degree: Sequence[int] | None = None) -> MultiPoly:
    """Parse an expression such as ``"3 - z1 - z2 - z3"`` exactly.

    Supports ``+ - * / ^`` (``**`` also accepted), parentheses, the imaginary
    unit ``i``, integer/decimal/rational constants and implicit
    multiplication (``2z1z2``). Division is only allowed by constants.
    """
    return _Parser(text, nvars).parse().with_degree(degree)


# ===================================================================== render

def _coef_str(c) -> str:
    if isinstance(c, GaussianRational):
        if c.im == 0:
            return str(c.re)
        return f"({c})"
    return f"({c.real!r}{c.imag:+.17g}*i)"


def render(p: MultiPoly) -> str:
    """Human-readable expression that :func:`parse_poly` reads back exactly."""
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p:
        mono = "*".join(f"z{k + 1}" if n == 1 else f"z{k + 1}^{n}"
                        for k, n in enumerate(e) if n)
        negative = isinstance(c, GaussianRational) and c.im == 0 and c.re < 0
        mag = -c if negative else c
        if mono:
            cs = "" if (isinstance(mag, GaussianRational) and mag == ONE) else _coef_str(mag) + "*"
            body = cs + mono
        else:
            body = _coef_str(mag)
        parts.append(("-" if negative else "+", body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# ================================================================ operations

def evaluate(p: MultiPoly, point: Sequence) -> object:
    """Value of ``p`` at ``point``.

    Exact when ``p`` and every coordinate are exact; otherwise complex float.
    The float path uses a nested Horner scheme on the last variable.
    """
    if len(point) != p.nvars:
        raise DimensionMismatch(f"point has length {len(point)}, expected {p.nvars}")
    exact = p.exact and all(isinstance(x, (int, Fraction, GaussianRational)) for x in point)
    if exact:
        pt = [GaussianRational.coerce(x) for x in point]
        total = ZERO
        for e, c in p.terms.items():
            term = c
            for x, k in zip(pt, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total
    pt = [complex(x) for x in point]
    return _horner(p.terms, pt)


def _horner(terms: Mapping, pt: list) -> complex:
    if not terms:
        return 0j
    if len(pt) == 0:
        return complex(next(iter(terms.values())))
    groups: dict[int, dict] = {}
    for e, c in terms.items():
        groups.setdefault(e[-1], {})[e[:-1]] = c
    top = max(groups)
    acc = 0j
    x = pt[-1]
    for k in range(top, -1, -1):
        acc = acc * x + (_horner(groups[k], pt[:-1]) if k in groups else 0j)
    return acc


def reflect(p: MultiPoly, degree: Sequence[int] | None = None) -> MultiPoly:
    """``z**n * conj(p(1/conj(z)))``: coefficient of ``a`` becomes
    ``conj(coefficient of n - a)``."""
    n = tuple(degree) if degree is not None else p.degree
    if len(n) != p.nvars:
        raise DimensionMismatch("degree vector has wrong length")
    actual = p.actual_degree()
    if any(a > k for a, k in zip(actual, n)):
        raise DegreeError(f"reflection degree {n} is below actual degree {actual}")
    terms = {tuple(k - a for k, a in zip(n, e)): _conj(c) for e, c in p.terms.items()}
    return MultiPoly(p.nvars, terms, n)


def partial_derivative(p: MultiPoly, j: int) -> MultiPoly:
    """Formal derivative with respect to ``z_j`` (1-based)."""
    _check_index(j, p.nvars)
    out = {}
    for e, c in p.terms.items():
        k = e[j - 1]
        if k:
            ne = list(e)
            ne[j - 1] -= 1
            out[tuple(ne)] = c * k
    return MultiPoly(p.nvars, out)


@dataclass(frozen=True)
class Slice:
    """Univariate restriction ``c_0 + c_1 z + ... ``."""

    coeffs: list
    effective_degree: int


def univariate_slice(p: MultiPoly, j: int, fixed: Sequence) -> Slice:
    """Coefficients of ``z_j -> p(fixed with z_j inserted)``.

    Trailing zero coefficients are trimmed; the zero polynomial becomes
    ``[0]`` with effective degree 0.
    """
    _check_index(j, p.nvars)
    if len(fixed) != p.nvars - 1:
        raise DimensionMismatch(f"fixed has length {len(fixed)}, expected {p.nvars - 1}")
    groups = p.coefficients_in(j)
    top = max(groups) if groups else 0
    coeffs = [evaluate(groups[k], list(fixed)) if k in groups else
              (ZERO if p.exact else 0j) for k in range(top + 1)]
    while len(coeffs) > 1 and _is_zero(coeffs[-1]):
        coeffs.pop()
    if not coeffs:
        coeffs = [ZERO if p.exact else 0j]
    return Slice(coeffs, len(coeffs) - 1)


# ================================================================ trig series

class TrigSeries:
    """Trigonometric polynomial ``sum_k c_k exp(i k.theta)``, ``k`` in Z^d."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object]):
        self.nvars = nvars
        self.terms = {tuple(k): c for k, c in terms.items() if not _is_zero(c)}

    def is_hermitian(self) -> bool:
        """True when ``c_{-k} == conj(c_k)`` for every ``k``, i.e. real-valued."""
        for k, c in self.terms.items():
            mk = tuple(-x for x in k)
            other = self.terms.get(mk)
            if other is None or other != _conj(c):
                return False
        return True

    def evaluate(self, theta) -> complex:
        theta = np.asarray(theta, dtype=float)
        ks = np.array(list(self.terms.keys()), dtype=float).reshape(-1, self.nvars)
        cs = np.array([complex(c) for c in self.terms.values()])
        return np.exp(1j * (theta @ ks.T)) @ cs if cs.size else np.zeros(theta.shape[:-1])

    def __add__(self, other: "TrigSeries") -> "TrigSeries":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return TrigSeries(self.nvars, out)

    def __neg__(self):
        return TrigSeries(self.nvars, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, TrigSeries) and self.nvars == other.nvars \
            and self.terms == other.terms

    def __repr__(self):
        return f"TrigSeries({self.nvars}, {self.terms!r})"


def torus_modulus_squared(p: MultiPoly) -> TrigSeries:
    """``|p(exp(i theta))|**2`` as an exact trigonometric polynomial."""
    out: dict[Exponent, object] = {}
    items = list(p.terms.items())
    for a, ca in items:
        for b, cb in items:
            k = tuple(x - y for x, y in zip(a, b))
            v = ca * _conj(cb)
            out[k] = out[k] + v if k in out else v
    return TrigSeries(p.nvars, out)


@dataclass(frozen=True)
class TaylorTable:
    """Taylor coefficients around ``center``; keys are exponent tuples of
    ``(theta - center)``."""

    center: tuple
    order: int
    coeffs: dict
    exact: bool
    precision_digits: int | None = None

    def real_part(self) -> dict:
        """Coefficients as Fractions (exact) or floats, dropping zero entries."""
        out = {}
        for k, c in self.coeffs.items():
            v = c.re if isinstance(c, GaussianRational) else float(np.real(c))
            if v != 0:
                out[k] = v
        return out


def exact_angle_sign(angle) -> int | None:
    """``exp(i*angle)`` as an exact integer when the angle is 0 or pi (mod 2pi)."""
    if isinstance(angle, str):
        s = angle.strip().lower()
        if s in ("0", "+0", "-0"):
            return 1
        if s in ("pi", "+pi", "-pi"):
            return -1
        angle = float(s)
    a = float(angle)
    r = math.remainder(a, 2 * math.pi)
    if abs(r) < 1e-15:
        return 1
    if abs(abs(r) - math.pi) < 1e-12:
        return -1
    return None


def parse_angle(text) -> float:
    """Parse ``"pi"``, ``"-pi"``, ``"pi/2"``, ``"2*pi"`` or a float literal."""
    if not isinstance(text, str):
        return float(text)
    s = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"([+-]?\d*(?:\.\d+)?)\*?pi(?:/(\d+(?:\.\d+)?))?", s)
    if m:
        lead = m.group(1)
        mult = -1.0 if lead == "-" else 1.0 if lead in ("", "+") else float(lead)
        div = float(m.group(2)) if m.group(2) else 1.0
        return mult * math.pi / div
    return float(s)


def trig_taylor(t: TrigSeries, center: Sequence, order: int) -> TaylorTable:
    """Taylor expansion of a trigonometric polynomial around ``center``.

    With every center coordinate equal to 0 or pi the expansion is exact:
    ``exp(i k (c + s)) = exp(i k c) * sum_a (i k s)**a / a!`` with
    ``exp(i k c) = +-1``. Other centers are expanded with 50 significant
    digits and the table is marked inexact.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if len(center) != t.nvars:
        raise DimensionMismatch("center has wrong length")
    d = t.nvars
    signs = [exact_angle_sign(c) for c in center]
    center_f = tuple(parse_angle(c) for c in center)
    multi = list(_multi_indices(d, order))
    exact = all(s is not None for s in signs) and all(
        isinstance(c, GaussianRational) for c in t.terms.values())
    if exact:
        fact = [math.factorial(n) for n in range(order + 1)]
        ipow = [GaussianRational(1), GaussianRational(0, 1),
                GaussianRational(-1), GaussianRational(0, -1)]
        coeffs = {}
        for alpha in multi:
            total = ZERO
            for k, c in t.terms.items():
                sign = 1
                num = 1
                for kj, sj, aj in zip(k, signs, alpha):
                    if sj == -1 and kj % 2:
                        sign = -sign
                    num *= kj ** aj
                if num == 0:
                    continue
                total = total + c * (sign * num)
            den = 1
            for aj in alpha:
                den *= fact[aj]
            coeffs[alpha] = total * ipow[sum(alpha) % 4] * Fraction(1, den)
        return TaylorTable(tuple(center_f), order, coeffs, True)

    import mpmath

    with mpmath.workdps(50):
        mcenter = [mpmath.mpf(c) for c in center_f]
        coeffs = {}
        for alpha in multi:
            total = mpmath.mpc(0)
            for k, c in t.terms.items():
                cc = complex(c) if not isinstance(c, GaussianRational) else \
                    mpmath.mpc(mpmath.mpf(c.re.numerator) / c.re.denominator,
                               mpmath.mpf(c.im.numerator) / c.im.denominator)
                phase = mpmath.expj(sum(kj * cj for kj, cj in zip(k, mcenter)))
                term = cc * phase
                for kj, aj in zip(k, alpha):
                    term *= (1j * kj) ** aj / mpmath.factorial(aj)
                total += term
            coeffs[alpha] = complex(total)
    return TaylorTable(tuple(center_f), order, coeffs, False, precision_digits=50)


def _multi_indices(d: int, order: int) -> Iterable[tuple]:
    """All exponent tuples of length ``d`` and total degree at most ``order``."""
    if d == 0:
        yield ()
        return
    for total in range(order + 1):
        yield from _compositions(total, d)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest
