"""Nontangential boundary values of degree ``(m, n, 1)`` RIFs.

Write ``p = p1 + z3 p2`` so that ``phi = (z3 p1_tilde + p2_tilde) / (p1 + z3 p2)``.
Over a torus pair ``(t1, t2)`` there are three situations:

* ``|p2| < |p1|``: no torus zero above the pair (case ``A``), ``phi`` is
  continuous there and its value is ``phi(tau)``;
* ``|p2| = |p1| != 0``: exactly one torus zero (case ``B``), and the boundary
  value is ``p2_tilde / p1`` for every ``t3``;
* ``p1 = p2 = 0``: a vertical line (case ``C``). The radial limit ``mu`` of
  ``p2_tilde / p1`` decides between a constant value (``C1``, ``|mu| = 1``)
  and a Moebius map in ``t3`` (``C2``, ``|mu| < 1``).

Radial limits are evaluated in extended precision and extrapolated with one
Richardson step. At pairs of angles that are multiples of ``pi/2`` the
cancelled univariate quotient gives an independent exact value for ``mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import config
from .errors import ExtrapolationUnstable
from .gaussian import GaussianRational
from .poly import MultiPoly, parse_angle
from .rif import RIFModel, mn1_split

__all__ = ["BoundaryReport", "boundary_value", "radial_limit", "radial_phi_limit",
           "exact_radial_limit", "case_b_points", "zero_value_correspondence"]

_DPS = 40
_CASE_TOL = 1e-9


@dataclass
class BoundaryReport:
    """Boundary value of ``phi`` at a torus point.

    Attributes
    ----------
    point : tuple of float
        Angles ``(t1, t2, t3)``.
    case : str
        ``"A"``, ``"B"``, ``"C1"`` or ``"C2"``.
    value : complex
        Boundary value at ``point``. In case ``C2`` it is the Moebius map
        ``(t3 a + b) / (1 + t3 a conj(b))`` evaluated at the given ``t3``.
    alpha_beta : tuple of complex or None
        ``(a, b)``: radial limits of ``p1_tilde / p1`` and ``p2_tilde / p1``
        (case ``C`` only); ``b`` equals ``mu``.
    mu : complex or None
    radial : list of dict
        Radial estimates of ``mu`` with their Richardson extrapolations.
    alternative : str or None
        The other classification when ``|mu|`` sits within ``1e-7`` of the
        ``C1``/``C2`` threshold.
    outliers : list of float
        ``C1`` only: sampled ``t3`` whose direct radial limit differs from
        ``mu`` by more than ``1e-6`` (at most one is expected).
    injective : bool or None
        ``C2`` only: the map ``t3 -> value`` separates 64 sampled ``t3``.
    mu_exact : GaussianRational or None
        ``mu`` from the cancelled univariate quotient, when the pair is
        exactly representable.
    """

    point: tuple
    case: str
    value: complex
    alpha_beta: tuple | None = None
    mu: complex | None = None
    radial: list = field(default_factory=list)
    alternative: str | None = None
    outliers: list = field(default_factory=list)
    injective: bool | None = None
    mu_exact: GaussianRational | None = None

    def value_at(self, t3: float) -> complex:
        """Boundary value at ``(t1, t2, t3)`` for the same torus pair."""
        if self.case in ("B", "C1"):
            return self.value
        if self.case == "A":
            raise ValueError("case A values depend on the pair; call boundary_value again")
        a, b = self.alpha_beta
        w = complex(np.exp(1j * t3))
        return (w * a + b) / (1 + w * a * np.conj(b))

    def tau3_for(self, lam: complex) -> float:
        """Angle ``t3`` at which the case ``C2`` boundary value equals ``lam``."""
        if self.case != "C2":
            raise ValueError("only case C2 hits every unimodular value exactly once")
        a, b = self.alpha_beta
        return float(np.angle((lam - b) / (a * (1 - lam * np.conj(b)))))

    def to_json_dict(self) -> dict:
        def c(z):
            return None if z is None else [float(np.real(z)), float(np.imag(z))]

        return {
            "point": [float(x) for x in self.point],
            "case": self.case,
            "value": c(self.value),
            "alpha_beta": None if self.alpha_beta is None else [c(z) for z in self.alpha_beta],
            "mu": c(self.mu),
            "radial": self.radial,
            "alternative": self.alternative,
            "outliers": list(self.outliers),
            "injective": self.injective,
            "mu_exact": None if self.mu_exact is None else str(self.mu_exact),
        }


# ------------------------------------------------------------------ helpers

def _unit(angle: float):
    """``exp(i angle)`` in extended precision, exact at multiples of pi/2."""
    q = angle / (math.pi / 2)
    k = round(q)
    if abs(q - k) < 1e-14:
        return [mpmath.mpc(1, 0), mpmath.mpc(0, 1), mpmath.mpc(-1, 0), mpmath.mpc(0, -1)][k % 4]
    return mpmath.expj(mpmath.mpf(angle))


def _mp_coef(c):
    if isinstance(c, GaussianRational):
        return mpmath.mpc(_mp_frac(c.re), _mp_frac(c.im))
    if isinstance(c, Fraction):
        return mpmath.mpc(_mp_frac(c), 0)
    return mpmath.mpc(complex(c))


def _mp_frac(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def _mp_eval(p: MultiPoly, point: Sequence) -> mpmath.mpc:
    total = mpmath.mpc(0)
    for e, c in p.terms.items():
        term = _mp_coef(c)
        for x, k in zip(point, e):
            if k:
                term *= x ** k
        total += term
    return total


def _angles(tau) -> tuple:
    return tuple(parse_angle(t) for t in tau)


def _richardson(est: list, steps: list) -> list:
    """One Richardson step for an error linear in ``1 - r``."""
    out = []
    for k in range(1, len(est)):
        s0, s1 = steps[k - 1], steps[k]
        out.append((s0 * est[k] - s1 * est[k - 1]) / (s0 - s1))
    return out


def _check_settled(extrap: list, what: str) -> None:
    diffs = [abs(extrap[k] - extrap[k - 1]) for k in range(len(extrap) - 2, len(extrap))]
    if max(diffs) > config.RADIAL_OSCILLATION:
        raise ExtrapolationUnstable(
            f"radial estimates of {what} still move by {float(max(diffs)):.3g} at r = 1 - 1e-8")


# ------------------------------------------------------------ radial limits

def radial_limit(num: MultiPoly, den: MultiPoly, pair: Sequence[float],
                 powers: Sequence[int] = config.RADIAL_POWERS) -> tuple[complex, list]:
    """Radial limit of ``num / den`` at the torus pair ``exp(i*pair)``.

    Evaluates at ``r = 1 - 10**-k`` in 40-digit arithmetic and applies one
    Richardson step.

    Returns
    -------
    limit : complex
    table : list of dict
        ``{"r", "estimate", "extrapolated"}`` per radius.

    Raises
    ------
    ExtrapolationUnstable
        If the last extrapolated estimates still move by more than ``1e-4``.
    """
    with mpmath.workdps(_DPS):
        units = [_unit(t) for t in pair]
        steps = [mpmath.mpf(10) ** (-k) for k in powers]
        est = []
        for s in steps:
            pt = [(1 - s) * u for u in units]
            est.append(_mp_eval(num, pt) / _mp_eval(den, pt))
        extrap = _richardson(est, steps)
        _check_settled(extrap, "the radial quotient")
        table = [{"r": float(1 - s), "estimate": [float(e.real), float(e.imag)],
                  "extrapolated": None if k == 0 else
                  [float(extrap[k - 1].real), float(extrap[k - 1].imag)]}
                 for k, (s, e) in enumerate(zip(steps, est))]
        return complex(extrap[-1]), table


def _exact_unit(angle: float):
    q = angle / (math.pi / 2)
    k = round(q)
    if abs(q - k) >= 1e-14:
        return None
    return [GaussianRational(1), GaussianRational(0, 1), GaussianRational(-1),
            GaussianRational(0, -1)][k % 4]


def _radial_coefficients(p: MultiPoly, units: Sequence) -> list:
    """Coefficients in ``r`` of ``p(r * units)``, lowest first."""
    out = [GaussianRational(0)] * (sum(p.degree) + 1)
    for e, c in p.terms.items():
        term = GaussianRational.coerce(c)
        for u, k in zip(units, e):
            if k:
                term = term * u ** k
        out[sum(e)] = out[sum(e)] + term
    return out


def _deflate_at_one(coeffs: list) -> list:
    """Quotient of the polynomial by ``r - 1`` (synthetic division)."""
    n = len(coeffs) - 1
    q = [GaussianRational(0)] * n
    acc = GaussianRational(0)
    for k in range(n, 0, -1):
        acc = acc + coeffs[k]
        q[k - 1] = acc
    return q


def exact_radial_limit(num: MultiPoly, den: MultiPoly, pair: Sequence[float]):
    """Radial limit of ``num / den`` by cancelling powers of ``r - 1``.

    Only available for exact polynomials at pairs of angles that are
    multiples of ``pi/2``; returns ``None`` otherwise.
    """
    units = [_exact_unit(t) for t in pair]
    if any(u is None for u in units) or not (num.exact and den.exact):
        return None
    a = _radial_coefficients(num, units)
    b = _radial_coefficients(den, units)
    if all(c.is_zero() for c in b):
        return None
    while sum(b, GaussianRational(0)).is_zero():
        if not sum(a, GaussianRational(0)).is_zero():
            return None  # the quotient is unbounded along the radius
        a, b = _deflate_at_one(a), _deflate_at_one(b)
    return sum(a, GaussianRational(0)) / sum(b, GaussianRational(0))


def radial_phi_limit(r: RIFModel, tau: Sequence, powers: Sequence[int] = config.RADIAL_POWERS
                     ) -> complex:
    """Limit of ``phi(r * tau)`` as ``r -> 1``, computed directly from ``p``."""
    with mpmath.workdps(_DPS):
        units = [_unit(t) for t in _angles(tau)]
        steps = [mpmath.mpf(10) ** (-k) for k in powers]
        est = []
        for s in steps:
            pt = [(1 - s) * u for u in units]
            est.append(_mp_eval(r.p_tilde, pt) / _mp_eval(r.p, pt))
        extrap = _richardson(est, steps)
        _check_settled(extrap, "phi")
        return complex(extrap[-1])


# ----------------------------------------------------------------- classify

def boundary_value(r: RIFModel, tau: Sequence, radial_grid: Sequence[int] = config.RADIAL_POWERS,
                   samples: int = 64) -> BoundaryReport:
    """Classify and evaluate the boundary value of ``phi`` at ``tau``.

    Parameters
    ----------
    r : RIFModel
        Degree ``(m, n, 1)``.
    tau : sequence of three angles
        Floats or strings such as ``"pi"``.
    radial_grid : sequence of int
        Exponents ``k`` of the radii ``1 - 10**-k`` used in case ``C``.
    samples : int
        Number of ``t3`` values for the ``C1`` outlier scan and the ``C2``
        injectivity check.

    Raises
    ------
    DegreeMismatch
        If ``r`` is not of degree ``(m, n, 1)``.
    ExtrapolationUnstable
    """
    split = mn1_split(r)
    t = _angles(tau)
    if len(t) != 3:
        raise ValueError("tau must have three angles")
    pair = t[:2]
    with mpmath.workdps(_DPS):
        units = [_unit(x) for x in pair]
        a = complex(_mp_eval(split.p1, units))
        b = complex(_mp_eval(split.p2, units))
    tol = _CASE_TOL * r.scale
    if abs(a) < tol and abs(b) < tol:
        return _case_c(r, split, t, radial_grid, samples)
    if abs(abs(a) - abs(b)) < tol:
        with mpmath.workdps(_DPS):
            value = complex(_mp_eval(split.p2_tilde, units)) / a
        return BoundaryReport(t, "B", value)
    with mpmath.workdps(_DPS):
        pt = units + [_unit(t[2])]
        value = complex(_mp_eval(r.p_tilde, pt) / _mp_eval(r.p, pt))
    return BoundaryReport(t, "A", value)


def _case_c(r, split, t, radial_grid, samples) -> BoundaryReport:
    pair = t[:2]
    alpha, _ = radial_limit(split.p1_tilde, split.p1, pair, radial_grid)
    mu, table = radial_limit(split.p2_tilde, split.p1, pair, radial_grid)
    exact = exact_radial_limit(split.p2_tilde, split.p1, pair)
    threshold = 1 - config.C1_THRESHOLD
    case = "C1" if abs(mu) > threshold else "C2"
    alternative = None
    if abs(abs(mu) - threshold) < config.C1_BAND:
        alternative = "C2" if case == "C1" else "C1"
    t3s = np.linspace(-np.pi, np.pi, samples, endpoint=False)
    if case == "C1":
        outliers = []
        for s in t3s:
            try:
                v = radial_phi_limit(r, (pair[0], pair[1], s), radial_grid)
            except ExtrapolationUnstable:
                outliers.append(float(s))
                continue
            if abs(v - mu) > config.C1_THRESHOLD:
                outliers.append(float(s))
        return BoundaryReport(t, "C1", mu, (alpha, mu), mu, table, alternative, outliers,
                              mu_exact=exact)
    report = BoundaryReport(t, "C2", 0j, (alpha, mu), mu, table, alternative, mu_exact=exact)
    report.value = report.value_at(t[2])
    vals = np.array([report.value_at(s) for s in t3s])
    args = np.unwrap(np.angle(vals))
    steps = np.diff(np.append(args, args[0] + np.sign(args[-1] - args[0]) * 2 * np.pi))
    # a Moebius map of the circle winds once, strictly monotonically
    report.injective = bool(np.all(steps > 0) or np.all(steps < 0))
    return report


def case_b_points(r: RIFModel, pairs: np.ndarray) -> list[BoundaryReport]:
    """Boundary reports at ``(t1, t2, 0)`` for each torus pair in ``pairs``."""
    return [boundary_value(r, (float(x), float(y), 0.0)) for x, y in np.asarray(pairs)]


def zero_value_correspondence(r: RIFModel, lam, scan=None, line_radius: float = 0.05) -> dict:
    """Check that case ``B`` boundary values and zeros of ``q_lam`` match.

    Forward: every torus zero of ``q_lam`` off the vertical lines is a case
    ``B`` pair with boundary value ``lam``. Backward: every singular pair off
    the vertical lines has case ``B`` value ``v`` with ``q_v`` vanishing there.

    Returns
    -------
    dict
        ``forward`` and ``backward`` lists of per-point errors (distance
        of the boundary value from ``lam``, and relative ``|q_v|``).
    """
    from .levelsets import level_set_singularities, q_lambda, refine_singular_points
    from .rif import vertical_lines
    from .refine import wrap

    lines = vertical_lines(r).angles

    def off_line(pairs):
        pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
        keep = np.ones(len(pairs), dtype=bool)
        for v in lines:
            keep &= np.linalg.norm(wrap(pairs - v), axis=1) > line_radius
        return pairs[keep]

    forward = []
    for x, y in off_line(level_set_singularities(r, lam)):
        rep = boundary_value(r, (x, y, 0.0))
        forward.append({"pair": [float(x), float(y)], "case": rep.case,
                        "error": float(abs(rep.value - complex(lam))) if rep.case == "B"
                        else float("inf")})
    backward = []
    if scan is not None and len(scan.points):
        pts = refine_singular_points(r, scan.points)
        for x, y in off_line(pts[:, :2]):
            rep = boundary_value(r, (x, y, 0.0))
            if rep.case != "B":
                backward.append({"pair": [float(x), float(y)], "case": rep.case,
                                 "error": float("inf")})
                continue
            q = q_lambda(r, complex(rep.value) / abs(rep.value))
            scale = float(np.abs(q.numeric().coefs).sum())
            val = abs(complex(q.numeric().eval_torus(np.array([[x, y]]))[0])) / scale
            backward.append({"pair": [float(x), float(y)], "case": "B", "error": float(val)})
    return {"forward": forward, "backward": backward}
