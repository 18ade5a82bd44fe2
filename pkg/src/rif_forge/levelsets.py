"""Unimodular level sets of degree ``(m, n, 1)`` models.

Write ``p = p1 + z3 p2`` so that ``p_tilde = z3 p1_tilde + p2_tilde``. On the
torus ``phi = lam`` reads ``z3 (p1_tilde - lam p2) = lam p1 - p2_tilde``,
so with ``q = lam p1 - p2_tilde`` and its reflection ``q_tilde`` the level
set is the graph ``z3 = conj(lam) q / q_tilde`` over the two-torus plus the
vertical lines ``{q = 0} x T``.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegreeMismatch, PsiSingular, VerificationFailed
from .gaussian import GaussianRational
from .poly import MultiPoly, reflect
from .refine import TWO_PI, levenberg_marquardt, residual_from_polys, torus_distance, wrap
from .rif import RIFModel, common_torus_zeros, mn1_split, vertical_lines

__all__ = [
    "as_unimodular",
    "lambda_grid",
    "q_lambda",
    "q_lambda_tilde",
    "psi_lambda",
    "psi_lambda_angles",
    "LevelSetSample",
    "level_set_sample",
    "level_set_singularities",
    "verify_cl_equals_ll",
    "snap_to_vertical_lines",
    "refine_singular_points",
    "zero_curve",
]

PSI_TOL = 1e-11


def as_unimodular(lam) -> GaussianRational | complex:
    """Validate a unimodular constant, keeping Gaussian rationals exact.

    Floats that are within ``1e-15`` of a Gaussian rational with small
    denominator on the circle (``1``, ``-1``, ``i``, ``(3+4i)/5``, ...) are
    converted to that exact value; other floats become an exactly
    unimodular rational within rounding of their argument.
    """
    if isinstance(lam, str):
        lam = complex(lam.replace("i", "j").replace(" ", ""))
    if isinstance(lam, GaussianRational):
        if lam.abs2() != 1:
            raise ValueError(f"lambda = {lam} is not unimodular")
        return lam
    z = complex(lam)
    if abs(abs(z) - 1) > 1e-12:
        raise ValueError(f"|lambda| = {abs(z)} is not 1")
    g = GaussianRational.from_complex(z, max_denominator=1000)
    if g.abs2() == 1 and abs(complex(g) - z) < 1e-15:
        return g
    # Any other point on the circle is replaced by the exactly unimodular
    # rational ((1 - t^2) + 2it) / (1 + t^2) with t = tan(arg / 2). Torus
    # zeros of q are double, so a coefficient error of 1e-16 from a float
    # that is only nearly unimodular would move them by about 1e-8.
    t = Fraction(math.tan(cmath.phase(z) / 2))
    return GaussianRational(1 - t * t, 2 * t) / (1 + t * t)


def lambda_grid(count: int) -> list:
    """``count`` equally spaced unimodular values starting at 1."""
    return [as_unimodular(np.exp(2j * np.pi * k / count)) for k in range(count)]


def _cache_key(lam):
    return ("q", complex(lam))


def q_lambda(r: RIFModel, lam) -> MultiPoly:
    """``lam p1 - p2_tilde`` as a polynomial in ``(z1, z2)``.

    Raises
    ------
    DegreeMismatch
        Unless ``r`` has degree ``(m, n, 1)``.
    """
    lam = as_unimodular(lam)
    split = mn1_split(r)
    key = _cache_key(lam)
    if key not in r._cache:
        q = split.p1 * lam - split.p2_tilde
        r._cache[key] = q.with_degree(split.mn)
    return r._cache[key]


def q_lambda_tilde(r: RIFModel, lam) -> MultiPoly:
    """Reflection of :func:`q_lambda` at degree ``(m, n)``."""
    key = ("qt", complex(as_unimodular(lam)))
    if key not in r._cache:
        r._cache[key] = reflect(q_lambda(r, lam), mn1_split(r).mn)
    return r._cache[key]


def _scale(q: MultiPoly) -> float:
    return max(q.numeric().abs_sum, 1e-300)


def psi_lambda(r: RIFModel, lam, tau: Sequence[complex]) -> complex:
    """``conj(lam) q(tau) / q_tilde(tau)`` at a torus pair.

    Raises
    ------
    PsiSingular
        Where ``|q_tilde(tau)|`` is below ``1e-11`` (relative).
    """
    lam = as_unimodular(lam)
    q = q_lambda(r, lam)
    qt = q_lambda_tilde(r, lam)
    point = np.asarray(tau, dtype=complex).reshape(1, 2)
    den = complex(qt.numeric().eval(point)[0])
    if abs(den) <= PSI_TOL * _scale(qt):
        raise PsiSingular(f"q_tilde vanishes at {tuple(point[0])} for lambda = {lam}")
    return complex(np.conj(complex(lam)) * q.numeric().eval(point)[0] / den)


def psi_lambda_angles(r: RIFModel, lam, theta: np.ndarray):
    """Vectorized ``Psi`` at angle pairs.

    Returns
    -------
    values : ndarray of complex
        NaN where ``q_tilde`` vanishes.
    singular : ndarray of bool
    """
    lam = as_unimodular(lam)
    q = q_lambda(r, lam).numeric()
    qt_poly = q_lambda_tilde(r, lam)
    den = qt_poly.numeric().eval_torus(theta)
    singular = np.abs(den) <= PSI_TOL * _scale(qt_poly)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.conj(complex(lam)) * q.eval_torus(theta) / den
    return np.where(singular, np.nan + 0j, vals), singular


def level_set_singularities(r: RIFModel, lam, resolution: int = 96) -> np.ndarray:
    """Refined torus zeros of ``q`` (angle pairs), where the level set has a
    vertical line and ``Psi`` is singular."""
    key = ("qzeros", complex(as_unimodular(lam)), resolution)
    if key not in r._cache:
        theta, _ = common_torus_zeros([q_lambda(r, lam)], resolution)
        r._cache[key] = theta
    return r._cache[key]


def zero_curve(r: RIFModel, lam) -> bool:
    """True when ``q`` vanishes along a curve of the two-torus.

    Isolated torus zeros of ``q`` are common zeros of ``q`` and its
    reflection, at most ``2 m n`` of them; more refined zeros than that mean
    a whole curve (the level set then contains a vertical surface).
    """
    m, n = mn1_split(r).mn
    return len(level_set_singularities(r, lam)) > max(2 * m * n, 1)


@dataclass
class LevelSetSample:
    """Sampled level set ``phi = lam`` on the three-torus.

    Attributes
    ----------
    surface : ndarray, shape (N, 3)
        Angles ``(theta1, theta2, arg Psi)``.
    vertical_lines : ndarray, shape (K, 2)
        Angle pairs of the vertical lines.
    psi_singularities : ndarray, shape (S, 2)
    """

    lam: complex
    surface: np.ndarray
    vertical_lines: np.ndarray
    psi_singularities: np.ndarray
    grid: int
    max_modulus_error: float = 0.0
    max_level_residual: float = 0.0
    notes: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "lambda": [float(np.real(self.lam)), float(np.imag(self.lam))],
            "grid": self.grid,
            "surface_points": int(len(self.surface)),
            "vertical_lines": self.vertical_lines.tolist(),
            "psi_singularities": self.psi_singularities.tolist(),
            "max_modulus_error": self.max_modulus_error,
            "max_level_residual": self.max_level_residual,
        }

    def to_csv(self, path_or_buf=None, line_points: int = 64) -> str | None:
        """Columns ``theta1, theta2, theta3, kind`` with kind one of
        ``surface``, ``vertical`` and ``psi-singular``."""
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["theta1", "theta2", "theta3", "kind"])
        for t in self.surface:
            w.writerow([f"{x:.12g}" for x in t] + ["surface"])
        ts = np.linspace(-np.pi, np.pi, line_points, endpoint=False)
        for a, b in self.vertical_lines:
            for t in ts:
                w.writerow([f"{a:.12g}", f"{b:.12g}", f"{t:.12g}", "vertical"])
        for a, b in self.psi_singularities:
            w.writerow([f"{a:.12g}", f"{b:.12g}", "", "psi-singular"])
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(text)
        return None


def _mesh(grid: int) -> np.ndarray:
    t = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    a, b = np.meshgrid(t, t, indexing="ij")
    return np.stack([a.ravel(), b.ravel()], axis=1)


def level_set_sample(r: RIFModel, lam, grid: int = 64) -> LevelSetSample:
    """Sample the surface part on a ``grid x grid`` mesh and locate the
    vertical lines."""
    if grid < 16:
        raise ValueError("grid must be at least 16")
    lam = as_unimodular(lam)
    mesh = _mesh(grid)
    vals, singular = psi_lambda_angles(r, lam, mesh)
    ok = ~singular
    surf = np.column_stack([mesh[ok], np.angle(vals[ok])])
    lines = level_set_singularities(r, lam)
    psi_sing = np.vstack([mesh[singular], lines]) if singular.any() else lines
    mod_err = float(np.max(np.abs(np.abs(vals[ok]) - 1))) if ok.any() else 0.0
    full = np.column_stack([surf[:, :2], surf[:, 2]])
    ptn = r.p_tilde.numeric().eval_torus(full)
    pn = r.p.numeric().eval_torus(full)
    resid = float(np.max(np.abs(ptn - complex(lam) * pn))) / r.scale if len(full) else 0.0
    notes = ["q vanishes along a curve: the level set contains a vertical surface"] \
        if zero_curve(r, lam) else []
    return LevelSetSample(complex(lam), surf, lines, psi_sing, grid, mod_err, resid, notes)


# ---------------------------------------------------------------- C = L

def snap_to_vertical_lines(r: RIFModel, points: np.ndarray, radius: float = 0.05) -> np.ndarray:
    """Move singular points near a vertical line exactly onto it.

    Close to a vertical line the denominator vanishes to high order and
    refined points scatter over a tube of width up to ``1e-2``; the line
    itself is known accurately from the common zeros of ``p1`` and ``p2``.
    """
    out = np.array(points, dtype=float, copy=True)
    lines = vertical_lines(r).angles
    for v in lines:
        near = np.linalg.norm(wrap(out[:, :2] - v), axis=1) < radius
        out[near, :2] = v
    return out


def refine_singular_points(r: RIFModel, points: np.ndarray, radius: float = 0.05) -> np.ndarray:
    """Sharpen torus zeros of ``p`` using the ``(m, n, 1)`` structure.

    Off the vertical lines a torus zero is ``(tau, -p1(tau)/p2(tau))`` with
    ``tau`` a zero of ``N = |p1|^2 - |p2|^2``, which is nonnegative on the
    two-torus and vanishes only to second order where ``p`` itself may
    vanish to higher order. Points near a vertical line are snapped onto it.
    """
    split = mn1_split(r)
    pts = np.array(points, dtype=float, copy=True)
    lines = vertical_lines(r).angles
    on_line = np.zeros(len(pts), dtype=bool)
    for v in lines:
        near = np.linalg.norm(wrap(pts[:, :2] - v), axis=1) < radius
        pts[near, :2] = v
        on_line |= near
    rest = np.nonzero(~on_line)[0]
    if rest.size == 0:
        return pts
    p1, p2 = split.p1.numeric(), split.p2.numeric()

    def fun(theta):
        a, ga = p1.grad_torus(theta)
        b, gb = p2.grad_torus(theta)
        val = np.abs(a) ** 2 - np.abs(b) ** 2
        grad = 2 * np.real(np.conj(a)[:, None] * ga) - 2 * np.real(np.conj(b)[:, None] * gb)
        return val[:, None], grad[:, None, :]

    ref, _ = levenberg_marquardt(fun, pts[rest, :2], max_iter=200, tol=0.0)
    b = p2.eval_torus(ref)
    a = p1.eval_torus(ref)
    ok = (np.abs(b) > 1e-8 * r.scale) & \
        (np.linalg.norm(wrap(ref - pts[rest, :2]), axis=1) < radius)
    t3 = np.angle(-a / np.where(ok, b, 1.0))
    idx = rest[ok]
    pts[idx, :2] = ref[ok]
    pts[idx, 2] = t3[ok]
    return pts


def _min_distance(r: RIFModel, lam, sigma: np.ndarray, lines: np.ndarray, grid: int,
                  levels: int = 6, local: int = 17) -> float:
    """Distance from ``sigma`` to the sampled level set, refining local grids."""
    best = np.inf
    for v in lines:
        best = min(best, float(np.linalg.norm(wrap(sigma[:2] - v))))
    # vertical part: project onto the zero set of q (a curve for special lam)
    q = q_lambda(r, lam)
    z, res = levenberg_marquardt(residual_from_polys([q]), sigma[None, :2], max_iter=100,
                                 tol=1e-15)
    if res[0] < 1e-12 * _scale(q):
        best = min(best, float(np.linalg.norm(wrap(sigma[:2] - z[0]))))
    # the surface over sigma itself; near the vertical set it is too steep
    # for the local grids below to resolve
    val, sing = psi_lambda_angles(r, lam, sigma[None, :2])
    if not sing[0]:
        best = min(best, float(abs(wrap(np.angle(val[0]) - sigma[2]))))
    h = TWO_PI / grid
    # global mesh cell containing sigma, then successively finer local grids
    center = np.round(sigma[:2] / h) * h
    half = 2 * h
    for _ in range(levels):
        t = np.linspace(-half, half, local)
        a, b = np.meshgrid(t, t, indexing="ij")
        pts = wrap(center + np.stack([a.ravel(), b.ravel()], axis=1))
        vals, singular = psi_lambda_angles(r, lam, pts)
        ok = ~singular
        if ok.any():
            full = np.column_stack([pts[ok], np.angle(vals[ok])])
            dist = torus_distance(full, sigma[None, :])
            k = int(np.argmin(dist))
            best = min(best, float(dist[k]))
            center = full[k, :2]
        half /= 4
    return best


def verify_cl_equals_ll(r: RIFModel, lam, scan, tol: float = 1e-3, grid: int = 512,
                        per_component: int = 24, raise_on_fail: bool = True) -> list:
    """Check that every singular component lies in the level set ``phi = lam``.

    Returns
    -------
    list of dict
        One entry per checked singular point: ``component``, ``point`` and
        ``distance``.

    Raises
    ------
    VerificationFailed
        When some distance exceeds ``tol`` (and ``raise_on_fail``).
    """
    lam = as_unimodular(lam)
    if scan is None or not len(scan):
        return []
    lines = level_set_singularities(r, lam)
    out = []
    for k, comp in enumerate(scan.components):
        idx = comp.indices
        pick = idx[np.linspace(0, len(idx) - 1, min(per_component, len(idx))).astype(int)]
        pts = refine_singular_points(r, scan.points[pick])
        for sigma in pts:
            out.append({"component": k, "point": sigma.tolist(),
                        "distance": _min_distance(r, lam, sigma, lines, grid)})
    bad = [e for e in out if not e["distance"] < tol]
    if bad and raise_on_fail:
        worst = max(bad, key=lambda e: e["distance"])
        raise VerificationFailed(
            f"{len(bad)} singular points farther than {tol} from the level set "
            f"lambda = {complex(lam):.6g}; worst {worst['point']} at {worst['distance']:.3g}")
    return out
