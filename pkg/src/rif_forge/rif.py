"""Rational inner functions ``phi = p_tilde / p`` and their slice structure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import config
from .errors import DegreeMismatch, ExceptionalSlice, StabilityViolation
from .poly import MultiPoly, NumericPoly, reflect
from .refine import (
    dedupe, levenberg_marquardt, polish_high_precision, residual_from_polys, torus_grid,
)

__all__ = [
    "StabilityCertificate",
    "RIFModel",
    "MN1Split",
    "SliceRoots",
    "VerticalLines",
    "make_rif",
    "mn1_split",
    "slice_roots",
    "delta",
    "slice_deltas",
    "vertical_lines",
]


@dataclass(frozen=True)
class StabilityCertificate:
    samples: int
    min_modulus_interior: float
    torus_zero_candidates: list
    radii: tuple = config.STABILITY_RADII

    def to_json_dict(self) -> dict:
        return {
            "samples": self.samples,
            "min_modulus_interior": self.min_modulus_interior,
            "radii": list(self.radii),
            "torus_zero_candidates": [list(map(float, t)) for t in self.torus_zero_candidates],
        }


@dataclass(frozen=True)
class RIFModel:
    """A rational inner function with exact numerator and denominator.

    ``p_tilde`` is always ``reflect(p, degree)``; the unimodular constant in
    front of the quotient is fixed to 1.
    """

    p: MultiPoly
    p_tilde: MultiPoly
    degree: tuple
    stability: StabilityCertificate
    name: str | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def nvars(self) -> int:
        return self.p.nvars

    @property
    def scale(self) -> float:
        """Sum of absolute coefficients of ``p``: an upper bound for ``|p|`` on
        the closed polydisk, used to make tolerances relative."""
        return max(self.p.numeric().abs_sum, 1e-300)

    def phi(self, z: np.ndarray) -> np.ndarray:
        """Evaluate the RIF at complex points of shape ``(..., d)``."""
        return self.p_tilde.numeric().eval(z) / self.p.numeric().eval(z)

    def phi_torus(self, theta: np.ndarray) -> np.ndarray:
        return self.p_tilde.numeric().eval_torus(theta) / self.p.numeric().eval_torus(theta)

    def slice_coefficients(self, j: int) -> list[NumericPoly]:
        """Numeric coefficient polynomials ``a_k`` with
        ``p_tilde = sum_k a_k z_j**k`` (``k = 0..n_j``)."""
        key = ("slice", j)
        if key not in self._cache:
            groups = self.p_tilde.coefficients_in(j)
            nj = self.degree[j - 1]
            self._cache[key] = [
                groups.get(k, MultiPoly(self.nvars - 1)).numeric() for k in range(nj + 1)]
        return self._cache[key]

    def to_json_dict(self) -> dict:
        out = self.p.to_json_dict()
        out["degree"] = list(self.degree)
        out["stability"] = self.stability.to_json_dict()
        if self.name:
            out["name"] = self.name
        return out


def make_rif(p: MultiPoly, degree: Sequence[int] | None = None, grid: int | None = None,
             name: str | None = None) -> RIFModel:
    """Build a RIF from a stable denominator.

    Stability is checked numerically: ``|p|`` is sampled on polydisk grids at
    the radii in :data:`config.STABILITY_RADII`, and the smallest samples are
    refined by Newton steps looking for an interior zero.

    Raises
    ------
    StabilityViolation
        If ``|p|`` drops below the tolerance at an interior point.
    """
    degree = tuple(degree) if degree is not None else p.degree
    p = p.with_degree(degree)
    if p.is_zero():
        raise StabilityViolation([0] * p.nvars, 0.0)
    p_tilde = reflect(p, degree)
    cert = _stability_certificate(p, grid)
    return RIFModel(p, p_tilde, degree, cert, name)


def _default_grid(d: int) -> int:
    return {1: 512, 2: 96, 3: 28, 4: 12}.get(d, 6)


def _stability_certificate(p: MultiPoly, grid: int | None) -> StabilityCertificate:
    d = p.nvars
    npoly = p.numeric()
    scale = max(npoly.abs_sum, 1e-300)
    tol = config.STABILITY_TOL * scale
    res = grid or _default_grid(d)
    angles = torus_grid(res, d)
    unit = np.exp(1j * angles)

    best_vals, best_pts = [], []
    min_mod = np.inf
    for r in config.STABILITY_RADII:
        pts = r * unit
        vals = np.abs(npoly.eval(pts))
        k = int(np.argmin(vals))
        if vals[k] < tol:
            raise StabilityViolation(pts[k], vals[k])
        min_mod = min(min_mod, float(vals[k]))
        order = np.argsort(vals)[: config.STABILITY_REFINE_SEEDS]
        best_vals.append(vals[order])
        best_pts.append(pts[order])

    seeds = np.concatenate(best_pts)
    witness = _interior_newton(p, seeds, scale)
    if witness is not None:
        raise StabilityViolation(witness, abs(p(list(witness))))

    torus_vals = np.abs(npoly.eval(unit))
    candidates = [tuple(a) for a in angles[torus_vals < config.TORUS_CANDIDATE_TOL * scale]]
    return StabilityCertificate(samples=len(angles) * len(config.STABILITY_RADII),
                                min_modulus_interior=float(min_mod),
                                torus_zero_candidates=candidates)


def _interior_newton(p: MultiPoly, seeds: np.ndarray, scale: float):
    """Minimum-norm complex Newton from each seed; return an interior zero
    if one is found."""
    npoly = p.numeric()
    grads = [p_j.numeric() for p_j in (_pd(p, j) for j in range(1, p.nvars + 1))]
    z = seeds.copy()
    for _ in range(40):
        v = npoly.eval(z)
        g = np.stack([gj.eval(z) for gj in grads], axis=-1)
        norm2 = np.sum(np.abs(g) ** 2, axis=-1)
        ok = norm2 > 1e-300
        step = np.zeros_like(z)
        step[ok] = (np.conj(g[ok]) * (v[ok] / norm2[ok])[:, None])
        z = z - step
        # keep iterates bounded so divergent seeds stay harmless
        z = np.where(np.abs(z) > 2.0, 2.0 * z / np.abs(z), z)
    v = np.abs(npoly.eval(z))
    inside = np.max(np.abs(z), axis=-1) < 1.0 - config.INTERIOR_MARGIN
    hit = np.nonzero(inside & (v < config.STABILITY_TOL * 1e-3 * scale))[0]
    if hit.size:
        return z[hit[0]]
    return None


def _pd(p: MultiPoly, j: int) -> MultiPoly:
    from .poly import partial_derivative

    return partial_derivative(p, j)


# =================================================================== (m,n,1)

@dataclass(frozen=True)
class MN1Split:
    """``p = p1 + z3 p2`` and ``p_tilde = z3 p1_tilde + p2_tilde``."""

    p1: MultiPoly
    p2: MultiPoly
    p1_tilde: MultiPoly
    p2_tilde: MultiPoly
    mn: tuple


def mn1_split(r: RIFModel) -> MN1Split:
    """Split a degree ``(m, n, 1)`` denominator into its ``z3``-free and
    ``z3``-linear parts, reflecting each at degree ``(m, n)``."""
    if r.nvars != 3 or r.degree[2] != 1:
        raise DegreeMismatch(f"expected degree (m, n, 1), got {r.degree}")
    key = "mn1"
    if key in r._cache:
        return r._cache[key]
    mn = tuple(r.degree[:2])
    groups = r.p.coefficients_in(3)
    p1 = groups.get(0, MultiPoly(2)).with_degree(mn)
    p2 = groups.get(1, MultiPoly(2)).with_degree(mn)
    split = MN1Split(p1, p2, reflect(p1, mn), reflect(p2, mn), mn)
    z3 = MultiPoly.variable(3, 3)
    assert p1.embed(3, (1, 2)) + z3 * p2.embed(3, (1, 2)) == r.p
    assert z3 * split.p1_tilde.embed(3, (1, 2)) + split.p2_tilde.embed(3, (1, 2)) == r.p_tilde
    r._cache[key] = split
    return split


# ==================================================================== slices

@dataclass(frozen=True)
class SliceRoots:
    roots: np.ndarray
    effective_degree: int
    exceptional: bool


def _batched_roots(A: np.ndarray, tol_abs: float):
    """Roots of many univariate polynomials at once.

    Parameters
    ----------
    A : ndarray, shape (N, n+1)
        Coefficients, constant term first.

    Returns
    -------
    roots : ndarray, shape (N, n)
        Finite roots, NaN-padded where the effective degree drops.
    eff : ndarray of int
        Effective degree per row (-1 when every coefficient is negligible).
    """
    N, n1 = A.shape
    n = n1 - 1
    big = np.abs(A) > tol_abs
    eff = np.where(big.any(axis=1), n - np.argmax(big[:, ::-1], axis=1), -1)
    roots = np.full((N, max(n, 1)), np.nan + 0j)
    for k in range(1, n + 1):
        rows = np.nonzero(eff == k)[0]
        if rows.size == 0:
            continue
        C = A[rows, : k + 1]
        if k == 1:
            r = (-C[:, 0] / C[:, 1])[:, None]
        elif k == 2:
            a, b, c = C[:, 2], C[:, 1], C[:, 0]
            disc = np.sqrt(b * b - 4 * a * c)
            sgn = np.where(np.real(np.conj(b) * disc) >= 0, 1.0, -1.0)
            q = -0.5 * (b + sgn * disc)
            safe_q = np.where(q == 0, 1.0, q)
            r1 = np.where(q == 0, 0.0, q / a)
            r2 = np.where(q == 0, 0.0, c / safe_q)
            r = np.stack([r1, r2], axis=1)
        else:
            comp = np.zeros((rows.size, k, k), dtype=complex)
            comp[:, 1:, :-1] = np.eye(k - 1)
            comp[:, :, -1] = -C[:, :k] / C[:, k:k + 1]
            r = np.linalg.eigvals(comp)
        r = _newton_polish(C, r)
        roots[rows, :k] = r
    return roots, eff


def _newton_polish(C: np.ndarray, r: np.ndarray) -> np.ndarray:
    """One Newton step on each root (Horner for value and derivative)."""
    k = C.shape[1] - 1
    val = np.zeros_like(r)
    der = np.zeros_like(r)
    for i in range(k, -1, -1):
        der = der * r + val
        val = val * r + C[:, i, None]
    ok = np.abs(der) > 1e-300
    return np.where(ok, r - val / np.where(ok, der, 1.0), r)


def slice_deltas(r: RIFModel, j: int, angles: np.ndarray):
    """Minimal root distance ``delta = min(1 - |alpha|)`` for many slices.

    Parameters
    ----------
    angles : ndarray, shape (N, d-1)
        Torus angles of the frozen variables, in variable order with ``z_j``
        removed.

    Returns
    -------
    delta : ndarray, shape (N,)
        NaN on exceptional slices.
    exceptional : ndarray of bool
    """
    coeffs = r.slice_coefficients(j)
    A = np.stack([c.eval_torus(angles) for c in coeffs], axis=-1)
    return _deltas_from_coeffs(A, r.scale)


def _deltas_from_coeffs(A: np.ndarray, scale: float):
    roots, eff = _batched_roots(A, config.SLICE_COEFF_TOL * scale)
    mod = np.abs(roots)
    touching = np.nanmax(np.where(np.isnan(mod), -np.inf, mod), axis=1) > 1.0 - config.ROOT_BOUNDARY_TOL
    exceptional = (eff < 0) | touching
    dist = np.where(np.isnan(mod), np.inf, 1.0 - mod)
    delta = np.minimum(np.min(dist, axis=1), 1.0)
    delta = np.where(exceptional, np.nan, delta)
    return delta, exceptional


def slice_roots(r: RIFModel, j: int, fixed: Sequence[complex], strict: bool = True) -> SliceRoots:
    """Roots in ``z_j`` of the numerator slice at torus point ``fixed``.

    Raises
    ------
    ExceptionalSlice
        When ``strict`` and the slice touches the torus or vanishes.
    """
    fixed = np.asarray(fixed, dtype=complex).reshape(1, -1)
    coeffs = r.slice_coefficients(j)
    A = np.stack([c.eval(fixed) for c in coeffs], axis=-1)
    roots, eff = _batched_roots(A, config.SLICE_COEFF_TOL * r.scale)
    rts = roots[0][~np.isnan(roots[0])]
    exceptional = bool(eff[0] < 0 or (rts.size and np.max(np.abs(rts)) > 1 - config.ROOT_BOUNDARY_TOL))
    if exceptional and strict:
        raise ExceptionalSlice(f"slice in z{j} at {tuple(fixed[0])} touches the torus")
    return SliceRoots(rts, int(max(eff[0], 0)), exceptional)


def delta(r: RIFModel, j: int, fixed: Sequence[complex]) -> float:
    """``min(1 - |alpha|)`` over slice roots; 1 when the slice has no roots."""
    sr = slice_roots(r, j, fixed, strict=True)
    if sr.roots.size == 0:
        return 1.0
    return float(min(1.0, np.min(1.0 - np.abs(sr.roots))))


# ============================================================ vertical lines

@dataclass(frozen=True)
class VerticalLines:
    """Common torus zeros ``(zeta1, zeta2)`` of ``p1`` and ``p2``."""

    points: list
    angles: np.ndarray
    nonfinite_suspect: bool = False

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def common_torus_zeros(polys: Sequence[MultiPoly], resolution: int = 96,
                       accept: float = 1e-12, dedupe_radius: float = 2e-2,
                       max_polish: int = 32):
    """Refined common zeros on the 2-torus of the given polynomials.

    Seeds are grid points whose residual is within a Lipschitz margin of
    zero; each seed is refined by Levenberg-Marquardt on the stacked real
    and imaginary parts. When at most ``max_polish`` zeros survive they
    are polished in extended precision (zero curves produce many more and
    are left as they are).
    """
    d = polys[0].nvars
    grid = torus_grid(resolution, d)
    h = 2 * np.pi / resolution
    total = np.zeros(len(grid))
    margin = 0.0
    for q in polys:
        nq = q.numeric()
        total += np.abs(nq.eval_torus(grid))
        if nq.coefs.size:
            lip = float(np.sum(np.abs(nq.coefs) * np.linalg.norm(nq.exps, axis=1)))
            margin += lip * h * np.sqrt(d) / 2
    seeds = grid[total <= 1.5 * margin + 1e-300]
    if seeds.size == 0:
        return np.zeros((0, d)), np.zeros(0)
    fun = residual_from_polys(polys)
    theta, res = levenberg_marquardt(fun, seeds, max_iter=200, tol=1e-15)
    scale = sum(max(q.numeric().abs_sum, 1e-300) for q in polys)
    good = res < accept * scale
    theta, res = theta[good], res[good]
    # Tangential intersections converge slowly, leaving a spray of nearly
    # converged seeds around the true zero; keep the best one per cluster.
    order = np.argsort(res, kind="stable")
    theta, res = theta[order], res[order]
    keep = dedupe(theta, dedupe_radius)
    theta, res = theta[keep], res[keep]
    if len(theta) <= max_polish:
        theta = polish_high_precision(polys, theta)
        res = fun(theta)[0]
        res = np.linalg.norm(res, axis=-1)
    return theta, res


def vertical_lines(r: RIFModel, resolution: int = 96) -> VerticalLines:
    """Points ``(zeta1, zeta2)`` on the 2-torus where ``p1`` and ``p2`` both
    vanish, i.e. where ``{(zeta1, zeta2)} x T`` lies in the zero set."""
    split = mn1_split(r)
    polys = [q for q in (split.p1, split.p2) if not q.is_zero()]
    if not polys or any(len(q) == 1 and not any(next(iter(q.terms))) for q in polys):
        return VerticalLines([], np.zeros((0, 2)))
    theta, _ = common_torus_zeros(polys, resolution)
    m, n = split.mn
    # two bidegree-(m, n) curves meet in at most 2mn isolated points
    suspect = len(theta) > max(2 * m * n, 1)
    pts = [tuple(np.exp(1j * t)) for t in theta]
    return VerticalLines(pts, theta, suspect)
