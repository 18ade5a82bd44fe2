"""Locate and cluster the zeros of the denominator on the torus.

The torus zero set of a RIF denominator is a finite union of points and
curves (in three variables). The scan seeds a regular grid, refines the
promising cells with damped least squares, and groups the refined points
into connected components.

Crossing curves share points, so plain single linkage would merge them. The
linkage here is tangent aware: two points are linked only when their local
tangent lines are nearly parallel and the
displacement between them runs along that tangent. Tangents come from
local principal components of the refined cloud; points whose neighbourhood
is not line-like have none and form isolated components unless they sit on a
curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import config
from .errors import EmptyScan
from .refine import (TWO_PI, dedupe, levenberg_marquardt, periodic_coords, residual_from_polys,
                     torus_grid, wrap)
from .rif import RIFModel

__all__ = ["ScanComponent", "SingularScan", "singular_scan"]

_TANGENT_COS = np.cos(np.deg2rad(25.0))
_DISPLACEMENT_COS = np.cos(np.deg2rad(35.0))


@dataclass
class ScanComponent:
    """A connected piece of the torus zero set."""

    indices: np.ndarray
    dimension: int
    extent_ratio: float
    center: np.ndarray
    extent: float

    def to_json_dict(self, points: np.ndarray) -> dict:
        return {
            "size": int(len(self.indices)),
            "dimension": self.dimension,
            "extent_ratio": None if not np.isfinite(self.extent_ratio) else float(self.extent_ratio),
            "center": [float(x) for x in self.center],
            "extent": float(self.extent),
            "points": points[self.indices].tolist(),
        }


@dataclass
class SingularScan:
    """Refined torus zeros of ``p`` and their components.

    Attributes
    ----------
    points : ndarray, shape (N, d)
        Angles in ``[-pi, pi)``.
    residuals : ndarray
        ``|p|`` at each point; all below ``tolerance``.
    tangents : ndarray, shape (N, d)
        Unit tangent of the zero set (zero rows where undefined).
    components : list of ScanComponent
    """

    points: np.ndarray
    residuals: np.ndarray
    tangents: np.ndarray
    components: list
    tolerance: float
    resolution: int
    flags: list = field(default_factory=list)

    def __len__(self):
        return len(self.components)

    def component_points(self, k: int) -> np.ndarray:
        return self.points[self.components[k].indices]

    @property
    def dimensions(self) -> list[int]:
        return [c.dimension for c in self.components]

    def to_json_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "resolution": self.resolution,
            "n_points": int(len(self.points)),
            "max_residual": float(self.residuals.max()) if len(self.residuals) else 0.0,
            "components": [c.to_json_dict(self.points) for c in self.components],
            "flags": list(self.flags),
        }


# ------------------------------------------------------------------ helpers

def _lipschitz(npoly) -> float:
    return float(np.sum(np.abs(npoly.coefs) * np.linalg.norm(npoly.exps, axis=1)))


def _tangents(theta: np.ndarray, radius: float, min_ratio: float = 4.0) -> np.ndarray:
    """Unit tangent of the point cloud by local principal components.

    The real Jacobian of ``(Re p, Im p)`` has rank one on the torus zero set
    (``|p| = |p_tilde|`` there forces ``Re``-parts to vanish to second
    order), so tangents are taken from neighbours instead. Rows stay zero
    where the neighbourhood is not line-like.
    """
    data = periodic_coords(theta)
    tree = cKDTree(data, boxsize=TWO_PI)
    out = np.zeros_like(theta)
    for i, nbrs in enumerate(tree.query_ball_point(data, radius)):
        if len(nbrs) < 3:
            continue
        rel = wrap(theta[nbrs] - theta[i])
        rel -= rel.mean(axis=0)
        _, sv, vt = np.linalg.svd(rel, full_matrices=False)
        if sv[0] > min_ratio * max(sv[1], 1e-300):
            out[i] = vt[0]
    return out


def _project(fun, theta: np.ndarray, iters: int = 30) -> np.ndarray:
    out, _ = levenberg_marquardt(fun, theta, max_iter=iters, tol=1e-14)
    return out


def _local_ratio(fun, point: np.ndarray, tangent: np.ndarray, step: float = 5e-4,
                 half: int = 5) -> float:
    """Principal/secondary extent ratio of a small patch of the zero set
    traced along ``tangent`` from ``point``."""
    if not np.any(tangent):
        return 1.0
    ks = np.arange(-half, half + 1, dtype=float)
    patch = point[None, :] + ks[:, None] * step * tangent[None, :]
    patch = _project(fun, patch)
    rel = wrap(patch - point[None, :])
    rel -= rel.mean(axis=0)
    sv = np.linalg.svd(rel, compute_uv=False)
    if sv.size < 2:
        return np.inf
    return float(sv[0] / max(sv[1], 1e-300))


def _circular_mean(pts: np.ndarray) -> np.ndarray:
    return np.angle(np.mean(np.exp(1j * pts), axis=0))


# --------------------------------------------------------------------- scan

def singular_scan(r: RIFModel, resolution: int = 64, tol: float = 1e-9,
                  raise_empty: bool = False) -> SingularScan:
    """Find and cluster torus zeros of the denominator.

    Parameters
    ----------
    resolution : int
        Grid points per axis (at least 50 recommended).
    tol : float
        Acceptance bound on ``|p|`` for refined points.
    raise_empty : bool
        Raise :class:`EmptyScan` instead of returning an empty scan.

    Returns
    -------
    SingularScan
    """
    key = ("scan", resolution, tol)
    if key in r._cache:
        scan = r._cache[key]
        if raise_empty and not scan.components:
            raise EmptyScan("no torus zeros of the denominator")
        return scan
    d = r.nvars
    npoly = r.p.numeric()
    h = TWO_PI / resolution
    grid = torus_grid(resolution, d)
    vals = np.abs(npoly.eval_torus(grid))
    margin = _lipschitz(npoly) * h * np.sqrt(d) / 2
    seeds = grid[vals <= margin]
    fun = residual_from_polys([r.p])
    theta, res = levenberg_marquardt(fun, seeds, max_iter=200, tol=1e-15)
    good = res < tol
    theta, res = theta[good], res[good]
    order = np.argsort(res, kind="stable")
    theta, res = theta[order], res[order]
    keep = dedupe(theta, config.SCAN_DEDUPE)
    theta, res = theta[keep], res[keep]
    # many seeds land on the same stretch of curve; thin the cloud to a
    # spacing well below the linkage radius so clustering stays cheap
    keep = dedupe(theta, config.SCAN_THIN_FRACTION * h)
    theta, res = theta[keep], res[keep]
    flags = []
    if len(theta) == 0:
        scan = SingularScan(theta.reshape(0, d), res, theta.reshape(0, d), [], tol, resolution)
        r._cache[key] = scan
        if raise_empty:
            raise EmptyScan("no torus zeros of the denominator")
        return scan
    # Near high-order zeros the refined points form a tube of width ~1e-2
    # (|p| < tol there does not pin the position), so neighbourhoods get an
    # absolute floor and results do not depend on the grid resolution.
    tangents = _tangents(theta, max(h, config.SCAN_TANGENT_RADIUS))
    labels = _cluster(theta, tangents, link=max(4.0 * h, config.SCAN_LINK_RADIUS))
    comps = _components(theta, tangents, labels, fun, max(h, config.SCAN_TANGENT_RADIUS))
    scan = SingularScan(theta, res, tangents, comps, tol, resolution, flags)
    r._cache[key] = scan
    return scan


def _cluster(theta: np.ndarray, tangents: np.ndarray, link: float) -> np.ndarray:
    n = len(theta)
    data = periodic_coords(theta)
    tree = cKDTree(data, boxsize=TWO_PI)
    pairs = tree.query_pairs(link, output_type="ndarray")
    has_t = np.any(tangents != 0, axis=1)
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        both = has_t[i] & has_t[j]
        disp = wrap(theta[j] - theta[i])
        dn = np.linalg.norm(disp, axis=1)
        dhat = disp / np.maximum(dn, 1e-300)[:, None]
        par = np.abs(np.sum(tangents[i] * tangents[j], axis=1)) > _TANGENT_COS
        along = (np.abs(np.sum(dhat * tangents[i], axis=1)) > _DISPLACEMENT_COS) & \
                (np.abs(np.sum(dhat * tangents[j], axis=1)) > _DISPLACEMENT_COS)
        close = dn < 1e-3  # coincident points are linked regardless of direction
        deg = ~has_t[i] & ~has_t[j]
        ok = (both & par & (along | close)) | deg
        i, j = i[ok], j[ok]
    else:
        i = j = np.zeros(0, dtype=int)
    graph = coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return _absorb(theta, has_t, labels, tree, link)


def _absorb(theta, has_t, labels, tree, link) -> np.ndarray:
    """Merge tangent-less groups lying on a curve, and small fragments, into
    the nearest large component."""
    labels = labels.copy()
    data = periodic_coords(theta)
    sizes = np.bincount(labels)
    big = sizes >= 5
    curve_label = np.array([has_t[labels == k].any() and big[k] for k in range(len(sizes))])
    for k in range(len(sizes)):
        members = np.nonzero(labels == k)[0]
        if curve_label[k]:
            continue
        # tangent-less groups are isolated singular points unless they touch
        # a curve; small tangent fragments are joined to whatever they touch
        best = None
        for idx in members:
            for nb in tree.query_ball_point(data[idx], link):
                if labels[nb] != k and curve_label[labels[nb]]:
                    best = labels[nb]
                    break
            if best is not None:
                break
        if best is not None:
            labels[members] = best
    _, labels = np.unique(labels, return_inverse=True)
    return labels


def _components(theta, tangents, labels, fun, h) -> list[ScanComponent]:
    comps = []
    for k in range(labels.max() + 1):
        idx = np.nonzero(labels == k)[0]
        pts = theta[idx]
        center = _circular_mean(pts)
        extent = float(np.max(np.linalg.norm(wrap(pts - center), axis=1))) if len(idx) else 0.0
        with_t = idx[np.any(tangents[idx] != 0, axis=1)]
        if len(idx) == 1 or len(with_t) == 0 or extent < 2 * h:
            ratio, dim = 1.0, 0
        else:
            sample = with_t[np.linspace(0, len(with_t) - 1, min(16, len(with_t))).astype(int)]
            ratios = [_local_ratio(fun, theta[s], tangents[s]) for s in sample]
            ratio = float(np.median(ratios))
            dim = 1 if ratio > config.SCAN_LINE_RATIO else 0
        comps.append(ScanComponent(idx, dim, ratio, center, extent))
    comps.sort(key=lambda c: (-c.dimension, -len(c.indices)))
    return comps
