"""Batched damped least-squares refinement on torus angle coordinates.

Torus zeros of a polynomial are solutions of two real equations
(``Re p = Im p = 0``) in ``d`` real unknowns, so the system is usually
underdetermined. Steps use the minimum-norm Levenberg-Marquardt form
``-J^T (J J^T + lam I)^{-1} F`` which moves each seed to a nearby point of the
solution set instead of wandering along it.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap(theta: np.ndarray) -> np.ndarray:
    """Map angles into ``[-pi, pi)``."""
    return (np.asarray(theta) + np.pi) % TWO_PI - np.pi


def torus_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance between angle vectors with periodic wrapping."""
    return np.linalg.norm(wrap(np.asarray(a) - np.asarray(b)), axis=-1)


def residual_from_polys(polys: Sequence) -> Callable:
    """Residual/Jacobian callback for the stacked real and imaginary parts of
    several polynomials evaluated on the torus."""
    numerics = [p.numeric() for p in polys]

    def fun(theta: np.ndarray):
        vals, jacs = [], []
        for npoly in numerics:
            v, g = npoly.grad_torus(theta)
            vals += [v.real, v.imag]
            jacs += [g.real, g.imag]
        return np.stack(vals, axis=-1), np.stack(jacs, axis=-2)

    return fun


def levenberg_marquardt(fun: Callable, theta0: np.ndarray, max_iter: int = 100,
                        tol: float = 1e-13, lam0: float = 1e-3):
    """Refine many seeds at once.

    Parameters
    ----------
    fun : callable
        ``fun(theta) -> (F, J)`` with ``F`` of shape ``(N, m)`` and ``J`` of
        shape ``(N, m, n)``.
    theta0 : ndarray, shape (N, n)
        Starting angles.

    Returns
    -------
    theta : ndarray
        Refined angles (wrapped to ``[-pi, pi)``).
    resid : ndarray
        Final residual norms.
    """
    theta = np.array(theta0, dtype=float, copy=True)
    if theta.size == 0:
        return theta, np.zeros(0)
    F, J = fun(theta)
    cost = np.linalg.norm(F, axis=1)
    lam = np.full(theta.shape[0], lam0)
    active = cost > tol
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        Fa, Ja = F[idx], J[idx]
        m, n = Fa.shape[1], Ja.shape[2]
        scale = np.maximum(np.einsum("kij,kij->k", Ja, Ja), 1e-300)
        lam_eff = lam[idx] * scale
        if m <= n:
            JJt = Ja @ np.swapaxes(Ja, 1, 2) + lam_eff[:, None, None] * np.eye(m)
            y = np.linalg.solve(JJt, Fa[..., None])[..., 0]
            step = -np.einsum("kmn,km->kn", Ja, y)
        else:
            JtJ = np.swapaxes(Ja, 1, 2) @ Ja + lam_eff[:, None, None] * np.eye(n)
            rhs = np.einsum("kmn,km->kn", Ja, Fa)
            step = -np.linalg.solve(JtJ, rhs[..., None])[..., 0]
        trial = theta[idx] + step
        Ft, Jt = fun(trial)
        ct = np.linalg.norm(Ft, axis=1)
        better = ct < cost[idx]
        good = idx[better]
        theta[good] = trial[better]
        F[good], J[good], cost[good] = Ft[better], Jt[better], ct[better]
        lam[good] = np.maximum(lam[good] / 3.0, 1e-12)
        bad = idx[~better]
        lam[bad] = lam[bad] * 4.0
        small_step = np.linalg.norm(step, axis=1) < 1e-15
        active[idx] = (cost[idx] > tol) & ~(small_step & ~better) & (lam[idx] < 1e12)
    return wrap(theta), cost


def polish_high_precision(polys: Sequence, theta: np.ndarray, dps: int = 40,
                          max_iter: int = 120) -> np.ndarray:
    """Polish common torus zeros with damped Gauss-Newton in ``mpmath``.

    A torus zero of a polynomial is usually a minimum of ``|p|**2`` with
    value zero, so the real Jacobian is rank deficient there and every
    Newton variant converges only linearly. In double precision that stalls
    near ``sqrt(eps)`` in the angles; 40 digits leave enough room to reach
    full double accuracy.
    """
    import mpmath

    theta = np.asarray(theta, dtype=float)
    if theta.size == 0:
        return theta
    with mpmath.workdps(dps):
        terms = []
        for p in polys:
            tt = []
            for e, c in p.terms.items():
                if hasattr(c, "re"):
                    cm = mpmath.mpc(mpmath.mpf(c.re.numerator) / c.re.denominator,
                                    mpmath.mpf(c.im.numerator) / c.im.denominator)
                else:
                    cm = mpmath.mpc(complex(c))
                tt.append((e, cm))
            terms.append(tt)
        stop = mpmath.mpf(10) ** (-(dps - 6))
        out = np.empty_like(theta)
        for k, t0 in enumerate(theta):
            t = [mpmath.mpf(float(x)) for x in t0]
            for _ in range(max_iter):
                z = [mpmath.expj(x) for x in t]
                F, J = [], []
                for tt in terms:
                    v = mpmath.mpc(0)
                    g = [mpmath.mpc(0)] * len(t)
                    for e, c in tt:
                        mono = c
                        for zi, ei in zip(z, e):
                            mono *= zi ** ei
                        v += mono
                        for i, ei in enumerate(e):
                            if ei:
                                g[i] += 1j * ei * mono
                    F += [v.real, v.imag]
                    J += [[x.real for x in g], [x.imag for x in g]]
                Fm, Jm = mpmath.matrix(F), mpmath.matrix(J)
                res = mpmath.norm(Fm)
                if res < stop:
                    break
                A = Jm.T * Jm
                for i in range(len(t)):
                    A[i, i] += res
                step = mpmath.lu_solve(A, Jm.T * Fm)
                t = [x - step[i] for i, x in enumerate(t)]
                if mpmath.norm(step) < stop:
                    break
            out[k] = [float(x) for x in t]
    return wrap(out)


def periodic_coords(points: np.ndarray) -> np.ndarray:
    """Angles mapped into ``[0, 2 pi)`` strictly, as periodic KD-trees need."""
    data = np.mod(np.asarray(points, dtype=float), TWO_PI)
    data[data >= TWO_PI] = 0.0
    return data


def dedupe(points: np.ndarray, radius: float) -> np.ndarray:
    """Indices of a subset of ``points`` with pairwise periodic distance at
    least ``radius`` (greedy, deterministic in input order)."""
    from scipy.spatial import cKDTree

    if len(points) == 0:
        return np.zeros(0, dtype=int)
    data = periodic_coords(points)
    tree = cKDTree(data, boxsize=TWO_PI)
    keep = np.ones(len(points), dtype=bool)
    for i, nbrs in enumerate(tree.query_ball_point(data, radius)):
        if not keep[i]:
            continue
        for j in nbrs:
            if j > i:
                keep[j] = False
    return np.nonzero(keep)[0]


def torus_grid(resolution: int, dim: int) -> np.ndarray:
    """Regular grid of ``resolution**dim`` angle vectors in ``[-pi, pi)``."""
    axis = -np.pi + TWO_PI * np.arange(resolution) / resolution
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)
