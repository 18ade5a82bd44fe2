"""Quadrature for the ``L^1`` norm of a partial derivative on the torus.

For every RIF the normalized ``L^1(T^d)`` norm of ``d phi / d z_j`` equals
the degree ``n_j``. The estimate here evaluates the derivative directly
from ``p`` and ``p_tilde`` and integrates it by importance sampling: the
frozen coordinates are uniform, and the free coordinate is drawn from an
equal mixture of arc length and the harmonic measures of the slice zeros.
On a slice the derivative modulus is a sum of Poisson kernels, so the
weights stay bounded even next to the singular set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import config
from .poly import partial_derivative
from .rif import RIFModel, _batched_roots

__all__ = ["L1Estimate", "l1_norm", "partial_derivative_torus"]


@dataclass(frozen=True)
class L1Estimate:
    variable: int
    estimate: float
    stderr: float
    degree: int
    samples: int

    @property
    def relative_error(self) -> float:
        return abs(self.estimate - self.degree) / max(self.degree, 1)

    def to_json_dict(self) -> dict:
        return {"variable": self.variable, "estimate": self.estimate, "stderr": self.stderr,
                "degree": self.degree, "samples": self.samples}


def partial_derivative_torus(r: RIFModel, j: int, theta: np.ndarray) -> np.ndarray:
    """``d phi / d z_j`` at torus angles ``theta`` of shape ``(N, d)``."""
    key = ("dpoly", j)
    if key not in r._cache:
        r._cache[key] = (partial_derivative(r.p, j).numeric(),
                         partial_derivative(r.p_tilde, j).numeric())
    dp, dpt = r._cache[key]
    p = r.p.numeric().eval_torus(theta)
    pt = r.p_tilde.numeric().eval_torus(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (dpt.eval_torus(theta) * p - pt * dp.eval_torus(theta)) / (p * p)


def _poisson(a: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Poisson kernel ``(1 - |a|^2) / |zeta - a|^2`` (NaN roots give 0)."""
    ok = ~np.isnan(a)
    a0 = np.where(ok, a, 0.0)
    val = (1 - np.abs(a0) ** 2) / np.abs(zeta - a0) ** 2
    return np.where(ok, val, 0.0)


def l1_norm(r: RIFModel, j: int, samples: int = 1_000_000, seed: int = 0,
            block: int = config.SAMPLING_BLOCK) -> L1Estimate:
    """Estimate ``||d phi / d z_j||_1`` for normalized measure on ``T^d``.

    Parameters
    ----------
    samples : int
        Total number of derivative evaluations.
    seed : int
        Philox stream key; blocks are keyed by ``(seed, block index)``.
    """
    if not 1 <= j <= r.nvars:
        raise ValueError(f"variable index {j} out of range")
    d = r.nvars
    coeffs = r.slice_coefficients(j)
    others = [k for k in range(d) if k != j - 1]
    total = 0.0
    total_sq = 0.0
    done = 0
    b = 0
    while done < samples:
        n = min(block, samples - done)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 11, b])))
        frozen = rng.uniform(-np.pi, np.pi, (n, d - 1))
        A = np.stack([c.eval_torus(frozen) for c in coeffs], axis=-1)
        roots, _ = _batched_roots(A, config.SLICE_COEFF_TOL * r.scale)
        inside = np.where(np.abs(roots) < 1.0, roots, np.nan)
        k = roots.shape[1]
        # mixture component 0 is arc length, component i >= 1 the harmonic
        # measure of root i (an unused root slot falls back to arc length)
        comp = rng.integers(0, k + 1, n)
        w = np.exp(1j * rng.uniform(-np.pi, np.pi, n))
        chosen = np.where(comp > 0, inside[np.arange(n), np.maximum(comp - 1, 0)], np.nan)
        a = np.where(np.isnan(chosen), 0.0, chosen)
        zeta = (w + a) / (1 + np.conj(a) * w)
        theta = np.empty((n, d))
        theta[:, others] = frozen
        theta[:, j - 1] = np.angle(zeta)
        f = np.abs(partial_derivative_torus(r, j, theta))
        kern = _poisson(inside, zeta[:, None])
        # unused slots contribute arc length so the density integrates to 1
        g = (1.0 + kern.sum(axis=1) + np.sum(np.isnan(inside), axis=1)) / (k + 1)
        vals = np.where(np.isfinite(f), f / g, 0.0)
        total += float(vals.sum())
        total_sq += float(np.sum(vals ** 2))
        done += n
        b += 1
    mean = total / samples
    var = max(total_sq / samples - mean ** 2, 0.0)
    return L1Estimate(j, mean, float(np.sqrt(var / samples)), int(r.degree[j - 1]), samples)
