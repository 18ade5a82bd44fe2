"""Decay fits of ``mu(Omega_x)`` and the resulting critical exponent.

``d phi / d z_j`` lies in ``L^p`` exactly when ``int mu(Omega_x) x**(p-2) dx``
converges, so a power law ``mu(Omega_x) ~ C x**(-alpha)`` puts the critical
exponent at ``p_star = 1 + alpha``. The fit is cross-checked by evaluating
the truncated proxy integral ``int delta**(1-p)`` directly around
``p_star``; the two routes are reported side by side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import config
from .refine import wrap
from .sampling import DeltaProfile, LocalBox, lp_proxy_norm, sample_delta

__all__ = ["IntegrabilityReport", "fit_decay", "direct_index", "default_x_grid",
           "axis_parallel_lines", "integrability"]


def default_x_grid() -> np.ndarray:
    """21 points from ``1e2`` to ``1e7``; below ``1e2`` the decay has not
    settled into its power law on the catalog models."""
    return np.geomspace(1e2, 1e7, 21)


@dataclass
class IntegrabilityReport:
    """Fitted decay exponent and derived critical index for one variable.

    ``p_star`` is infinite (and ``alpha_hat`` too) when no sample ever enters
    ``Omega_x`` on the grid, which happens when ``delta`` is bounded below.
    """

    variable: int
    alpha_hat: float
    alpha_ci: tuple
    p_star: float
    fit_r2: float
    x_window: tuple
    direct_checks: list
    p_direct: float = float("nan")
    flags: list = field(default_factory=list)
    curve: list = field(default_factory=list)

    @property
    def reliable(self) -> bool:
        return not self.flags

    def to_json_dict(self) -> dict:
        def num(x):
            return None if x is None or not np.isfinite(x) else float(x)

        def index(x):
            return "inf" if x == np.inf else num(x)

        return {
            "variable": self.variable,
            "alpha_hat": num(self.alpha_hat),
            "alpha_ci": [num(x) for x in self.alpha_ci],
            "p_star": index(self.p_star),
            "fit_r2": num(self.fit_r2),
            "x_window": [num(x) for x in self.x_window],
            "direct_checks": self.direct_checks,
            "p_direct": index(self.p_direct),
            "flags": list(self.flags),
            "curve": self.curve,
        }


def _tail_matrix(profile: DeltaProfile, xs: np.ndarray, batches: int):
    """Per-batch weighted tail sums and raw tail counts for each ``x``."""
    ok = profile.valid
    d = np.where(ok, np.nan_to_num(profile.delta, nan=np.inf), np.inf)
    w = profile.weights
    labels = profile.batches(batches)
    sums = np.zeros((batches, len(xs)))
    counts = np.zeros(len(xs), dtype=int)
    for k, x in enumerate(xs):
        ind = d < 1.0 / x
        counts[k] = int(np.sum(ind))
        sums[:, k] = np.bincount(labels, weights=np.where(ind, w, 0.0), minlength=batches)
    n_per = np.bincount(labels, minlength=batches)
    return sums, n_per, counts


def _slope(logx: np.ndarray, logy: np.ndarray):
    A = np.stack([logx, np.ones_like(logx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, logy, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((logy - pred) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), min(max(r2, 0.0), 1.0)


def fit_decay(profile: DeltaProfile, x_grid: Sequence[float] | None = None,
              bootstrap: int = 200, batches: int = 64, direct: bool = True,
              axis_line: bool = False) -> IntegrabilityReport:
    """Fit ``log mu(Omega_x)`` against ``log x`` and derive ``p_star``.

    Parameters
    ----------
    profile : DeltaProfile
    x_grid : sequence of float, optional
        Geometric grid spanning at least three decades; defaults to
        :func:`default_x_grid`.
    bootstrap : int
        Resamples (of interleaved sample batches) for the 95% interval.
    direct : bool
        Evaluate the proxy integral at ``p_star`` and ``p_star +- 0.25``.
    axis_line : bool
        The caller knows that the singular set contains a line parallel to
        the sampled axis. The slice density is discontinuous there and the
        result is flagged as not confident.

    Returns
    -------
    IntegrabilityReport
        ``flags`` may contain ``fit_unreliable`` (r^2 below 0.95 or window
        under two decades), ``no_tail``, ``direct_disagreement`` and
        ``axis_parallel_line``.
    """
    xs = np.asarray(default_x_grid() if x_grid is None else x_grid, dtype=float)
    if xs.ndim != 1 or len(xs) < 3 or np.any(np.diff(xs) <= 0):
        raise ValueError("x_grid must be an increasing sequence")
    if np.log10(xs[-1] / xs[0]) < 3 - 1e-9:
        raise ValueError("x_grid must span at least three decades")
    j = profile.variable
    flags = ["axis_parallel_line"] if axis_line else []
    sums, n_per, counts = _tail_matrix(profile, xs, batches)
    valid = counts >= config.MIN_TAIL_SAMPLES
    # the window is the longest run of resolvable x from the start of the grid
    stop = int(np.argmin(valid)) if not valid.all() else len(xs)
    if stop < 2:
        flags.append("no_tail")
        checks = _direct_checks(profile, [2.0, 3.0, 4.0, 5.0, 6.0]) if direct else []
        return IntegrabilityReport(j, np.inf, (np.inf, np.inf), np.inf, 0.0,
                                   (float(xs[0]), float(xs[-1])), checks, np.nan, flags)
    win = slice(0, stop)
    xw = xs[win]
    est = profile.volume * sums[:, win].sum(axis=0) / len(profile)
    logx = np.log(xw)
    slope, r2 = _slope(logx, np.log(est))
    alpha = -slope

    rng = np.random.default_rng([profile.sampler.get("seed", 0), j, 7])
    boots = []
    for _ in range(bootstrap):
        pick = rng.integers(0, batches, batches)
        tot = sums[pick][:, win].sum(axis=0)
        if np.any(tot <= 0):
            continue
        s, _ = _slope(logx, np.log(profile.volume * tot / n_per[pick].sum()))
        boots.append(-s)
    ci = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))) if boots \
        else (np.nan, np.nan)

    decades = float(np.log10(xw[-1] / xw[0]))
    if r2 < config.FIT_MIN_R2 or decades < config.FIT_MIN_DECADES:
        flags.append("fit_unreliable")
    p_star = 1.0 + alpha
    checks, p_direct = [], float("nan")
    if direct:
        checks = _direct_checks(profile, [p_star - 0.25, p_star, p_star + 0.25])
        g = checks[-1]["growth_exponent"]
        if g is not None:
            p_direct = checks[-1]["p"] - g
            if abs(p_direct - p_star) > config.DISAGREEMENT:
                flags.append("direct_disagreement")
    curve = [{"x": float(x), "omega": float(v), "tail": int(c)}
             for x, v, c in zip(xw, est, counts[win])]
    return IntegrabilityReport(j, alpha, ci, p_star, r2, (float(xw[0]), float(xw[-1])),
                               checks, p_direct, flags, curve)


def _direct_checks(profile: DeltaProfile, ps: Sequence[float]) -> list:
    out = []
    for p in ps:
        p = max(1.0, float(p))
        res = lp_proxy_norm(profile, p)
        g = res["growth_exponent"]
        out.append({
            "p": p,
            "integral_estimate": "DIVERGENT" if res["divergent"] else res["estimate"],
            "growth_exponent": None if not np.isfinite(g) else g,
        })
    return out


def direct_index(profile: DeltaProfile, ps: Sequence[float] | None = None,
                 axis_line: bool = False) -> IntegrabilityReport:
    """Critical index from the proxy integral alone, without a decay fit.

    ``p_direct`` is the first exponent on ``ps`` (default ``1.25..6`` in
    steps of ``0.25``) whose truncated proxy integral diverges; it is
    infinite when none does. The fit fields are left empty.
    """
    ps = np.arange(1.25, 6.01, 0.25) if ps is None else np.asarray(ps, dtype=float)
    checks = _direct_checks(profile, ps)
    first = next((c["p"] for c in checks if c["integral_estimate"] == "DIVERGENT"), np.inf)
    flags = ["axis_parallel_line"] if axis_line else []
    return IntegrabilityReport(profile.variable, np.nan, (np.nan, np.nan), np.nan, np.nan,
                               (np.nan, np.nan), checks, float(first), flags)


def axis_parallel_lines(scan, j: int, spread: float = 0.05) -> list[int]:
    """Indices of curve components of ``scan`` that run parallel to axis ``j``.

    A component qualifies when it wraps around the ``j``-th circle while its
    other coordinates stay within ``spread`` of their circular mean.
    """
    out = []
    for k, comp in enumerate(scan.components):
        if comp.dimension != 1:
            continue
        pts = scan.points[comp.indices]
        rest = np.delete(pts, j - 1, axis=1)
        center = np.angle(np.mean(np.exp(1j * rest), axis=0))
        if np.max(np.abs(wrap(rest - center))) < spread and np.ptp(pts[:, j - 1]) > np.pi:
            out.append(k)
    return out


def integrability(r, j: int, samples: int = 1_000_000, seed: int = 0,
                  mode: str = "stratified", local: LocalBox | str | None = None,
                  x_grid: Sequence[float] | None = None, threads: int | None = None,
                  direct: bool = True, scan=None, method: str = "both") -> IntegrabilityReport:
    """Sample ``delta`` for variable ``j`` and fit its decay in one call.

    ``method`` is ``"fit"`` (decay fit only), ``"direct"`` (proxy integrals
    on a grid of exponents, see :func:`direct_index`) or ``"both"``.

    The ``axis_parallel_line`` flag is raised when the singular set contains
    a line parallel to the ``z_j`` axis: slices along it degenerate and the
    density is discontinuous there.
    """
    if scan is None:
        from .scan import singular_scan

        scan = singular_scan(r)
    profile = sample_delta(r, j, mode, samples, seed, local=local, scan=scan, threads=threads)
    vline = bool(axis_parallel_lines(scan, j))
    if method == "direct":
        return direct_index(profile, axis_line=vline)
    if method not in ("fit", "both"):
        raise ValueError(f"unknown method {method!r}")
    return fit_decay(profile, x_grid, direct=direct and method == "both", axis_line=vline)
