"""Monte Carlo profiles of the slice root distance ``delta``.

For a variable ``z_j`` every point of the remaining torus coordinates fixes a
one-variable slice whose numerator roots lie in the disk; ``delta`` is their
smallest distance to the circle. The measure of ``{delta < 1/x}`` decays
like a power of ``x``, and that power decides which ``L^p`` spaces contain
the partial derivative.

The sampler mixes a uniform component with boxes of geometrically shrinking
half-width around the projected singular set. Every sample carries the
exact importance weight ``u/q`` of the mixture density, so estimates stay
unbiased however the boxes are placed.

Random streams are Philox generators keyed by ``(seed, stratum, block)`` so
results do not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import config
from .errors import InsufficientTailSamples
from .poly import parse_angle
from .refine import TWO_PI, dedupe, periodic_coords, wrap
from .rif import RIFModel, slice_deltas

__all__ = [
    "LocalBox",
    "DeltaProfile",
    "sample_delta",
    "omega_measure",
    "lp_proxy_norm",
    "truncated_proxy",
    "default_threads",
    "parse_local",
]


def default_threads() -> int:
    """Worker count from ``RIF_FORGE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("RIF_FORGE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class LocalBox:
    """Axis-aligned box on the torus of the frozen coordinates.

    ``None`` entries in ``center`` mean the full circle in that coordinate.
    """

    center: tuple
    half_width: float = 0.5

    @property
    def dim(self) -> int:
        return len(self.center)

    def widths(self) -> np.ndarray:
        return np.array([np.pi if c is None else self.half_width for c in self.center])

    def volume(self) -> float:
        return float(np.prod(2 * self.widths()))

    def centers(self) -> np.ndarray:
        return np.array([0.0 if c is None else c for c in self.center])

    def contains(self, theta: np.ndarray) -> np.ndarray:
        rel = np.abs(wrap(theta - self.centers()))
        return np.all(rel <= self.widths(), axis=-1)

    def uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random((n, self.dim))
        return wrap(self.centers() + (2 * u - 1) * self.widths())

    def to_json(self):
        return {"center": [None if c is None else float(c) for c in self.center],
                "half_width": self.half_width}


def parse_local(text: str, half_width: float = 0.5) -> LocalBox:
    """``"0,0"``, ``"pi,*"`` and similar; ``*`` leaves a coordinate free."""
    parts = [s.strip() for s in text.split(",")]
    return LocalBox(tuple(None if s == "*" else parse_angle(s) for s in parts), half_width)


@dataclass
class DeltaProfile:
    """Weighted samples of ``delta`` for one variable.

    Attributes
    ----------
    variable : int
        1-based index of the free variable.
    angles : ndarray, shape (N, d-1)
        Frozen coordinates of each slice, in variable order without ``z_j``.
    delta : ndarray
        NaN for exceptional slices.
    exceptional : ndarray of bool
    weights : ndarray
        Importance weights normalized so ``E[w] = 1`` over the target box;
        zero for samples outside it.
    stratum : ndarray of int
        0 for the uniform stratum.
    volume : float
        Measure of the target region (``(2 pi)**(d-1)`` for the full torus).
    """

    variable: int
    angles: np.ndarray
    delta: np.ndarray
    exceptional: np.ndarray
    weights: np.ndarray
    stratum: np.ndarray
    volume: float
    sampler: dict
    strata: list = field(default_factory=list)
    box: LocalBox | None = None

    def __len__(self):
        return len(self.delta)

    @property
    def valid(self) -> np.ndarray:
        return ~self.exceptional & (self.weights > 0)

    def exceptional_fraction(self) -> float:
        return float(np.mean(self.exceptional)) if len(self) else 0.0

    def batches(self, k: int = 64) -> np.ndarray:
        """Interleaved batch label per sample (sample index modulo ``k``)."""
        return np.arange(len(self)) % k

    def summary(self) -> dict:
        ok = ~self.exceptional
        d = self.delta[ok]
        return {
            "variable": self.variable,
            "count": int(len(self)),
            "exceptional": int(np.sum(self.exceptional)),
            "volume": self.volume,
            "delta_min": float(np.min(d)) if d.size else None,
            "delta_median": float(np.median(d)) if d.size else None,
            "sampler": dict(self.sampler),
            "strata": list(self.strata),
            "box": self.box.to_json() if self.box else None,
        }

    def to_json_dict(self, include_samples: bool = False) -> dict:
        out = self.summary()
        if include_samples:
            out["samples"] = [
                {"angles": a.tolist(), "delta": None if np.isnan(dl) else float(dl),
                 "weight": float(w), "exceptional": bool(e)}
                for a, dl, w, e in zip(self.angles, self.delta, self.weights, self.exceptional)]
        return out

    def to_json(self, include_samples: bool = False) -> str:
        return json.dumps(self.to_json_dict(include_samples))

    def to_csv(self, path_or_buf=None) -> str | None:
        """Columns ``theta_k...`` (frozen variables), ``delta``, ``weight``,
        ``exceptional``."""
        names = [f"theta{k}" for k in range(1, self.angles.shape[1] + 2) if k != self.variable]
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(names + ["delta", "weight", "exceptional"])
        for a, dl, wt, e in zip(self.angles, self.delta, self.weights, self.exceptional):
            w.writerow([f"{x:.17g}" for x in a] + ["" if np.isnan(dl) else f"{dl:.17g}",
                                                    f"{wt:.17g}", int(e)])
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(text)
        return None


# ----------------------------------------------------------------- sampling

def _projected_centers(r: RIFModel, j: int, box: LocalBox | None, scan) -> list[np.ndarray]:
    """Projected point clouds of the singular components (one per component)."""
    if scan is None:
        from .scan import singular_scan

        scan = singular_scan(r)
    keep_cols = [k for k in range(r.nvars) if k != j - 1]
    out = []
    for comp in scan.components:
        pts = scan.points[comp.indices][:, keep_cols]
        if box is not None:
            rel = np.abs(wrap(pts - box.centers()))
            pts = pts[np.all(rel <= box.widths() + config.STRATA_RADII[0], axis=1)]
        if len(pts) == 0:
            continue
        pts = pts[dedupe(pts, 1e-7)]
        out.append(wrap(pts))
    return out


def _rng(seed: int, stratum: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stratum, block])))


def _allocate(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def sample_delta(r: RIFModel, j: int, mode: str = "stratified", count: int = 100_000,
                 seed: int = 0, local: LocalBox | str | None = None, scan=None,
                 threads: int | None = None, radii: Sequence[float] = config.STRATA_RADII
                 ) -> DeltaProfile:
    """Draw a weighted ``delta`` profile for variable ``j`` (1-based).

    Parameters
    ----------
    mode : {"uniform", "stratified"}
        Stratified mode spends half the budget on boxes of half-width
        ``radii`` around the projected singular components.
    local : LocalBox or str, optional
        Restrict the target region, e.g. ``"0,0"`` or ``"pi,*"``.
    scan : SingularScan, optional
        Reused instead of running a fresh scan.
    threads : int, optional
        Worker threads; results are identical for any value.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if not 1 <= j <= r.nvars:
        raise ValueError(f"variable index {j} out of range")
    if mode not in ("uniform", "stratified"):
        raise ValueError(f"unknown mode {mode!r}")
    dim = r.nvars - 1
    if isinstance(local, str):
        local = parse_local(local)
    box = local if local is not None else LocalBox((None,) * dim)
    if box.dim != dim:
        raise ValueError(f"local box needs {dim} coordinates")
    volume = box.volume()
    threads = threads or default_threads()

    clouds = _projected_centers(r, j, local, scan) if mode == "stratified" else []
    strata = [(rad, c) for rad in radii for c in range(len(clouds))]
    if strata:
        n_uniform = count - count // 2
        n_strata = _allocate(count // 2, len(strata))
    else:
        n_uniform, n_strata = count, []

    block = config.SAMPLING_BLOCK
    jobs = []  # (stratum id, block index, size)
    for b, size in enumerate(_chunks(n_uniform, block)):
        jobs.append((0, b, size))
    for s, n in enumerate(n_strata, start=1):
        for b, size in enumerate(_chunks(n, block)):
            jobs.append((s, b, size))

    def draw(job):
        s, b, size = job
        rng = _rng(seed, s, b)
        if s == 0:
            pts = box.uniform(rng, size)
        else:
            rad, c = strata[s - 1]
            cloud = clouds[c]
            idx = rng.integers(0, len(cloud), size)
            pts = wrap(cloud[idx] + (2 * rng.random((size, dim)) - 1) * rad)
        dl, exc = slice_deltas(r, j, pts)
        return pts, dl, exc

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(draw, jobs))
    else:
        results = [draw(job) for job in jobs]

    angles = np.concatenate([x[0] for x in results]) if results else np.zeros((0, dim))
    delta = np.concatenate([x[1] for x in results]) if results else np.zeros(0)
    exc = np.concatenate([x[2] for x in results]) if results else np.zeros(0, bool)
    stratum = np.concatenate([np.full(job[2], job[0]) for job in jobs]) if jobs \
        else np.zeros(0, int)

    q = _mixture_density(angles, box, n_uniform / count,
                         [(strata[s][0], clouds[strata[s][1]], n / count)
                          for s, n in enumerate(n_strata)])
    inside = box.contains(angles)
    weights = np.where(inside, 1.0 / (volume * q), 0.0)
    sampler = {"mode": mode, "seed": seed, "count": count}
    info = [{"stratum": 0, "kind": "uniform", "count": n_uniform}]
    info += [{"stratum": s + 1, "radius": strata[s][0], "component": strata[s][1],
              "count": n} for s, n in enumerate(n_strata)]
    return DeltaProfile(j, angles, delta, exc, weights, stratum, volume, sampler, info,
                        local)


def _chunks(n: int, size: int):
    while n > 0:
        yield min(n, size)
        n -= size


def _mixture_density(pts: np.ndarray, box: LocalBox, share_uniform: float,
                     strata: list) -> np.ndarray:
    """Exact density of the sampling mixture at ``pts``."""
    dim = pts.shape[1]
    q = share_uniform * box.contains(pts) / box.volume()
    data = periodic_coords(pts)
    trees = {}
    # group strata by component so nested radii can skip far-away points
    by_cloud: dict[int, list] = {}
    for rad, cloud, share in strata:
        by_cloud.setdefault(id(cloud), []).append((rad, cloud, share))
    for items in by_cloud.values():
        cloud = items[0][1]
        key = id(cloud)
        if key not in trees:
            trees[key] = cKDTree(periodic_coords(cloud), boxsize=TWO_PI)
        tree = trees[key]
        candidates = np.arange(len(pts))
        for rad, _, share in sorted(items, key=lambda t: -t[0]):
            if candidates.size == 0:
                break
            counts = tree.query_ball_point(data[candidates], rad, p=np.inf,
                                           return_length=True)
            hit = counts > 0
            candidates = candidates[hit]
            q[candidates] += share * counts[hit] / (len(cloud) * (2 * rad) ** dim)
    return q


# -------------------------------------------------------------- estimators

def omega_measure(profile: DeltaProfile, x: float, min_tail: int = config.MIN_TAIL_SAMPLES,
                  strict: bool = True) -> dict:
    """Importance-weighted measure of ``{delta < 1/x}``.

    Returns
    -------
    dict
        ``estimate``, ``stderr`` and ``tail`` (raw sample count in the set).

    Raises
    ------
    InsufficientTailSamples
        When ``strict`` and fewer than ``min_tail`` samples fall in the set.
    """
    if len(profile) == 0:
        raise ValueError("empty profile")
    ok = profile.valid
    ind = ok & (np.nan_to_num(profile.delta, nan=np.inf) < 1.0 / x)
    tail = int(np.sum(ind))
    if strict and tail < min_tail:
        raise InsufficientTailSamples(f"only {tail} samples with delta < 1/{x:g}")
    vals = np.where(ind, profile.weights, 0.0)
    n = len(vals)
    est = profile.volume * vals.mean()
    err = profile.volume * vals.std(ddof=1) / np.sqrt(n) if n > 1 else np.inf
    return {"estimate": float(est), "stderr": float(err), "tail": tail}


def _power_values(profile: DeltaProfile, p: float) -> np.ndarray:
    ok = profile.valid
    d = np.where(ok, profile.delta, 1.0)
    return np.where(ok, profile.weights * d ** (1.0 - p), 0.0)


def truncated_proxy(profile: DeltaProfile, p: float, cutoffs: Sequence[float]) -> np.ndarray:
    """``volume * mean(w * delta**(1-p) * [delta >= 1/X])`` for each cutoff X."""
    vals = _power_values(profile, p)
    d = np.nan_to_num(profile.delta, nan=0.0)
    return np.array([profile.volume * np.mean(np.where(d >= 1.0 / X, vals, 0.0))
                     for X in cutoffs])


def _reliable_cutoff(profile: DeltaProfile, min_tail: int) -> float:
    """Largest ``x`` whose tail set still holds ``min_tail`` raw samples."""
    d = np.sort(profile.delta[profile.valid])
    if d.size < min_tail:
        return 1.0
    return float(1.0 / d[min_tail - 1]) if d[min_tail - 1] > 0 else np.inf


def lp_proxy_norm(profile: DeltaProfile, p: float,
                  min_tail: int = config.MIN_TAIL_SAMPLES,
                  max_cutoff: float = config.PROXY_MAX_CUTOFF) -> dict:
    """Estimate ``int delta**(1-p)`` with a divergence heuristic.

    The integral is truncated at ``delta >= 1/X`` along a ladder of cutoffs
    ``X`` growing by :data:`config.DIVERGENCE_LADDER` up to the largest
    cutoff the samples resolve (at most ``max_cutoff``; deeper than that the
    boxes around curve-like singular sets no longer cover the tail). The result is flagged divergent when the
    last two rungs each raise the estimate by more than
    :data:`config.DIVERGENCE_JUMP`.

    Returns
    -------
    dict
        ``estimate`` (the full weighted mean, or the last rung when
        divergent), ``divergent``, ``ladder`` (cutoff,
        value pairs) and ``growth_exponent`` (log-log slope of the increments
        over the last rungs, ``nan`` when not measurable).
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if len(profile) == 0:
        raise ValueError("empty profile")
    top = min(_reliable_cutoff(profile, min_tail), max_cutoff)
    full = profile.volume * float(np.mean(_power_values(profile, p)))
    if top <= 4.0:
        return {"p": p, "estimate": full, "divergent": False, "ladder": [],
                "growth_exponent": float("nan")}
    step = config.DIVERGENCE_LADDER
    n_rungs = int(np.floor(np.log(top) / np.log(step) + 1e-9))
    cutoffs = step ** np.arange(1, n_rungs + 1)
    values = truncated_proxy(profile, p, cutoffs)
    growth = values[1:] / np.maximum(values[:-1], 1e-300) - 1.0
    divergent = bool(len(growth) >= 2 and growth[-1] > config.DIVERGENCE_JUMP
                     and growth[-2] > config.DIVERGENCE_JUMP)
    slope = float("nan")
    inc = np.diff(values)
    if len(inc) >= 3 and np.all(inc[-3:] > 0):
        xs = np.log(cutoffs[-3:])
        slope = float(np.polyfit(xs, np.log(inc[-3:]), 1)[0])
    # a convergent integral is reported in full; a divergent one by its
    # deepest truncation, which is only a lower bound
    est = float(values[-1]) if divergent else full
    return {"p": p, "estimate": est, "divergent": divergent,
            "ladder": [[float(c), float(v)] for c, v in zip(cutoffs, values)],
            "growth_exponent": slope}
