"""Local-averaging prediction-error estimates over delay-vector series.

For a reference vector y, the in-ball successor cloud over an epsilon ladder
gives the empirical conditional mean (chi) and conditional deviation (sigma);
the reported sigma_hat is sigma at the smallest epsilon still holding at
least min_count neighbors, a conservative stand-in for the epsilon -> 0
limit.  A point is called predictable when sigma_hat falls below a fixed
absolute threshold.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import default_x0, trajectory
from .embedding import delay_series, measure_states

DEFAULT_MIN_COUNT = 20
DEFAULT_THRESHOLD = 1e-3
DEFAULT_LADDER_TOP = 0.2
DEFAULT_LADDER_LEVELS = 8

# ball populations up to this size are reduced with the exact two-pass
# formulas; larger ones go through centered prefix sums
_DIRECT_MAX = 16384


class EmptyBallError(ValueError):
    """No historical vector inside the requested ball."""


@dataclass(frozen=True)
class LadderEntry:
    eps: float
    count: int
    chi: np.ndarray | None
    sigma: float | None


@dataclass(frozen=True)
class SigmaEstimate:
    """Per-reference ladder of conditional statistics and its extrapolation.

    sigma_hat is None when no ladder level reaches min_count; predictable is
    None in that case as well.  slope is the log-log trend of sigma over the
    admissible levels (None with fewer than two usable levels).
    """

    y: np.ndarray
    ladder: tuple
    sigma_hat: float | None
    sigma_hat_eps: float | None
    sigma_hat_count: int
    predictable: bool | None
    slope: float | None

    @property
    def defined(self):
        return self.sigma_hat is not None


def _pair_arrays(series):
    return np.atleast_2d(series.predecessors), np.atleast_2d(series.successors)


def neighbor_indices(series, y, eps):
    """Indices i (ascending) with a successor and ||y_i - y|| < eps."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    pred, _ = _pair_arrays(series)
    y = np.asarray(y, dtype=float).reshape(-1)
    d = np.linalg.norm(pred - y, axis=1)
    return np.flatnonzero(d < eps)


def chi_sigma(series, y, eps):
    """Conditional mean and RMS deviation of successors over the eps-ball.

    Returns (chi, sigma, count); count == 0 signals an empty ball and chi,
    sigma are None then (distinct from a zero sigma).
    """
    idx = neighbor_indices(series, y, eps)
    count = int(len(idx))
    if count == 0:
        return None, None, 0
    _, succ = _pair_arrays(series)
    cloud = succ[idx]
    chi = cloud.mean(axis=0)
    sigma = float(np.sqrt(np.mean(np.sum((cloud - chi) ** 2, axis=1))))
    return chi, sigma, count


def predict_next(series, eps):
    """Average successor of the historical vectors near the last one."""
    vectors = np.atleast_2d(series.vectors) if hasattr(series, "vectors") else None
    if vectors is None:
        raise TypeError("predict_next needs a DelaySeries")
    y_n = vectors[-1]
    chi, _, count = chi_sigma(series, y_n, eps)
    if count == 0:
        raise EmptyBallError(f"no neighbors within eps={eps}")
    return chi


def series_diameter(series):
    """Bounding-box diagonal of the delay vectors (exact range for k = 1)."""
    pred, _ = _pair_arrays(series)
    span = pred.max(axis=0) - pred.min(axis=0)
    return float(np.linalg.norm(span))


def default_ladder(series, levels=DEFAULT_LADDER_LEVELS, top=DEFAULT_LADDER_TOP):
    """Geometric ladder top * 2^-j scaled by the series diameter."""
    diam = series_diameter(series)
    if diam <= 0.0:
        diam = 1.0
    return [top * diam * 0.5**j for j in range(levels)]


def _validate_ladder(ladder, min_count):
    ladder = [float(e) for e in ladder]
    if len(ladder) < 1 or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be strictly decreasing")
    if ladder[-1] <= 0.0:
        raise ValueError("ladder levels must be positive")
    if min_count < 2:
        raise ValueError("min_count must be >= 2")
    return ladder


def _finish_profile(y, entries, min_count, threshold):
    sigma_hat = None
    hat_eps = None
    hat_count = 0
    for e in entries:  # entries ordered by decreasing eps
        if e.count >= min_count:
            sigma_hat = e.sigma
            hat_eps = e.eps
            hat_count = e.count
    admissible = [e for e in entries if e.count >= min_count and e.sigma is not None and e.sigma > 0.0]
    slope = None
    if len(admissible) >= 2:
        lx = np.log([e.eps for e in admissible])
        ly = np.log([e.sigma for e in admissible])
        slope = float(np.polyfit(lx, ly, 1)[0])
    predictable = None if sigma_hat is None else bool(sigma_hat < threshold)
    return SigmaEstimate(
        y=np.asarray(y, dtype=float).reshape(-1),
        ladder=tuple(entries),
        sigma_hat=sigma_hat,
        sigma_hat_eps=hat_eps,
        sigma_hat_count=hat_count,
        predictable=predictable,
        slope=slope,
    )


class BruteEngine:
    """Exact per-reference ball statistics via one distance pass per reference."""

    def __init__(self, series):
        self.pred, self.succ = _pair_arrays(series)
        self.k = self.pred.shape[1]

    def profile(self, y, ladder, min_count=DEFAULT_MIN_COUNT, threshold=DEFAULT_THRESHOLD):
        ladder = _validate_ladder(ladder, min_count)
        y = np.asarray(y, dtype=float).reshape(-1)
        d = np.linalg.norm(self.pred - y, axis=1)
        coarse = d < ladder[0]
        d_sub = d[coarse]
        s_sub = self.succ[coarse]
        entries = []
        for eps in ladder:
            mask = d_sub < eps
            count = int(mask.sum())
            if count == 0:
                entries.append(LadderEntry(eps, 0, None, None))
                continue
            cloud = s_sub[mask]
            chi = cloud.mean(axis=0)
            sigma = float(np.sqrt(np.mean(np.sum((cloud - chi) ** 2, axis=1))))
            entries.append(LadderEntry(eps, count, chi, sigma))
        return _finish_profile(y, entries, min_count, threshold)


class Sorted1DEngine:
    """Scalar-series engine: interval search on the sorted predecessors.

    Large balls are reduced through centered prefix sums (count > _DIRECT_MAX);
    small ones use the same exact two-pass formulas as BruteEngine.
    """

    def __init__(self, series):
        pred, succ = _pair_arrays(series)
        if pred.shape[1] != 1:
            raise ValueError("Sorted1DEngine requires k = 1")
        order = np.argsort(pred[:, 0], kind="stable")
        self.ys = np.ascontiguousarray(pred[order, 0])
        self.ss = np.ascontiguousarray(succ[order, 0])
        self.center = float(self.ss.mean()) if len(self.ss) else 0.0
        centered = self.ss - self.center
        self.s1 = np.concatenate([[0.0], np.cumsum(centered)])
        self.s2 = np.concatenate([[0.0], np.cumsum(centered * centered)])

    def interval(self, y, eps):
        lo = int(np.searchsorted(self.ys, y - eps, side="right"))
        hi = int(np.searchsorted(self.ys, y + eps, side="left"))
        return lo, hi

    def _stats(self, lo, hi):
        count = hi - lo
        if count <= _DIRECT_MAX:
            cloud = self.ss[lo:hi]
            chi = float(cloud.mean())
            sigma = float(np.sqrt(np.mean((cloud - chi) ** 2)))
            return chi, sigma
        m1 = (self.s1[hi] - self.s1[lo]) / count
        m2 = (self.s2[hi] - self.s2[lo]) / count
        var = max(m2 - m1 * m1, 0.0)
        return self.center + m1, math.sqrt(var)

    def profile(self, y, ladder, min_count=DEFAULT_MIN_COUNT, threshold=DEFAULT_THRESHOLD):
        ladder = _validate_ladder(ladder, min_count)
        yv = float(np.asarray(y, dtype=float).reshape(-1)[0])
        entries = []
        for eps in ladder:
            lo, hi = self.interval(yv, eps)
            if hi <= lo:
                entries.append(LadderEntry(eps, 0, None, None))
                continue
            chi, sigma = self._stats(lo, hi)
            entries.append(LadderEntry(eps, hi - lo, np.array([chi]), sigma))
        return _finish_profile([yv], entries, min_count, threshold)


def make_engine(series):
    """Pick the ball-statistics engine for a series (sorted intervals for long
    scalar series, direct distances otherwise)."""
    pred = np.atleast_2d(series.predecessors)
    if pred.shape[1] == 1 and len(pred) >= 50_000:
        return Sorted1DEngine(series)
    return BruteEngine(series)


def sigma_profile(series, y, ladder, min_count=DEFAULT_MIN_COUNT, threshold=DEFAULT_THRESHOLD):
    """Ladder of (eps, count, chi, sigma) for one reference vector.

    sigma_hat is taken at the smallest eps whose ball holds at least
    min_count neighbors; levels below min_count are recorded but excluded
    from extrapolation.
    """
    return BruteEngine(series).profile(y, ladder, min_count, threshold)


@dataclass(frozen=True)
class PredictabilityReport:
    """Per-reference estimates plus summary statistics for one observable."""

    ref_indices: np.ndarray
    estimates: tuple
    ladder: tuple
    threshold: float
    min_count: int

    @property
    def defined_estimates(self):
        return [e for e in self.estimates if e.defined]

    @property
    def predictable_fraction(self):
        defined = self.defined_estimates
        if not defined:
            return float("nan")
        return sum(1 for e in defined if e.predictable) / len(defined)

    def sigma_quantiles(self, qs=(0.1, 0.25, 0.5, 0.75, 0.9)):
        vals = [e.sigma_hat for e in self.defined_estimates]
        if not vals:
            return {q: float("nan") for q in qs}
        arr = np.asarray(vals)
        return {q: float(np.quantile(arr, q)) for q in qs}

    def csv_rows(self):
        header = ["ref_idx", "eps", "count", "sigma", "chi_norm"]
        rows = []
        for ref, est in zip(self.ref_indices, self.estimates):
            for entry in est.ladder:
                rows.append([
                    float(ref),
                    entry.eps,
                    float(entry.count),
                    float("nan") if entry.sigma is None else entry.sigma,
                    float("nan") if entry.chi is None else float(np.linalg.norm(entry.chi)),
                ])
        return header, rows

    def summary_text(self):
        """JSON-like one-liner: predictable fraction, quantiles, slope trend."""
        slopes = [e.slope for e in self.estimates if e.slope is not None]
        median_slope = float(np.median(slopes)) if slopes else float("nan")
        q = self.sigma_quantiles()
        parts = [
            f'"n_refs": {len(self.estimates)}',
            f'"defined": {len(self.defined_estimates)}',
            f'"predictable_fraction": {self.predictable_fraction!r}',
            '"sigma_hat_quantiles": {' + ", ".join(f'"{k}": {v!r}' for k, v in q.items()) + "}",
            f'"median_loglog_slope": {median_slope!r}',
            f'"threshold": {self.threshold!r}',
        ]
        return "{" + ", ".join(parts) + "}"


def profile_references(series, ref_vectors, ladder=None, min_count=DEFAULT_MIN_COUNT,
                       threshold=DEFAULT_THRESHOLD, ref_indices=None, engine=None):
    """Profiles for a batch of reference vectors over a shared ladder."""
    if ladder is None:
        ladder = default_ladder(series)
    if engine is None:
        engine = make_engine(series)
    estimates = tuple(
        engine.profile(y, ladder, min_count, threshold) for y in np.atleast_2d(ref_vectors)
    )
    if ref_indices is None:
        ref_indices = np.arange(len(estimates))
    return PredictabilityReport(
        ref_indices=np.asarray(ref_indices),
        estimates=estimates,
        ladder=tuple(float(e) for e in ladder),
        threshold=threshold,
        min_count=min_count,
    )


def predictability_report(cfg, h, k, n_orbit, n_refs, ladder=None,
                          threshold=DEFAULT_THRESHOLD, min_count=DEFAULT_MIN_COUNT,
                          x0=None, burn_in=0, seed=0):
    """End-to-end report: orbit, measurements, delay series, sampled references.

    References are drawn uniformly (seeded) from the second half of the
    series, which samples the push-forward of the orbit's empirical measure.
    """
    if n_orbit < k + 1 or n_refs < 1:
        raise ValueError("resources must be positive")
    if x0 is None:
        x0 = default_x0(cfg)
    orbit = trajectory(cfg, x0, n_orbit, burn_in)
    measurements = measure_states(h, cfg, orbit)
    series = delay_series(measurements, k)
    n_pred = len(series) - 1
    tail = np.arange(n_pred // 2, n_pred)
    rng = np.random.default_rng(seed)
    if len(tail) > n_refs:
        refs = np.sort(rng.choice(tail, size=n_refs, replace=False))
    else:
        refs = tail
    if ladder is None:
        ladder = default_ladder(series)
    return profile_references(
        series,
        series.vectors[refs],
        ladder=ladder,
        min_count=min_count,
        threshold=threshold,
        ref_indices=refs,
    )
