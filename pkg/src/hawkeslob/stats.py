"""
Empirical distributions and two-sample tests for durations, spreads and
mid-price moves.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import special

# asymptotic p-values are only documented as reliable above this size
MIN_ASYMPTOTIC_N = 30


@dataclass(frozen=True)
class EmpiricalPdf:
    """Histogram density; ``sum(density * widths) == 1``."""

    edges: np.ndarray
    density: np.ndarray
    n: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        if np.all(e > 0) and self._log:
            return np.sqrt(e[:-1] * e[1:])
        return 0.5 * (e[:-1] + e[1:])

    @property
    def _log(self) -> bool:
        e = self.edges
        if len(e) < 3 or np.any(e <= 0):
            return False
        r = e[1:] / e[:-1]
        return np.allclose(r, r[0]) and not np.allclose(np.diff(e), e[1] - e[0])

    @property
    def mass(self) -> np.ndarray:
        return self.density * self.widths

    def mass_below(self, x: float) -> float:
        """Probability mass below ``x``, linear within the bin containing ``x``."""
        e = self.edges
        cdf = np.concatenate([[0.0], np.cumsum(self.mass)])
        return float(np.interp(x, e, cdf))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["x", "density"])
            for x, d in zip(self.centers.tolist(), self.density.tolist()):
                w.writerow([repr(x), repr(d)])


def empirical_pdf(samples, binning="log", bins: int = 50, range=None) -> EmpiricalPdf:
    """Normalised histogram of ``samples``.

    ``binning`` is ``"log"`` (log-spaced, positive samples only), ``"linear"``,
    ``"unit"`` (one bin per integer value, for spreads in ticks) or an
    explicit array of edges.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empirical_pdf needs at least one sample")
    lo, hi = (x.min(), x.max()) if range is None else range
    if isinstance(binning, str):
        if binning == "log":
            if lo <= 0:
                raise ValueError("log binning needs positive samples")
            if lo == hi:
                lo, hi = lo / 1.5, hi * 1.5
                bins = 1
            edges = np.geomspace(lo, hi, bins + 1)
        elif binning == "linear":
            if lo == hi:
                lo, hi = lo - 0.5, hi + 0.5
                bins = 1
            edges = np.linspace(lo, hi, bins + 1)
        elif binning == "unit":
            edges = np.arange(np.floor(lo) - 0.5, np.ceil(hi) + 1.0)
        else:
            raise ValueError(f"unknown binning {binning!r}")
    else:
        edges = np.asarray(binning, dtype=float)
    counts, edges = np.histogram(x, bins=edges)
    total = counts.sum()
    if total == 0:
        raise ValueError("no samples fall inside the bin range")
    density = counts / (total * np.diff(edges))
    return EmpiricalPdf(edges, density, int(total))


@dataclass(frozen=True)
class WeightedDistribution:
    """Discrete distribution: sorted distinct ``values`` with normalised ``weights``."""

    values: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_samples(cls, values, weights=None) -> "WeightedDistribution":
        v = np.asarray(values, dtype=float)
        w = np.ones_like(v) if weights is None else np.asarray(weights, dtype=float)
        if v.shape != w.shape:
            raise ValueError("values and weights differ in length")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        uniq, inv = np.unique(v, return_inverse=True)
        totals = np.bincount(inv, weights=w, minlength=len(uniq))
        s = totals.sum()
        if not s > 0:
            raise ValueError("total weight must be positive")
        return cls(uniq, totals / s)

    def mean(self) -> float:
        return float(np.dot(self.values, self.weights))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot((self.values - m) ** 2, self.weights))

    def mass_at_or_below(self, x: float) -> float:
        return float(self.weights[self.values <= x].sum())

    def mass_above(self, x: float) -> float:
        return float(self.weights[self.values > x].sum())

    def quantile(self, q: float) -> float:
        cdf = np.cumsum(self.weights)
        return float(self.values[min(np.searchsorted(cdf, q - 1e-12), len(cdf) - 1)])

    def as_dict(self) -> dict:
        return dict(zip(self.values.tolist(), self.weights.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["x", "weight"])
            for x, p in zip(self.values.tolist(), self.weights.tolist()):
                w.writerow([repr(x), repr(p)])


def time_weighted_spread(times, spreads, end: Optional[float] = None):
    """Spread distribution in calendar time and in event time.

    Each observation is weighted by how long it stays in force, i.e. until
    the next observation (or ``end`` for the last one; without ``end`` the
    last observation gets no weight). Returns ``(weighted, event_time)``.
    """
    t = np.asarray(times, dtype=float)
    s = np.asarray(spreads, dtype=float)
    if t.shape != s.shape:
        raise ValueError("times and spreads differ in length")
    if len(t) < 2:
        raise ValueError("need at least 2 observations for the time-weighted distribution")
    if np.any(np.diff(t) < 0):
        raise ValueError("times must be non-decreasing")
    hold = np.diff(t, append=t[-1] if end is None else end)
    if end is not None and hold[-1] < 0:
        raise ValueError("end precedes the last observation")
    return WeightedDistribution.from_samples(s, hold), WeightedDistribution.from_samples(s)


class TercileWaitingTimes(NamedTuple):
    lower: float
    middle: float
    upper: float
    boundaries: tuple
    counts: tuple


def conditional_waiting_time(times, spreads, event_times=None) -> TercileWaitingTimes:
    """Mean waiting time to the next event by spread tercile.

    Spread observations are split at the empirical 1/3 and 2/3 quantiles
    ``q1, q2`` of the observed values into the lower-closed intervals
    ``s < q1``, ``q1 <= s < q2`` and ``s >= q2``, so a value equal to a
    boundary joins the group above it.
    ``event_times`` defaults to the observation times themselves; the last
    observation, with no following event, is dropped. An empty tercile
    reports ``nan``.
    """
    t = np.asarray(times, dtype=float)
    s = np.asarray(spreads, dtype=float)
    if t.shape != s.shape:
        raise ValueError("times and spreads differ in length")
    if np.any(np.diff(t) < 0):
        raise ValueError("times must be non-decreasing")
    ev = t if event_times is None else np.sort(np.asarray(event_times, dtype=float))
    nxt = np.searchsorted(ev, t, side="right")
    has_next = nxt < len(ev)
    wait = ev[nxt[has_next]] - t[has_next]
    s = s[has_next]
    if len(np.unique(s)) < 3:
        raise ValueError("need at least 3 distinct spread values followed by an event")
    q1, q2 = np.quantile(s, [1 / 3, 2 / 3])
    groups = (s < q1, (s >= q1) & (s < q2), s >= q2)
    means = [float(wait[g].mean()) if g.any() else float("nan") for g in groups]
    return TercileWaitingTimes(*means, boundaries=(float(q1), float(q2)),
                               counts=tuple(int(g.sum()) for g in groups))


def mid_price_variations(times, mids, interval: float = 30.0,
                         start: Optional[float] = None, end: Optional[float] = None) -> np.ndarray:
    """First differences of the mid price sampled every ``interval`` seconds.

    The value at each grid point is the last observation at or before it.
    The grid runs from ``start`` (default: first observation) to ``end``
    (default: last observation).
    """
    t = np.asarray(times, dtype=float)
    m = np.asarray(mids, dtype=float)
    if len(t) == 0:
        raise ValueError("empty series")
    start = t[0] if start is None else start
    end = t[-1] if end is None else end
    if start < t[0]:
        raise ValueError("grid starts before the first observation")
    grid = start + interval * np.arange(int(np.floor((end - start) / interval + 1e-9)) + 1)
    if len(grid) < 2:
        raise ValueError("series spans fewer than 2 sampling points")
    idx = np.searchsorted(t, grid, side="right") - 1
    return np.diff(m[idx])


# ---------------------------------------------------------------------------
# two-sample tests


class TwoSampleResult(NamedTuple):
    test: str
    statistic: float
    p_value: float
    direction: str = ""

    def to_csv(self, path) -> None:
        write_test_results(path, [self])


def write_test_results(path, results, alpha: Optional[float] = None) -> None:
    """One row per test; with ``alpha`` a ``reject`` column flags p < alpha."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["test", "statistic", "p_value", "direction"] + (["reject"] if alpha is not None else []))
        for r in results:
            row = [r.test, repr(float(r.statistic)), repr(float(r.p_value)), r.direction]
            if alpha is not None:
                row.append(str(r.p_value < alpha).lower())
            w.writerow(row)


def random_subsample(x, n: Optional[int], rng) -> np.ndarray:
    """At most ``n`` values drawn without replacement, in original order; all of ``x`` if ``n`` is falsy."""
    x = np.asarray(x)
    if not n or len(x) <= n:
        return x
    return x[np.sort(rng.choice(len(x), size=n, replace=False))]


def _samples(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    return a, b


def ks_two_sample(a, b) -> TwoSampleResult:
    """Kolmogorov-Smirnov ``D = sup |F_a - F_b|`` with the asymptotic Kolmogorov p-value."""
    a, b = _samples(a, b)
    n, m = a.size, b.size
    a, b = np.sort(a), np.sort(b)
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / n
    cdf_b = np.searchsorted(b, pooled, side="right") / m
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = np.sqrt(n * m / (n + m))
    p = float(special.kolmogorov(en * d)) if d > 0 else 1.0
    return TwoSampleResult("ks", d, min(max(p, 0.0), 1.0))


def _cvm_limit_cdf(x: float) -> float:
    """CDF of the limiting Cramer-von Mises distribution (Anderson-Darling series)."""
    if x <= 0:
        return 0.0
    total = 0.0
    k = 0
    while True:
        y = 4 * k + 1
        q = y * y / (16 * x)
        term = (np.exp(special.gammaln(k + 0.5) - special.gammaln(k + 1))
                / (np.pi ** 1.5 * np.sqrt(x)) * np.sqrt(y) * np.exp(-q) * special.kv(0.25, q))
        total += term
        if abs(term) < 1e-12 or k > 200:
            break
        k += 1
    return float(total)


def cvm_two_sample(a, b) -> TwoSampleResult:
    """Two-sample Cramer-von Mises criterion ``T`` with an asymptotic p-value.

    ``T = U / (n m (n + m)) - (4 n m - 1) / (6 (n + m))`` where
    ``U = n sum (r_i - i)^2 + m sum (s_j - j)^2`` over the pooled ranks
    (mid-ranks for ties) of each sorted sample.
    """
    from scipy.stats import rankdata

    a, b = _samples(a, b)
    n, m = a.size, b.size
    ranks = rankdata(np.concatenate([a, b]))
    r = np.sort(ranks[:n])
    s = np.sort(ranks[n:])
    u = n * np.sum((r - np.arange(1, n + 1)) ** 2) + m * np.sum((s - np.arange(1, m + 1)) ** 2)
    N = n + m
    t = u / (n * m * N) - (4 * n * m - 1) / (6 * N)
    # standardise with the exact finite-sample mean and variance (Anderson 1962)
    # before reading the limiting distribution
    k = n * m
    mean_t = (1 + 1 / N) / 6
    var_t = (N + 1) * (4 * k * N - 3 * (n * n + m * m) - 2 * k) / (45 * N * N * 4 * k)
    p = 1.0 - _cvm_limit_cdf(1 / 6 + (t - mean_t) / np.sqrt(45 * var_t))
    return TwoSampleResult("cvm", float(t), float(min(max(p, 0.0), 1.0)))


def wilcoxon_mw(a, b, alternative: str = "two-sided") -> TwoSampleResult:
    """Mann-Whitney U for sample ``a`` against ``b``.

    ``U`` counts pairs with ``a_i > b_j`` (ties count 1/2), so
    ``U_a + U_b = n m``. The p-value uses the normal approximation with tie
    and continuity corrections. ``alternative="less"`` tests whether ``a``
    is stochastically smaller than ``b``. ``direction`` reads ``"a < b"``,
    ``"a > b"`` or ``"a = b"`` from the sign of ``U - n m / 2``.
    """
    from scipy.stats import rankdata

    if alternative not in ("two-sided", "less", "greater"):
        raise ValueError(f"unknown alternative {alternative!r}")
    a, b = _samples(a, b)
    n, m = a.size, b.size
    ranks = rankdata(np.concatenate([a, b]))
    u = float(ranks[:n].sum() - n * (n + 1) / 2)
    mean = n * m / 2
    _, tie_counts = np.unique(ranks, return_counts=True)
    N = n + m
    var = n * m / 12 * ((N + 1) - np.sum(tie_counts ** 3 - tie_counts) / (N * (N - 1))) if N > 1 else 0.0
    direction = "a < b" if u < mean else ("a > b" if u > mean else "a = b")
    if var <= 0:
        return TwoSampleResult("mann-whitney", u, 1.0, direction)
    sd = np.sqrt(var)
    if alternative == "two-sided":
        z = (abs(u - mean) - 0.5) / sd
        p = 2 * special.ndtr(-max(z, 0.0))
    elif alternative == "less":
        z = (u - mean + 0.5) / sd
        p = special.ndtr(z)
    else:
        z = (u - mean - 0.5) / sd
        p = special.ndtr(-z)
    return TwoSampleResult("mann-whitney", u, float(min(max(p, 0.0), 1.0)), direction)


def compare_samples(a, b, alternative: str = "two-sided") -> list[TwoSampleResult]:
    """KS, CvM and Mann-Whitney results for ``a`` against ``b``."""
    return [ks_two_sample(a, b), cvm_two_sample(a, b), wilcoxon_mw(a, b, alternative)]
