"""
Bivariate Hawkes model for market and limit order arrivals.

The market flow excites itself (MM); the limit flow is excited by market
orders (LM) and by itself (LL). There is no market-by-limit term, so the
excitation structure is lower triangular:

.. math::
    \\mu^M(t) = \\mu_0 + \\sum_{t_i^M < t} \\alpha_{MM} e^{-\\beta_{MM}(t - t_i^M)}

    \\lambda^L(t) = \\lambda_0 + \\sum_{t_i^M < t} \\alpha_{LM} e^{-\\beta_{LM}(t - t_i^M)}
                  + \\sum_{t_j^L < t} \\alpha_{LL} e^{-\\beta_{LL}(t - t_j^L)}

Times are in seconds, intensities in events per second.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numba
import numpy as np
from scipy import optimize

MARKET = 0
LIMIT = 1
_MARK_CODES = {"M": MARKET, "L": LIMIT}
_MARK_NAMES = {MARKET: "M", LIMIT: "L"}

KERNEL_NAMES = ("MM", "LM", "LL")

# alpha < STABILITY_MARGIN * beta during fitting
STABILITY_MARGIN = 0.999


class UnstableModelError(ValueError):
    """Raised when a self-exciting kernel has branching ratio >= 1."""


def _component(component) -> int:
    if isinstance(component, str):
        key = component.strip().upper()[:1]
        if key not in _MARK_CODES:
            raise ValueError(f"unknown component {component!r}")
        return _MARK_CODES[key]
    if component not in (MARKET, LIMIT):
        raise ValueError(f"unknown component {component!r}")
    return int(component)


@dataclass(frozen=True)
class ExponentialKernel:
    """Kernel ``alpha * exp(-beta * t)``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be finite and > 0, got {self.beta}")

    @property
    def branching_ratio(self) -> float:
        return self.alpha / self.beta

    @property
    def characteristic_time(self) -> float:
        """Decay time ``1 / beta`` in seconds."""
        return 1.0 / self.beta


@dataclass(frozen=True)
class HawkesModelSpec:
    """Baselines and optional kernels of the market/limit order flow model.

    Any kernel left as ``None`` is switched off. Stability of the two
    self-exciting kernels is not checked here (fitting may explore the
    boundary); call :meth:`check_stable` before simulating.
    """

    mu0: float
    lambda0: float = 0.0
    kernel_MM: Optional[ExponentialKernel] = None
    kernel_LM: Optional[ExponentialKernel] = None
    kernel_LL: Optional[ExponentialKernel] = None

    def __post_init__(self):
        if not (self.mu0 > 0 and math.isfinite(self.mu0)):
            raise ValueError(f"mu0 must be > 0, got {self.mu0}")
        if not (self.lambda0 >= 0 and math.isfinite(self.lambda0)):
            raise ValueError(f"lambda0 must be >= 0, got {self.lambda0}")

    @property
    def structure(self) -> frozenset:
        return frozenset(name for name in KERNEL_NAMES if self.kernel(name) is not None)

    def kernel(self, name: str) -> Optional[ExponentialKernel]:
        if name not in KERNEL_NAMES:
            raise ValueError(f"unknown kernel {name!r}; expected one of {KERNEL_NAMES}")
        return getattr(self, "kernel_" + name)

    def is_stable(self) -> bool:
        return all(
            k is None or k.branching_ratio < 1 for k in (self.kernel_MM, self.kernel_LL)
        )

    def check_stable(self) -> None:
        for name in ("MM", "LL"):
            k = self.kernel(name)
            if k is not None and k.branching_ratio >= 1:
                raise UnstableModelError(
                    f"unstable {name} kernel: alpha_{name}/beta_{name} = "
                    f"{k.alpha:g}/{k.beta:g} = {k.branching_ratio:.4f} >= 1"
                )

    def as_array(self) -> np.ndarray:
        """Flat parameters ``(mu0, lambda0, a_MM, b_MM, a_LM, b_LM, a_LL, b_LL)``.

        Absent kernels are encoded as ``alpha=0, beta=1``.
        """
        out = [self.mu0, self.lambda0]
        for name in KERNEL_NAMES:
            k = self.kernel(name)
            out += [0.0, 1.0] if k is None else [k.alpha, k.beta]
        return np.array(out, dtype=float)

    def to_dict(self) -> dict:
        d = {"mu0": self.mu0, "lambda0": self.lambda0}
        for name in KERNEL_NAMES:
            k = self.kernel(name)
            d[f"alpha_{name}"] = None if k is None else k.alpha
            d[f"beta_{name}"] = None if k is None else k.beta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HawkesModelSpec":
        kernels = {}
        for name in KERNEL_NAMES:
            a, b = d.get(f"alpha_{name}"), d.get(f"beta_{name}")
            if (a is None) != (b is None):
                raise ValueError(f"kernel {name} needs both alpha and beta")
            if a is not None:
                kernels["kernel_" + name] = ExponentialKernel(float(a), float(b))
        return cls(mu0=float(d["mu0"]), lambda0=float(d.get("lambda0", 0.0)), **kernels)


@dataclass(frozen=True)
class EventStream:
    """Time-ordered marked events on ``[0, horizon]``.

    ``marks`` holds ``MARKET`` (0) or ``LIMIT`` (1). Timestamps must be
    strictly increasing; use :meth:`from_events` to sort and break ties.
    """

    times: np.ndarray
    marks: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=float)
        marks = np.ascontiguousarray(self.marks, dtype=np.int64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "marks", marks)
        times.flags.writeable = False
        marks.flags.writeable = False
        if times.ndim != 1 or times.shape != marks.shape:
            raise ValueError("times and marks must be 1-d arrays of equal length")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        if len(times):
            if times[0] < 0 or times[-1] > self.horizon:
                raise ValueError("event times must lie in [0, horizon]")
            if np.any(np.diff(times) <= 0):
                raise ValueError("event times must be strictly increasing")
            if np.any((marks != MARKET) & (marks != LIMIT)):
                raise ValueError("marks must be MARKET (0) or LIMIT (1)")

    @classmethod
    def from_events(cls, times, marks, horizon: float) -> "EventStream":
        """Sort events stably and nudge equal timestamps apart by one ulp."""
        times = np.asarray(times, dtype=float)
        marks = np.asarray(marks, dtype=np.int64)
        order = np.argsort(times, kind="stable")
        times = times[order].copy()
        marks = marks[order]
        for i in range(1, len(times)):
            if times[i] <= times[i - 1]:
                times[i] = np.nextafter(times[i - 1], np.inf)
        return cls(times, marks, horizon)

    @classmethod
    def from_components(cls, market_times, limit_times, horizon: float) -> "EventStream":
        market_times = np.asarray(market_times, dtype=float)
        limit_times = np.asarray(limit_times, dtype=float)
        times = np.concatenate([market_times, limit_times])
        marks = np.concatenate(
            [np.full(len(market_times), MARKET), np.full(len(limit_times), LIMIT)]
        )
        return cls.from_events(times, marks, horizon)

    def __len__(self):
        return len(self.times)

    def component_times(self, component) -> np.ndarray:
        return self.times[self.marks == _component(component)]

    @property
    def market_times(self) -> np.ndarray:
        return self.component_times(MARKET)

    @property
    def limit_times(self) -> np.ndarray:
        return self.component_times(LIMIT)

    def count(self, component) -> int:
        return int(np.count_nonzero(self.marks == _component(component)))

    def to_csv(self, path) -> None:
        write_event_stream(path, self)

    @classmethod
    def from_csv(cls, path) -> "EventStream":
        return read_event_stream(path)


def write_event_stream(path, stream: EventStream) -> None:
    """Write ``t,mark`` CSV with a leading ``# horizon=<seconds>`` line."""
    with open(path, "w", newline="") as f:
        f.write(f"# horizon={stream.horizon!r}\n")
        f.write("t,mark\n")
        for t, m in zip(stream.times.tolist(), stream.marks.tolist()):
            f.write(f"{t:.9f},{_MARK_NAMES[m]}\n")


def read_event_stream(path, horizon: Optional[float] = None) -> EventStream:
    times, marks = [], []
    header_seen = False
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key.strip() == "horizon" and horizon is None:
                    horizon = float(value)
                continue
            if not header_seen:
                if [c.strip() for c in line.split(",")] != ["t", "mark"]:
                    raise ValueError(f"{path}:{lineno}: expected header 't,mark'")
                header_seen = True
                continue
            try:
                t_str, m_str = line.split(",")
                times.append(float(t_str))
                marks.append(_MARK_CODES[m_str.strip().upper()])
            except (ValueError, KeyError):
                raise ValueError(f"{path}:{lineno}: malformed row {line!r}") from None
    if not header_seen:
        raise ValueError(f"{path}: missing header 't,mark'")
    if horizon is None:
        raise ValueError(f"{path}: no '# horizon=' line and no horizon given")
    return EventStream.from_events(times, marks, horizon)


# ---------------------------------------------------------------------------
# compiled kernels; params layout as HawkesModelSpec.as_array


@numba.njit(cache=True)
def _simulate_kernel(rng, p, horizon):
    mu0, lam0, a_mm, b_mm, a_lm, b_lm, a_ll, b_ll = p
    cap = 1024
    times = np.empty(cap)
    marks = np.empty(cap, dtype=np.int64)
    n = 0
    s_mm = 0.0
    s_lm = 0.0
    s_ll = 0.0
    t = 0.0
    while True:
        # intensities only decay between events, so the current total bounds the future
        bound = mu0 + s_mm + lam0 + s_lm + s_ll
        t_new = t + rng.standard_exponential() / bound
        if t_new > horizon:
            break
        dt = t_new - t
        s_mm *= math.exp(-b_mm * dt)
        s_lm *= math.exp(-b_lm * dt)
        s_ll *= math.exp(-b_ll * dt)
        t = t_new
        lam_m = mu0 + s_mm
        lam_l = lam0 + s_lm + s_ll
        u = rng.random() * bound
        if u < lam_m + lam_l:
            if n == cap:
                cap *= 2
                times2 = np.empty(cap)
                marks2 = np.empty(cap, dtype=np.int64)
                times2[:n] = times[:n]
                marks2[:n] = marks[:n]
                times = times2
                marks = marks2
            times[n] = t
            if u < lam_m:
                marks[n] = 0
                s_mm += a_mm
                s_lm += a_lm
            else:
                marks[n] = 1
                s_ll += a_ll
            n += 1
    return times[:n].copy(), marks[:n].copy()


@numba.njit(cache=True)
def _loglik_kernel(times, marks, p, horizon, which):
    """Log-likelihood per component; which: 0 market, 1 limit, 2 both."""
    mu0, lam0, a_mm, b_mm, a_lm, b_lm, a_ll, b_ll = p
    ll = 0.0
    s_mm = 0.0
    s_lm = 0.0
    s_ll = 0.0
    t_prev = 0.0
    comp_m = mu0 * horizon
    comp_l = lam0 * horizon
    for i in range(times.shape[0]):
        t = times[i]
        dt = t - t_prev
        s_mm *= math.exp(-b_mm * dt)
        s_lm *= math.exp(-b_lm * dt)
        s_ll *= math.exp(-b_ll * dt)
        t_prev = t
        rem = horizon - t
        if marks[i] == 0:
            if which != 1:
                lam = mu0 + s_mm
                if lam <= 0.0:
                    return -np.inf
                ll += math.log(lam)
                comp_m += a_mm / b_mm * (1.0 - math.exp(-b_mm * rem))
            if which != 0:
                comp_l += a_lm / b_lm * (1.0 - math.exp(-b_lm * rem))
            s_mm += a_mm
            s_lm += a_lm
        else:
            if which != 0:
                lam = lam0 + s_lm + s_ll
                if lam <= 0.0:
                    return -np.inf
                ll += math.log(lam)
                comp_l += a_ll / b_ll * (1.0 - math.exp(-b_ll * rem))
            s_ll += a_ll
    if which == 0:
        return ll - comp_m
    if which == 1:
        return ll - comp_l
    return ll - comp_m - comp_l


@numba.njit(cache=True)
def _compensator_kernel(times, marks, p, which):
    """Compensator of one component evaluated at each of its own events."""
    mu0, lam0, a_mm, b_mm, a_lm, b_lm, a_ll, b_ll = p
    n_out = 0
    for i in range(marks.shape[0]):
        if marks[i] == which:
            n_out += 1
    out = np.empty(n_out)
    # integral of the excitation part = (alpha/beta) * (count - decayed state / alpha)
    # tracked as sums of (1 - exp(-beta (t - t_j))) over past exciting events
    s_mm = 0.0
    s_lm = 0.0
    s_ll = 0.0
    n_m = 0
    n_l = 0
    t_prev = 0.0
    k = 0
    for i in range(times.shape[0]):
        t = times[i]
        dt = t - t_prev
        s_mm *= math.exp(-b_mm * dt)
        s_lm *= math.exp(-b_lm * dt)
        s_ll *= math.exp(-b_ll * dt)
        t_prev = t
        if marks[i] == which:
            if which == 0:
                out[k] = mu0 * t + a_mm / b_mm * (n_m - s_mm)
            else:
                out[k] = lam0 * t + a_lm / b_lm * (n_m - s_lm) + a_ll / b_ll * (n_l - s_ll)
            k += 1
        if marks[i] == 0:
            n_m += 1
            s_mm += 1.0
            s_lm += 1.0
        else:
            n_l += 1
            s_ll += 1.0
    return out


# ---------------------------------------------------------------------------


def intensity_at(spec: HawkesModelSpec, stream: EventStream, t: float, component) -> float:
    """Conditional intensity at ``t`` from events strictly before ``t``."""
    c = _component(component)
    if t < 0:
        raise ValueError("t must be >= 0")
    past = stream.times < t
    lag_m = t - stream.times[past & (stream.marks == MARKET)]
    if c == MARKET:
        value = spec.mu0
        if spec.kernel_MM is not None:
            value += spec.kernel_MM.alpha * np.exp(-spec.kernel_MM.beta * lag_m).sum()
        return float(value)
    value = spec.lambda0
    if spec.kernel_LM is not None:
        value += spec.kernel_LM.alpha * np.exp(-spec.kernel_LM.beta * lag_m).sum()
    if spec.kernel_LL is not None:
        lag_l = t - stream.times[past & (stream.marks == LIMIT)]
        value += spec.kernel_LL.alpha * np.exp(-spec.kernel_LL.beta * lag_l).sum()
    return float(value)


def stationary_rates(spec: HawkesModelSpec) -> tuple[float, float]:
    """Long-run mean event rates ``(market, limit)`` in events/s."""
    spec.check_stable()
    r_mm = spec.kernel_MM.branching_ratio if spec.kernel_MM else 0.0
    r_lm = spec.kernel_LM.branching_ratio if spec.kernel_LM else 0.0
    r_ll = spec.kernel_LL.branching_ratio if spec.kernel_LL else 0.0
    market = spec.mu0 / (1.0 - r_mm)
    limit = (spec.lambda0 + r_lm * market) / (1.0 - r_ll)
    return market, limit


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def simulate(spec: HawkesModelSpec, horizon: float, seed=None) -> EventStream:
    """Exact sample on ``[0, horizon]`` by Ogata thinning.

    ``seed`` may be an int, a ``SeedSequence`` or a ``numpy.random.Generator``
    (PCG64 by default); the same seed always gives the same stream.
    """
    spec.check_stable()
    if not horizon > 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    rng = _as_generator(seed)
    times, marks = _simulate_kernel(rng, spec.as_array(), float(horizon))
    return EventStream.from_events(times, marks, float(horizon))


def log_likelihood(spec: HawkesModelSpec, stream: EventStream, component=None) -> float:
    """Exact log-likelihood, summed over both components unless one is given.

    Returns ``-inf`` when some event of a scored component has zero intensity.
    """
    which = 2 if component is None else _component(component)
    return float(
        _loglik_kernel(stream.times, stream.marks, spec.as_array(), float(stream.horizon), which)
    )


def compensator(spec: HawkesModelSpec, stream: EventStream, component) -> np.ndarray:
    """Integrated intensity of ``component`` at each of that component's events."""
    c = _component(component)
    return _compensator_kernel(stream.times, stream.marks, spec.as_array(), c)


def residuals(spec: HawkesModelSpec, stream: EventStream, component) -> np.ndarray:
    """Time-changed inter-event durations; i.i.d. Exp(1) under the true model."""
    return np.diff(compensator(spec, stream, component), prepend=0.0)


# ---------------------------------------------------------------------------
# maximum likelihood


@dataclass(frozen=True)
class FitResult:
    spec: HawkesModelSpec
    log_likelihood: float
    converged: bool
    iterations: int
    message: str = ""
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {
            "params": self.spec.to_dict(),
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "message": self.message,
        }


@dataclass(frozen=True)
class ParameterBounds:
    """Box constraints applied to every fitted parameter of a given kind."""

    baseline: tuple = (1e-6, 1e3)
    alpha: tuple = (1e-6, 1e3)
    beta: tuple = (1e-3, 1e3)


def _parse_structure(structure) -> frozenset:
    if isinstance(structure, str):
        structure = [s for s in structure.replace("+", ",").replace(" ", ",").split(",") if s]
    names = frozenset(s.strip().upper() for s in structure)
    unknown = names - set(KERNEL_NAMES) - {"HP"}
    if unknown:
        raise ValueError(f"unknown kernels {sorted(unknown)}; expected a subset of {KERNEL_NAMES}")
    return names - {"HP"}


def _default_init(stream: EventStream, structure: frozenset) -> HawkesModelSpec:
    T = stream.horizon
    n_m = max(stream.count(MARKET), 1)
    n_l = stream.count(LIMIT)
    kernels = {}
    for name in structure:
        kernels["kernel_" + name] = ExponentialKernel(1.0, 4.0)
    mu0 = n_m / T * (0.5 if "MM" in structure else 1.0)
    lam0 = n_l / T * (0.5 if structure & {"LM", "LL"} else 1.0)
    return HawkesModelSpec(mu0=mu0, lambda0=max(lam0, 1e-6), **kernels)


@dataclass
class _Tracker:
    """Records the best objective value seen by the optimizer."""

    best_value: float = -np.inf
    best_x: Optional[np.ndarray] = None
    evaluations: int = 0
    history: list = field(default_factory=list)


def _fit_block(stream, which, kernel_names, x0, lo, hi, max_evals, xtol):
    """Maximise one component's likelihood over log-parameters."""
    base = np.array([0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
    # slots in the flat parameter array, baseline first
    slots = [which]
    for name in kernel_names:
        i = 2 + 2 * KERNEL_NAMES.index(name)
        slots += [i, i + 1]
    slots = np.array(slots)
    self_kernel = {"MM": "MM", "LL": "LL"}
    stab_pairs = [
        (1 + 2 * j, 2 + 2 * j)
        for j, name in enumerate(kernel_names)
        if name in self_kernel
    ]
    tracker = _Tracker()

    def objective(z):
        tracker.evaluations += 1
        if np.any(z < lo) or np.any(z > hi):
            return np.inf
        x = np.exp(z)
        for ia, ib in stab_pairs:
            if x[ia] >= STABILITY_MARGIN * x[ib]:
                return np.inf
        p = base.copy()
        p[slots] = x
        value = _loglik_kernel(stream.times, stream.marks, p, stream.horizon, which)
        if value > tracker.best_value:
            tracker.best_value = value
            tracker.best_x = x.copy()
        tracker.history.append(tracker.best_value)
        return -value if np.isfinite(value) else np.inf

    z0 = np.log(x0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = optimize.minimize(
            objective,
            z0,
            method="Nelder-Mead",
            options={
                "xatol": xtol,
                "fatol": 1e-9,
                "maxfev": max_evals,
                "maxiter": max_evals,
                "adaptive": len(z0) > 3,
            },
        )
    p = base.copy()
    p[slots] = tracker.best_x if tracker.best_x is not None else np.exp(z0)
    return p, tracker.best_value, bool(res.success), int(res.nit), tracker.evaluations, res.message


def fit_mle(
    stream: EventStream,
    structure: Iterable[str] | str = (),
    init: Optional[HawkesModelSpec] = None,
    bounds: Optional[ParameterBounds] = None,
    max_evals: int = 10_000,
    xtol: float = 1e-6,
) -> FitResult:
    """Maximum likelihood fit of the kernels named in ``structure``.

    The log-likelihood splits into a market term depending only on
    ``(mu0, MM)`` and a limit term depending only on ``(lambda0, LM, LL)``,
    so the two blocks are maximised independently. A block with no kernel
    has the closed-form Poisson estimate ``count / horizon``. Otherwise a
    Nelder-Mead search runs over log-parameters, stopping when the simplex
    shrinks below ``xtol`` (relative, since the search is in logs) or after
    ``max_evals`` likelihood evaluations.
    """
    structure = _parse_structure(structure)
    bounds = bounds or ParameterBounds()
    T = stream.horizon
    n_m, n_l = stream.count(MARKET), stream.count(LIMIT)
    if n_m < 2:
        raise ValueError(f"need at least 2 market events to fit, got {n_m}")
    if structure & {"LM", "LL"} and n_l < 2:
        raise ValueError(f"need at least 2 limit events to fit {sorted(structure)}, got {n_l}")

    if init is None:
        init = _default_init(stream, structure)
    p0 = init.as_array()
    for name in structure:
        if init.kernel(name) is None:
            i = 2 + 2 * KERNEL_NAMES.index(name)
            p0[i], p0[i + 1] = 1.0, 4.0

    fitted = np.array([n_m / T, n_l / T, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
    total_ll = 0.0
    converged = True
    iterations = evaluations = 0
    messages = []
    blocks = ((MARKET, [k for k in ("MM",) if k in structure]),
              (LIMIT, [k for k in ("LM", "LL") if k in structure]))
    for which, names in blocks:
        if not names:
            total_ll += _loglik_kernel(stream.times, stream.marks, fitted, T, which)
            continue
        x0 = [p0[which]]
        lo = [bounds.baseline[0]]
        hi = [bounds.baseline[1]]
        for name in names:
            i = 2 + 2 * KERNEL_NAMES.index(name)
            x0 += [p0[i], p0[i + 1]]
            lo += [bounds.alpha[0], bounds.beta[0]]
            hi += [bounds.alpha[1], bounds.beta[1]]
        x0 = np.clip(np.asarray(x0, dtype=float), lo, hi)
        p, value, ok, nit, nfev, msg = _fit_block(
            stream, which, names, x0, np.log(lo), np.log(hi), max_evals, xtol
        )
        fitted[which] = p[which]
        for name in names:
            i = 2 + 2 * KERNEL_NAMES.index(name)
            fitted[i], fitted[i + 1] = p[i], p[i + 1]
        total_ll += value
        converged &= ok
        iterations += nit
        evaluations += nfev
        if not ok:
            messages.append(f"{'market' if which == MARKET else 'limit'} block: {msg}")

    kernels = {}
    for name in structure:
        i = 2 + 2 * KERNEL_NAMES.index(name)
        kernels["kernel_" + name] = ExponentialKernel(float(fitted[i]), float(fitted[i + 1]))
    spec = HawkesModelSpec(mu0=float(fitted[0]), lambda0=float(fitted[1]), **kernels)
    return FitResult(
        spec=spec,
        log_likelihood=float(total_ll),
        converged=bool(converged),
        iterations=iterations,
        message="; ".join(messages),
        evaluations=evaluations,
    )


def with_kernel(spec: HawkesModelSpec, name: str, **changes) -> HawkesModelSpec:
    """Copy of ``spec`` with kernel ``name`` modified, e.g. ``beta=3.0``."""
    k = spec.kernel(name)
    if k is None:
        raise ValueError(f"spec has no {name} kernel")
    return replace(spec, **{"kernel_" + name: replace(k, **changes)})
