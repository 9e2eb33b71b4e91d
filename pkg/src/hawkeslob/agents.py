"""
Zero-intelligence agents driving the order book.

A liquidity provider submits and cancels limit orders; a noise trader sends
market orders. Order arrival times come from the Hawkes model of
:mod:`hawkeslob.hawkes`, cancellation times from an independent Poisson
clock. Every order picks the bid or ask side with probability 1/2.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import hawkes
from .hawkes import ExponentialKernel, HawkesModelSpec
from .ingest import KIND_CANCEL, KIND_LIMIT, KIND_MARKET, KIND_NAMES, OrderFlow
from .lob import ASK, BID, DEFAULT_TICK, SIDE_NAMES, OrderBook, write_book_dump, write_trades

DEFAULT_INITIAL_MID = 10_000
DEFAULT_WARMUP = 3600.0
DAY = 86_400.0


@dataclass(frozen=True)
class AgentParams:
    """Placement, volume and cancellation parameters shared by all variants.

    Defaults are the reference values used by every preset.
    ``cancel_mode`` picks what a cancellation event does:

    ``"event"`` (default)
        with probability ``delta``, one uniformly chosen resting order goes.
    ``"thin"``
        each resting order goes independently with probability ``delta``.
    ``"single"``
        one uniformly chosen resting order goes; ``delta`` is unused.
    """

    m_P1: float = 2.7
    nu_P1: float = 2.0
    s_P1: float = 0.9
    m_V1: float = 275.0
    m_V2: float = 380.0
    lambda_C: float = 1.35
    delta: float = 0.015
    cancel_mode: str = "event"

    def __post_init__(self):
        if not self.nu_P1 > 0:
            raise ValueError("nu_P1 must be > 0")
        if not self.s_P1 > 0:
            raise ValueError("s_P1 must be > 0")
        if not (self.m_V1 > 0 and self.m_V2 > 0):
            raise ValueError("mean volumes must be > 0")
        if not self.lambda_C >= 0:
            raise ValueError("lambda_C must be >= 0")
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")
        if self.cancel_mode not in ("thin", "single", "event"):
            raise ValueError(f"unknown cancel_mode {self.cancel_mode!r}")


# Reference Hawkes parameters, keyed by model name.
VARIANTS = {
    "HP": HawkesModelSpec(mu0=0.22, lambda0=1.69),
    "LM": HawkesModelSpec(mu0=0.22, lambda0=0.79, kernel_LM=ExponentialKernel(5.8, 1.8)),
    "MM": HawkesModelSpec(mu0=0.09, lambda0=1.69, kernel_MM=ExponentialKernel(1.7, 6.0)),
    "MM+LL": HawkesModelSpec(
        mu0=0.09, lambda0=0.60,
        kernel_MM=ExponentialKernel(1.7, 6.0), kernel_LL=ExponentialKernel(1.7, 6.0),
    ),
    "MM+LM": HawkesModelSpec(
        mu0=0.12, lambda0=0.82,
        kernel_MM=ExponentialKernel(1.7, 6.0), kernel_LM=ExponentialKernel(5.8, 1.8),
    ),
    "MM+LL+LM": HawkesModelSpec(
        mu0=0.12, lambda0=0.02,
        kernel_MM=ExponentialKernel(1.7, 5.8), kernel_LM=ExponentialKernel(5.8, 1.8),
        kernel_LL=ExponentialKernel(1.7, 6.0),
    ),
}


def variant_name(name: str) -> str:
    """Canonical variant name; accepts ``"MM LL LM"``, ``"mm+ll+lm"``, etc."""
    parts = [p for p in name.upper().replace("+", " ").replace("_", " ").split() if p]
    key = "+".join(parts)
    if key not in VARIANTS:
        # effects may be listed in any order
        wanted = sorted(parts)
        for k in VARIANTS:
            if sorted(k.split("+")) == wanted:
                return k
        raise ValueError(f"unknown variant {name!r}; expected one of {list(VARIANTS)}")
    return key


@dataclass(frozen=True)
class ModelVariant:
    name: str
    spec: HawkesModelSpec

    def __post_init__(self):
        expected = set() if self.name == "HP" else set(self.name.split("+"))
        if set(self.spec.structure) != expected:
            raise ValueError(
                f"variant {self.name} expects kernels {sorted(expected)}, "
                f"spec has {sorted(self.spec.structure)}"
            )

    @classmethod
    def preset(cls, name: str) -> "ModelVariant":
        key = variant_name(name)
        return cls(key, VARIANTS[key])


class BookEmptiedError(RuntimeError):
    """A side of the book ran out of orders during a run."""

    def __init__(self, message, t=None, event_index=None, side=None):
        super().__init__(message)
        self.t = t
        self.event_index = event_index
        self.side = side


# ---------------------------------------------------------------------------
# agent draws


def draw_placement_price(book: OrderBook, side: int, params: AgentParams, rng,
                         reference: Optional[int] = None, max_attempts: int = 1000) -> int:
    """Student-t placement around the same-side best quote.

    Bids are placed at ``best_bid - (m + s*x)`` and asks at
    ``best_ask + (m + s*x)``, rounded to the nearest tick, so orders sit
    ``m`` ticks inside the book on average. Draws that would cross the
    opposite best or fall below one tick are redrawn. ``reference`` is used
    when the same side is empty.
    """
    ref = book.best(side)
    if ref is None:
        ref = reference
    if ref is None:
        raise ValueError(f"no {SIDE_NAMES[side]} quote to place around")
    opposite = book.best(-side)
    for _ in range(max_attempts):
        offset = params.m_P1 + params.s_P1 * rng.standard_t(params.nu_P1)
        price = math.floor(ref - offset + 0.5) if side == BID else math.floor(ref + offset + 0.5)
        if price < 1:
            continue
        if opposite is None or (price < opposite if side == BID else price > opposite):
            return price
    # give up: one tick inside the spread
    if opposite is None:
        return max(1, ref)
    return max(1, opposite - 1) if side == BID else opposite + 1


def draw_volume(mean: float, rng) -> int:
    """Exponential volume with the given mean, rounded up to at least 1."""
    return max(1, math.ceil(rng.exponential(mean)))


def cancellation_step(book: OrderBook, params: AgentParams, rng) -> list[int]:
    """Cancel resting liquidity-provider orders at one cancellation event.

    In ``thin`` mode every resting order goes independently with probability
    ``delta``; the count is drawn as Binomial(n, delta) and that many orders
    are picked without replacement, which has the same law.
    """
    chosen = _choose_cancellations(book, params, rng)
    for oid in chosen:
        book.cancel(oid)
    return chosen


def _choose_cancellations(book, params, rng) -> list[int]:
    ids = book.resting_ids
    n = len(ids)
    if n == 0:
        return []
    if params.cancel_mode == "single":
        return [ids[int(rng.integers(n))]]
    if params.cancel_mode == "event":
        return [ids[int(rng.integers(n))]] if rng.random() < params.delta else []
    k = int(rng.binomial(n, params.delta))
    if k == 0:
        return []
    return [ids[i] for i in np.sort(rng.choice(n, size=k, replace=False))]


# ---------------------------------------------------------------------------
# simulation


@dataclass
class SimulationOutput:
    """Everything recorded after the warm-up, with times in seconds from its end."""

    variant: str
    spec: HawkesModelSpec
    params: AgentParams
    seed: int
    horizon: float
    warmup: float
    events: OrderFlow
    spread_times: np.ndarray
    spreads: np.ndarray
    mid_times: np.ndarray
    mids: np.ndarray
    trades: list
    stream: hawkes.EventStream
    counts: dict = field(default_factory=dict)
    book_dump: Optional[list] = None
    tick: float = DEFAULT_TICK

    def order_flow(self) -> OrderFlow:
        return self.events

    def manifest(self) -> dict:
        market_rate, limit_rate = hawkes.stationary_rates(self.spec)
        return {
            "variant": self.variant,
            "seed": self.seed,
            "horizon": self.horizon,
            "warmup": self.warmup,
            "tick": self.tick,
            "generator": "numpy PCG64 via SeedSequence(seed).spawn",
            "hawkes": self.spec.to_dict(),
            "agent": asdict(self.params),
            "counts": dict(self.counts),
            "stationary_prediction": {
                "market": market_rate * self.horizon,
                "limit": limit_rate * self.horizon,
            },
        }

    def to_csv(self, outdir) -> dict:
        """Write events, spread, mid, trades and order-stream CSVs; return their paths."""
        os.makedirs(outdir, exist_ok=True)
        paths = {name: os.path.join(outdir, f"{name}.csv")
                 for name in ("events", "spread", "mid", "trades", "stream")}
        ev = self.events
        with open(paths["events"], "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["t", "kind", "side", "price_ticks", "volume"])
            for t, k, s, p, v in zip(ev.times.tolist(), ev.kinds.tolist(), ev.sides.tolist(),
                                     ev.prices.tolist(), ev.volumes.tolist()):
                w.writerow([f"{t:.9f}", KIND_NAMES[k], SIDE_NAMES[s], p, v])
        _write_series(paths["spread"], ["t", "spread_ticks"], self.spread_times, self.spreads, "{:d}")
        _write_series(paths["mid"], ["t", "mid_ticks"], self.mid_times, self.mids, "{:.1f}")
        write_trades(paths["trades"], self.trades)
        self.stream.to_csv(paths["stream"])
        if self.book_dump is not None:
            paths["book"] = os.path.join(outdir, "book.csv")
            write_book_dump(paths["book"], self.book_dump)
        return paths


def _write_series(path, header, times, values, fmt):
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for t, v in zip(times.tolist(), values.tolist()):
            f.write(f"{t:.9f}," + fmt.format(int(v) if fmt == "{:d}" else v) + "\n")


def read_series(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``t,<value>`` CSV written by :meth:`SimulationOutput.to_csv`."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].copy(), data[:, 1].copy()


def run_simulation(
    variant,
    agent_params: Optional[AgentParams] = None,
    horizon: float = DAY,
    seed: int = 0,
    warmup: float = DEFAULT_WARMUP,
    initial_mid: int = DEFAULT_INITIAL_MID,
    tick: float = DEFAULT_TICK,
    record_book: bool = False,
) -> SimulationOutput:
    """Simulate one run of a model variant.

    During a warm-up of ``warmup`` seconds only the liquidity provider acts
    (Poisson limit orders at the variant's stationary limit rate, plus
    cancellations) so that the book is populated. The recorded run then
    covers ``horizon`` seconds, timed from the end of the warm-up.

    Market and limit arrival times are a single exact sample of the Hawkes
    model; each limit order and market order is applied to the book as it
    arrives, and spread and mid price are recorded after every event.

    Raises :class:`BookEmptiedError` if either side of the book empties
    during the recorded run.
    """
    if isinstance(variant, str):
        variant = ModelVariant.preset(variant)
    elif isinstance(variant, HawkesModelSpec):
        variant = ModelVariant(_name_for(variant), variant)
    spec = variant.spec
    spec.check_stable()
    params = agent_params or AgentParams()
    if not horizon > 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    if not warmup >= 0:
        raise ValueError(f"warmup must be >= 0, got {warmup}")

    flow_seq, cancel_seq, warm_seq, agent_seq = np.random.SeedSequence(seed).spawn(4)
    rng = np.random.default_rng(agent_seq)
    book = OrderBook(tick)
    refs = {BID: initial_mid - 1, ASK: initial_mid + 1}

    # -- warm-up: liquidity provider alone
    if warmup > 0:
        rng_w = np.random.default_rng(warm_seq)
        _, limit_rate = hawkes.stationary_rates(spec)
        n_l = rng_w.poisson(limit_rate * warmup)
        n_c = rng_w.poisson(params.lambda_C * warmup)
        times = np.concatenate([rng_w.uniform(-warmup, 0.0, n_l), rng_w.uniform(-warmup, 0.0, n_c)])
        kinds = np.concatenate([np.full(n_l, KIND_LIMIT), np.full(n_c, KIND_CANCEL)])
        order = np.argsort(times, kind="stable")
        for t, kind in zip(times[order].tolist(), kinds[order].tolist()):
            if kind == KIND_LIMIT:
                side = BID if rng.random() < 0.5 else ASK
                price = draw_placement_price(book, side, params, rng, reference=refs[side])
                book.submit_limit(side, price, draw_volume(params.m_V1, rng), t)
                refs[side] = book.best(side)
            else:
                cancellation_step(book, params, rng)

    # -- recorded run
    stream = hawkes.simulate(spec, horizon, np.random.default_rng(flow_seq))
    rng_c = np.random.default_rng(cancel_seq)
    n_c = rng_c.poisson(params.lambda_C * horizon)
    cancel_times = np.sort(rng_c.uniform(0.0, horizon, n_c))
    times = np.concatenate([stream.times, cancel_times])
    kinds = np.concatenate([
        np.where(stream.marks == hawkes.MARKET, KIND_MARKET, KIND_LIMIT),
        np.full(n_c, KIND_CANCEL),
    ])
    order = np.argsort(times, kind="stable")
    times, kinds = times[order].tolist(), kinds[order].tolist()

    start = {
        "resting_orders": len(book),
        "resting_volume": book.resting_volume(),
        "filled": book.orders_filled,
        "cancelled": book.orders_cancelled,
        "volume_added": book.volume_added,
        "volume_executed": book.volume_executed,
        "volume_cancelled": book.volume_cancelled,
    }

    ev_t, ev_k, ev_s, ev_p, ev_v = [], [], [], [], []
    sp_t, sp_v, mid_v = [], [], []
    trades = []
    dump = [] if record_book else None
    n_market = n_limit = n_cancel_events = skipped = 0
    live = not (book.is_empty(BID) or book.is_empty(ASK))
    if live:
        sp_t.append(0.0)
        sp_v.append(book.spread())
        mid_v.append(book.mid_price())
        if dump is not None:
            dump.append(book.snapshot(0))

    for i, (t, kind) in enumerate(zip(times, kinds)):
        fills = ()
        if kind == KIND_LIMIT:
            n_limit += 1
            side = BID if rng.random() < 0.5 else ASK
            price = draw_placement_price(book, side, params, rng, reference=refs[side])
            volume = draw_volume(params.m_V1, rng)
            _, fills = book.submit_limit(side, price, volume, t)
            refs[side] = book.best(side) or refs[side]
            ev_t.append(t); ev_k.append(KIND_LIMIT); ev_s.append(side); ev_p.append(price); ev_v.append(volume)
            trades += fills
        elif kind == KIND_MARKET:
            n_market += 1
            side = BID if rng.random() < 0.5 else ASK
            volume = draw_volume(params.m_V2, rng)
            if book.is_empty(-side):
                # only possible before the book has been two-sided (warmup=0)
                skipped += 1
                continue
            fills = book.submit_market(side, volume, t)
            trades += fills
            ev_t.append(t); ev_k.append(KIND_MARKET); ev_s.append(side)
            ev_p.append(fills[-1].price); ev_v.append(sum(f.volume for f in fills))
        else:
            n_cancel_events += 1
            for oid in _choose_cancellations(book, params, rng):
                o = book.order(oid)
                ev_t.append(t); ev_k.append(KIND_CANCEL); ev_s.append(o.side)
                ev_p.append(o.price); ev_v.append(o.volume)
                book.cancel(oid)

        empty_bid, empty_ask = book.is_empty(BID), book.is_empty(ASK)
        if live and (empty_bid or empty_ask):
            which = "bid" if empty_bid else "ask"
            raise BookEmptiedError(
                f"{variant.name} run (seed {seed}) emptied the {which} side at t={t:.3f}s "
                f"after event {i} ({KIND_NAMES[kind]}); "
                f"{n_market} market / {n_limit} limit orders so far",
                t=t, event_index=i, side=which,
            )
        if not live and not (empty_bid or empty_ask):
            live = True
        if live:
            sp_t.append(t)
            sp_v.append(book.spread())
            mid_v.append(book.mid_price())
            if dump is not None:
                dump.append(book.snapshot(int(round(t * 1000)), fills if kind == KIND_MARKET else ()))

    counts = {
        "market_orders": n_market,
        "limit_orders": n_limit,
        "cancellation_events": n_cancel_events,
        "cancelled_orders": book.orders_cancelled - start["cancelled"],
        "filled_orders": book.orders_filled - start["filled"],
        "trades": len(trades),
        "initial_resting_orders": start["resting_orders"],
        "final_resting_orders": len(book),
        "initial_resting_volume": start["resting_volume"],
        "final_resting_volume": book.resting_volume(),
        "volume_added": book.volume_added - start["volume_added"],
        "volume_executed": book.volume_executed - start["volume_executed"],
        "volume_cancelled": book.volume_cancelled - start["volume_cancelled"],
        "market_orders_skipped": skipped,
    }
    events = OrderFlow(
        np.array(ev_t, dtype=float), np.array(ev_k, dtype=np.int64), np.array(ev_s, dtype=np.int64),
        np.array(ev_p, dtype=np.int64), np.array(ev_v, dtype=np.int64),
    )
    sp_t = np.array(sp_t, dtype=float)
    return SimulationOutput(
        variant=variant.name, spec=spec, params=params, seed=seed, horizon=float(horizon),
        warmup=float(warmup), events=events,
        spread_times=sp_t, spreads=np.array(sp_v, dtype=np.int64),
        mid_times=sp_t.copy(), mids=np.array(mid_v, dtype=float),
        trades=trades, stream=stream, counts=counts, book_dump=dump, tick=tick,
    )


def _name_for(spec: HawkesModelSpec) -> str:
    s = spec.structure
    if not s:
        return "HP"
    return "+".join(k for k in ("MM", "LL", "LM") if k in s)
