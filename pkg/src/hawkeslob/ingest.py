"""
Order flow reconstruction from five-level book snapshots.

Consecutive snapshots are diffed price by price:

1. non-empty trade fields give a market order with that price and volume;
2. a quantity increase at a price gives a limit order for the difference;
3. a quantity decrease with no trade to explain it gives a cancellation;
4. orders of the same type, side and timestamp are merged, volumes summed.
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .lob import ASK, BID, SIDE_NAMES, parse_side

N_LEVELS = 5

KIND_LIMIT = 0
KIND_MARKET = 1
KIND_CANCEL = 2
KIND_NAMES = {KIND_LIMIT: "limit", KIND_MARKET: "market", KIND_CANCEL: "cancel"}
KIND_CODES = {v: k for k, v in KIND_NAMES.items()} | {"L": KIND_LIMIT, "M": KIND_MARKET, "C": KIND_CANCEL}

SNAPSHOT_HEADER = (
    ["ts_ms"]
    + [f"bid_{f}_{i}" for i in range(1, N_LEVELS + 1) for f in ("px", "qty")]
    + [f"ask_{f}_{i}" for i in range(1, N_LEVELS + 1) for f in ("px", "qty")]
    + ["trade_px", "trade_qty"]
)

PAIRINGS = (
    "all-events",
    "market-next-limit",
    "limit-next-market",
    "market-next-limit-same-side",
    "market-next-limit-opposite-side",
)


class Level(NamedTuple):
    price: int
    qty: int


@dataclass(frozen=True)
class Snapshot:
    """Visible book state: bids best-first (descending), asks best-first (ascending)."""

    ts_ms: int
    bids: tuple = ()
    asks: tuple = ()
    trade: Optional[Level] = None

    def __post_init__(self):
        object.__setattr__(self, "bids", tuple(Level(int(p), int(q)) for p, q in self.bids))
        object.__setattr__(self, "asks", tuple(Level(int(p), int(q)) for p, q in self.asks))
        if self.trade is not None:
            object.__setattr__(self, "trade", Level(int(self.trade[0]), int(self.trade[1])))
        for name, levels, desc in (("bid", self.bids, True), ("ask", self.asks, False)):
            if len(levels) > N_LEVELS:
                raise ValueError(f"at most {N_LEVELS} {name} levels, got {len(levels)}")
            prices = [lv.price for lv in levels]
            ordered = all(a > b for a, b in zip(prices, prices[1:])) if desc else \
                all(a < b for a, b in zip(prices, prices[1:]))
            if not ordered:
                raise ValueError(f"{name} levels not strictly ordered: {prices}")
            if any(lv.qty <= 0 for lv in levels):
                raise ValueError(f"{name} quantities must be positive")
        if self.trade is not None and self.trade.qty <= 0:
            raise ValueError("trade quantity must be positive")

    def levels(self, side: int) -> tuple:
        return self.bids if side == BID else self.asks

    def to_row(self) -> list:
        row = [str(self.ts_ms)]
        for levels in (self.bids, self.asks):
            for i in range(N_LEVELS):
                row += [str(levels[i].price), str(levels[i].qty)] if i < len(levels) else ["", ""]
        row += [str(self.trade.price), str(self.trade.qty)] if self.trade else ["", ""]
        return row


@dataclass(frozen=True)
class ReconstructedOrder:
    timestamp: int  # ms
    kind: int
    price: int
    volume: int
    side: int

    def __post_init__(self):
        if self.volume <= 0:
            raise ValueError("volume must be positive")

    @property
    def kind_name(self) -> str:
        return KIND_NAMES[self.kind]


def parse_snapshots(path) -> list[Snapshot]:
    """Read a snapshot CSV; errors carry the offending line number."""
    out = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header") from None
        header = [h.strip() for h in header]
        missing = [c for c in SNAPSHOT_HEADER if c not in header]
        if missing:
            raise ValueError(f"{path}:1: missing columns {missing}")
        col = {name: header.index(name) for name in SNAPSHOT_HEADER}
        prev_ts = None
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            try:
                snap = _row_to_snapshot(row, col)
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if prev_ts is not None and snap.ts_ms < prev_ts:
                raise ValueError(
                    f"{path}:{lineno}: timestamp {snap.ts_ms} earlier than previous {prev_ts}"
                )
            prev_ts = snap.ts_ms
            out.append(snap)
    return out


def _row_to_snapshot(row, col) -> Snapshot:
    def cell(name):
        return row[col[name]].strip()

    def levels(prefix):
        out = []
        for i in range(1, N_LEVELS + 1):
            px, qty = cell(f"{prefix}_px_{i}"), cell(f"{prefix}_qty_{i}")
            if bool(px) != bool(qty):
                raise ValueError(f"{prefix} level {i} has only one of price/quantity")
            if px:
                out.append((int(px), int(qty)))
        return out

    ts = cell("ts_ms")
    if not ts:
        raise ValueError("missing ts_ms")
    tpx, tqty = cell("trade_px"), cell("trade_qty")
    if bool(tpx) != bool(tqty):
        raise ValueError("trade has only one of price/quantity")
    trade = (int(tpx), int(tqty)) if tpx else None
    return Snapshot(int(ts), levels("bid"), levels("ask"), trade)


def write_snapshots(path, snapshots: Iterable[Snapshot]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SNAPSHOT_HEADER)
        for s in snapshots:
            w.writerow(s.to_row())


def _diff_side(prev_levels, cur_levels, side, ts, trade_left, trade_px, hit_side, out, diag):
    prev = dict(prev_levels)
    cur = dict(cur_levels)
    prev_full = len(prev_levels) == N_LEVELS
    cur_full = len(cur_levels) == N_LEVELS
    prev_worst = prev_levels[-1][0] if prev_levels else None
    cur_worst = cur_levels[-1][0] if cur_levels else None

    def beyond(p, worst):
        return p < worst if side == BID else p > worst

    # best-first so trade volume is attributed to the best prices first
    prices = sorted(set(prev) | set(cur), reverse=(side == BID))
    for p in prices:
        before, after = prev.get(p), cur.get(p)
        if after is None and cur_full and beyond(p, cur_worst):
            diag["scrolled_out"] += 1
            continue
        if before is None and prev_full and beyond(p, prev_worst):
            diag["entered_window"] += 1
            out.append(ReconstructedOrder(ts, KIND_LIMIT, p, after, side))
            continue
        dq = (after or 0) - (before or 0)
        if dq > 0:
            out.append(ReconstructedOrder(ts, KIND_LIMIT, p, dq, side))
        elif dq < 0:
            dec = -dq
            if side == hit_side and trade_left > 0 and not beyond(p, trade_px):
                absorbed = min(dec, trade_left)
                trade_left -= absorbed
                dec -= absorbed
                if dec:
                    diag["trade_excess_cancel"] += 1
            if dec:
                out.append(ReconstructedOrder(ts, KIND_CANCEL, p, dec, side))
    return trade_left


def _merge_same_stamp(orders: list[ReconstructedOrder], diag) -> list[ReconstructedOrder]:
    merged: list[ReconstructedOrder] = []
    index: dict = {}
    for o in orders:
        key = (o.timestamp, o.kind, o.side)
        j = index.get(key)
        if j is None:
            index[key] = len(merged)
            merged.append(o)
        else:
            first = merged[j]
            if first.price != o.price:
                diag["merged_across_prices"] += 1
            diag["merged"] += 1
            merged[j] = ReconstructedOrder(first.timestamp, first.kind, first.price,
                                           first.volume + o.volume, first.side)
    return merged


def reconstruct(snapshots: Sequence[Snapshot], full_output: bool = False):
    """Infer market, limit and cancel orders from consecutive snapshots.

    Returns the time-ordered order list, or ``(orders, diagnostics)`` when
    ``full_output`` is true. ``diagnostics`` counts the ambiguous transitions
    that were resolved by convention: levels scrolling in or out of the
    visible window, trades whose volume could not be matched to a visible
    decrease, and merges.
    """
    if len(snapshots) < 2:
        raise ValueError("need at least 2 snapshots")
    diag = Counter()
    raw: list[ReconstructedOrder] = []
    for prev, cur in zip(snapshots, snapshots[1:]):
        ts = cur.ts_ms
        hit_side = None
        trade_left = 0
        trade_px = None
        if cur.trade is not None:
            trade_px, trade_left = cur.trade
            best_bid = prev.bids[0].price if prev.bids else None
            best_ask = prev.asks[0].price if prev.asks else None
            if best_bid is not None and trade_px <= best_bid:
                hit_side = BID
            elif best_ask is not None and trade_px >= best_ask:
                hit_side = ASK
            else:
                diag["trade_inside_spread"] += 1
                hit_side = BID if _volume_drop(prev.bids, cur.bids) >= _volume_drop(prev.asks, cur.asks) else ASK
            # the aggressor sits on the other side of the book
            raw.append(ReconstructedOrder(ts, KIND_MARKET, trade_px, trade_left, -hit_side))
        step: list[ReconstructedOrder] = []
        for side in (BID, ASK):
            trade_left = _diff_side(prev.levels(side), cur.levels(side), side, ts,
                                    trade_left, trade_px, hit_side, step, diag)
        if trade_left > 0:
            diag["unmatched_trade_volume"] += trade_left
        raw += step
    orders = _merge_same_stamp(raw, diag)
    diag["orders"] = len(orders)
    return (orders, dict(diag)) if full_output else orders


def _volume_drop(before, after) -> int:
    return sum(q for _, q in before) - sum(q for _, q in after)


# ---------------------------------------------------------------------------
# columnar order flow and durations


@dataclass(frozen=True)
class OrderFlow:
    """Columnar order log; ``times`` in seconds."""

    times: np.ndarray
    kinds: np.ndarray
    sides: np.ndarray
    prices: np.ndarray
    volumes: np.ndarray

    def __len__(self):
        return len(self.times)

    @classmethod
    def from_orders(cls, orders: Sequence[ReconstructedOrder]) -> "OrderFlow":
        return cls(
            np.array([o.timestamp / 1000.0 for o in orders], dtype=float),
            np.array([o.kind for o in orders], dtype=np.int64),
            np.array([o.side for o in orders], dtype=np.int64),
            np.array([o.price for o in orders], dtype=np.int64),
            np.array([o.volume for o in orders], dtype=np.int64),
        )


def _as_flow(orders) -> OrderFlow:
    if isinstance(orders, OrderFlow):
        return orders
    if hasattr(orders, "order_flow"):
        return orders.order_flow()
    return OrderFlow.from_orders(list(orders))


def normalize_pairing(pairing: str) -> str:
    key = (pairing.strip().lower().replace("→", "-").replace("->", "-")
           .replace("_", "-").replace(" ", "-"))
    while "--" in key:
        key = key.replace("--", "-")
    aliases = {"all": "all-events", "all-orders": "all-events"}
    key = aliases.get(key, key)
    if key not in PAIRINGS:
        raise ValueError(f"unknown pairing {pairing!r}; expected one of {PAIRINGS}")
    return key


def extract_durations(orders, pairing: str = "all-events") -> np.ndarray:
    """Inter-event durations in seconds under a pairing rule.

    Cancellations are dropped first. ``all-events`` gives every gap between
    consecutive market/limit orders; the other pairings keep only the gaps
    whose first and second events match, e.g. ``market-next-limit`` keeps
    each market order immediately followed by a limit order.
    """
    pairing = normalize_pairing(pairing)
    flow = _as_flow(orders)
    keep = flow.kinds != KIND_CANCEL
    t, k, s = flow.times[keep], flow.kinds[keep], flow.sides[keep]
    gaps = np.diff(t)
    if pairing == "all-events":
        return gaps
    first, second = k[:-1], k[1:]
    if pairing == "limit-next-market":
        return gaps[(first == KIND_LIMIT) & (second == KIND_MARKET)]
    mask = (first == KIND_MARKET) & (second == KIND_LIMIT)
    if pairing == "market-next-limit-same-side":
        mask &= s[:-1] == s[1:]
    elif pairing == "market-next-limit-opposite-side":
        mask &= s[:-1] != s[1:]
    return gaps[mask]


def write_orders(path, orders: Sequence[ReconstructedOrder]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["ts_ms", "kind", "side", "price_ticks", "volume"])
        for o in orders:
            w.writerow([o.timestamp, KIND_NAMES[o.kind], SIDE_NAMES[o.side], o.price, o.volume])


def read_order_flow(path) -> OrderFlow:
    """Read either a reconstructed order CSV (``ts_ms``) or a simulated event CSV (``t``)."""
    times, kinds, sides, prices, volumes = [], [], [], [], []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        fields = reader.fieldnames or []
        if "ts_ms" in fields:
            scale, tcol = 1e-3, "ts_ms"
        elif "t" in fields:
            scale, tcol = 1.0, "t"
        else:
            raise ValueError(f"{path}:1: expected a 'ts_ms' or 't' column")
        for row in reader:
            try:
                times.append(float(row[tcol]) * scale)
                kinds.append(KIND_CODES[row["kind"].strip()])
                sides.append(parse_side(row["side"]))
                prices.append(int(row["price_ticks"]))
                volumes.append(int(row["volume"]))
            except (KeyError, ValueError, TypeError):
                raise ValueError(f"{path}:{reader.line_num}: malformed row") from None
    return OrderFlow(np.array(times, dtype=float), np.array(kinds, dtype=np.int64),
                     np.array(sides, dtype=np.int64), np.array(prices, dtype=np.int64),
                     np.array(volumes, dtype=np.int64))
