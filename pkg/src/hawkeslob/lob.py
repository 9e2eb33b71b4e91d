"""
Price-time priority limit order book on an integer tick grid.
"""
from __future__ import annotations

import bisect
import csv
from collections import deque
from dataclasses import dataclass
from typing import Optional

BID = 1
ASK = -1
SIDE_NAMES = {BID: "bid", ASK: "ask"}
SIDE_CODES = {"bid": BID, "ask": ASK, "b": BID, "a": ASK, "buy": BID, "sell": ASK}

DEFAULT_TICK = 0.01


def parse_side(side) -> int:
    if side in (BID, ASK):
        return side
    try:
        return SIDE_CODES[str(side).strip().lower()]
    except KeyError:
        raise ValueError(f"unknown side {side!r}") from None


class EmptySideError(RuntimeError):
    """Operation needs a side of the book that has no resting volume."""


class UnknownOrderError(KeyError):
    pass


class Order:
    __slots__ = ("id", "side", "price", "volume", "owner", "t")

    def __init__(self, id: int, side: int, price: int, volume: int, owner: str = "lp", t: float = 0.0):
        self.id = id
        self.side = side
        self.price = price
        self.volume = volume
        self.owner = owner
        self.t = t

    def __repr__(self):
        return (f"Order(id={self.id}, side={SIDE_NAMES[self.side]}, price={self.price}, "
                f"volume={self.volume}, owner={self.owner!r})")


@dataclass(frozen=True)
class Trade:
    t: float
    price: int
    volume: int
    aggressor: int
    maker_id: int


class OrderBook:
    """Two ladders of FIFO queues keyed by integer price.

    Order ids are assigned by the book, starting at 1. ``tick`` is only used
    to convert ticks to currency for reporting.
    """

    def __init__(self, tick: float = DEFAULT_TICK):
        self.tick = tick
        self._levels = {BID: {}, ASK: {}}
        # total resting volume per level, kept in step with the queues
        self._level_qty = {BID: {}, ASK: {}}
        # ascending price lists; best bid is the last element, best ask the first
        self._prices = {BID: [], ASK: []}
        self._orders: dict[int, Order] = {}
        # dense list of resting ids for O(1) random selection
        self._ids: list[int] = []
        self._pos: dict[int, int] = {}
        self._next_id = 1
        # limit volume added = executed + cancelled + resting (minus what rested initially)
        self.volume_added = 0
        self.volume_executed = 0
        self.volume_cancelled = 0
        self.orders_filled = 0
        self.orders_cancelled = 0

    # -- queries ----------------------------------------------------------

    @property
    def best_bid(self) -> Optional[int]:
        p = self._prices[BID]
        return p[-1] if p else None

    @property
    def best_ask(self) -> Optional[int]:
        p = self._prices[ASK]
        return p[0] if p else None

    def best(self, side: int) -> Optional[int]:
        return self.best_bid if side == BID else self.best_ask

    def is_empty(self, side: int) -> bool:
        return not self._prices[side]

    def spread(self) -> int:
        if not self._prices[BID] or not self._prices[ASK]:
            raise EmptySideError("spread undefined: one side of the book is empty")
        return self._prices[ASK][0] - self._prices[BID][-1]

    def mid_price(self) -> float:
        """Mid price in ticks (a multiple of one half-tick)."""
        if not self._prices[BID] or not self._prices[ASK]:
            raise EmptySideError("mid price undefined: one side of the book is empty")
        return (self._prices[ASK][0] + self._prices[BID][-1]) / 2

    def depth(self, side: int, levels: int = 5) -> list[tuple[int, int]]:
        """``(price, total volume)`` for the best ``levels`` prices of a side."""
        prices = self._prices[side]
        chosen = prices[::-1][:levels] if side == BID else prices[:levels]
        qty = self._level_qty[side]
        return [(p, qty[p]) for p in chosen]

    def snapshot(self, ts_ms: int, trades=(), levels: int = 5):
        """Visible top-of-book state in the ingest snapshot format.

        ``trades`` from a single market order collapse into one trade field:
        the last (worst) execution price and the total volume.
        """
        from .ingest import Snapshot

        trade = None
        if trades:
            trade = (trades[-1].price, sum(tr.volume for tr in trades))
        return Snapshot(int(ts_ms), self.depth(BID, levels), self.depth(ASK, levels), trade)

    def queue(self, side: int, price: int) -> list[Order]:
        return list(self._levels[side].get(price, ()))

    def order(self, order_id: int) -> Order:
        try:
            return self._orders[order_id]
        except KeyError:
            raise UnknownOrderError(order_id) from None

    @property
    def resting_ids(self) -> list[int]:
        return self._ids

    def __len__(self):
        return len(self._orders)

    def resting_volume(self) -> int:
        return sum(o.volume for o in self._orders.values())

    def level_count(self, side: int) -> int:
        return len(self._prices[side])

    # -- mutations --------------------------------------------------------

    def submit_limit(self, side, price: int, volume: int, t: float = 0.0, owner: str = "lp"):
        """Add a limit order; any part crossing the opposite best executes first.

        Returns ``(order_id, trades)``. The id is assigned even if the order
        fills completely.
        """
        side = parse_side(side)
        price, volume = int(price), int(volume)
        if volume <= 0:
            raise ValueError(f"volume must be positive, got {volume}")
        if price <= 0:
            raise ValueError(f"price must be positive, got {price}")
        oid = self._next_id
        self._next_id += 1
        self.volume_added += volume
        trades = self._match(side, volume, t, limit_price=price)
        filled = sum(tr.volume for tr in trades)
        # the aggressing part of a crossing limit is added and executed at once
        self.volume_executed += filled
        remaining = volume - filled
        if remaining > 0:
            self._rest(Order(oid, side, price, remaining, owner, t))
        return oid, trades

    def submit_market(self, side, volume: int, t: float = 0.0) -> list[Trade]:
        """Execute against the opposite ladder; unfilled volume is dropped."""
        side = parse_side(side)
        volume = int(volume)
        if volume <= 0:
            raise ValueError(f"volume must be positive, got {volume}")
        if not self._prices[-side]:
            raise EmptySideError(f"market {SIDE_NAMES[side]} order against an empty {SIDE_NAMES[-side]} side")
        return self._match(side, volume, t)

    def cancel(self, order_id: int) -> int:
        """Remove a resting order and return its remaining volume."""
        order = self._orders.get(order_id)
        if order is None:
            raise UnknownOrderError(order_id)
        queue = self._levels[order.side][order.price]
        queue.remove(order)
        self._level_qty[order.side][order.price] -= order.volume
        if not queue:
            self._drop_level(order.side, order.price)
        self._forget(order_id)
        self.volume_cancelled += order.volume
        self.orders_cancelled += 1
        return order.volume

    # -- internals --------------------------------------------------------

    def _rest(self, order: Order):
        levels = self._levels[order.side]
        queue = levels.get(order.price)
        if queue is None:
            queue = levels[order.price] = deque()
            self._level_qty[order.side][order.price] = 0
            bisect.insort(self._prices[order.side], order.price)
        queue.append(order)
        self._level_qty[order.side][order.price] += order.volume
        self._orders[order.id] = order
        self._pos[order.id] = len(self._ids)
        self._ids.append(order.id)

    def _forget(self, order_id: int):
        del self._orders[order_id]
        i = self._pos.pop(order_id)
        last = self._ids.pop()
        if last != order_id:
            self._ids[i] = last
            self._pos[last] = i

    def _drop_level(self, side: int, price: int):
        del self._levels[side][price]
        del self._level_qty[side][price]
        prices = self._prices[side]
        if side == BID and prices[-1] == price:
            prices.pop()
        elif side == ASK and prices[0] == price:
            prices.pop(0)
        else:
            prices.pop(bisect.bisect_left(prices, price))

    def _match(self, side: int, volume: int, t: float, limit_price: Optional[int] = None) -> list[Trade]:
        opposite = -side
        prices = self._prices[opposite]
        levels = self._levels[opposite]
        trades = []
        while volume > 0 and prices:
            best = prices[0] if opposite == ASK else prices[-1]
            if limit_price is not None and (best > limit_price if side == BID else best < limit_price):
                break
            queue = levels[best]
            before = volume
            while volume > 0 and queue:
                maker = queue[0]
                qty = maker.volume if maker.volume < volume else volume
                maker.volume -= qty
                volume -= qty
                trades.append(Trade(t, best, qty, side, maker.id))
                if maker.volume == 0:
                    queue.popleft()
                    self._forget(maker.id)
                    self.orders_filled += 1
            self._level_qty[opposite][best] -= before - volume
            if not queue:
                self._drop_level(opposite, best)
        self.volume_executed += sum(tr.volume for tr in trades)
        return trades


def write_book_dump(path, snapshots) -> None:
    """Per-event book states as a snapshot CSV readable by ``ingest.parse_snapshots``."""
    from .ingest import write_snapshots

    write_snapshots(path, snapshots)


def write_trades(path, trades) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "side", "price_ticks", "volume"])
        for tr in trades:
            w.writerow([f"{tr.t:.9f}", SIDE_NAMES[tr.aggressor], tr.price, tr.volume])


def read_trades(path) -> list[Trade]:
    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out.append(Trade(float(row["t"]), int(row["price_ticks"]), int(row["volume"]),
                             parse_side(row["side"]), 0))
    return out
