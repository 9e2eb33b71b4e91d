"""A second, heap-based matching engine used as an oracle for the real one."""
import heapq
from collections import Counter

import numpy as np

from hawkeslob.lob import ASK, BID, OrderBook


class ReferenceBook:
    """Price-time priority via one heap per side keyed (priority price, id); lazy deletion."""

    def __init__(self):
        self.orders = {}
        self.heaps = {BID: [], ASK: []}
        self.next_id = 1

    def _top(self, side):
        h = self.heaps[side]
        while h and h[0][1] not in self.orders:
            heapq.heappop(h)
        return h[0] if h else None

    def best(self, side):
        top = self._top(side)
        if top is None:
            return None
        return -top[0] if side == BID else top[0]

    def _match(self, side, volume, limit):
        fills = []
        opp = -side
        while volume > 0:
            top = self._top(opp)
            if top is None:
                break
            price = -top[0] if opp == BID else top[0]
            if limit is not None and (price > limit if side == BID else price < limit):
                break
            oid = top[1]
            rest = self.orders[oid]
            q = min(volume, rest[2])
            fills.append((oid, q, price))
            rest[2] -= q
            volume -= q
            if rest[2] == 0:
                del self.orders[oid]
                heapq.heappop(self.heaps[opp])
        return fills, volume

    def limit(self, side, price, volume):
        oid = self.next_id
        self.next_id += 1
        fills, left = self._match(side, volume, price)
        if left:
            self.orders[oid] = [side, price, left]
            heapq.heappush(self.heaps[side], (-price if side == BID else price, oid))
        return fills

    def market(self, side, volume):
        return self._match(side, volume, None)[0]

    def cancel(self, oid):
        return self.orders.pop(oid)[2]


def drive(n_ops, seed, check_every=10_000, min_depth=200, book_factory=OrderBook):
    """Random limit/market/cancel instructions applied to both engines.

    The book is topped up with limits whenever it holds fewer than
    ``min_depth`` orders. Returns the engine and a Counter of violations by kind: ``fills`` (trade
    sequence differs from the reference), ``cross`` (best bid >= best ask),
    ``best`` (best quotes differ), ``volume`` (added != executed + cancelled
    + resting) and ``orders`` (resting id sets differ).
    """
    rng = np.random.default_rng(seed)
    u = rng.random((n_ops, 4))
    book, ref = book_factory(), ReferenceBook()
    bad = Counter()
    for i in range(n_ops):
        r, side_u, px_u, vol_u = u[i]
        side = BID if side_u < 0.5 else ASK
        if r < 0.45 or len(book) < min_depth:
            # bands overlap by a few ticks so some limits cross
            price = (985 if side == BID else 996) + int(px_u * 20)
            volume = 1 + int(vol_u * 50)
            _, trades = book.submit_limit(side, price, volume, t=i)
            expected = ref.limit(side, price, volume)
        elif r < 0.6:
            if book.is_empty(-side):
                continue
            volume = 1 + int(vol_u * 60)
            trades = book.submit_market(side, volume, t=i)
            expected = ref.market(side, volume)
        else:
            ids = book.resting_ids
            oid = ids[int(px_u * len(ids))]
            cancelled = book.cancel(oid)
            if oid not in ref.orders or ref.cancel(oid) != cancelled:
                bad["orders"] += 1
            trades, expected = [], []
        if [(t.maker_id, t.volume, t.price) for t in trades] != expected:
            bad["fills"] += 1
        bb, ba = book.best_bid, book.best_ask
        if bb is not None and ba is not None and bb >= ba:
            bad["cross"] += 1
        if bb != ref.best(BID) or ba != ref.best(ASK):
            bad["best"] += 1
        if i % check_every == 0 or i == n_ops - 1:
            if book.volume_added != book.volume_executed + book.volume_cancelled + book.resting_volume():
                bad["volume"] += 1
            if set(book.resting_ids) != set(ref.orders):
                bad["orders"] += 1
    return book, bad
