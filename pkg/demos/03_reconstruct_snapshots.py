"""
From five-level snapshots back to orders
========================================

Only the top five levels of each side are visible in a snapshot feed.
Here we record such a feed from a simulated book, rebuild the order flow
from the level differences, and compare durations of the rebuilt flow
with the true one.
"""
import os
import tempfile

import numpy as np

from hawkeslob import run_simulation
from hawkeslob.ingest import extract_durations, read_order_flow, reconstruct, write_orders

run = run_simulation("MM+LM", horizon=900.0, seed=3, record_book=True)
snaps = run.book_dump
print(f"{len(snaps)} snapshots; first one:\n  bids {snaps[0].bids}\n  asks {snaps[0].asks}")

orders, diag = reconstruct(snaps, full_output=True)
print("\nreconstruction diagnostics:")
for key, value in sorted(diag.items()):
    print(f"  {key:<20} {value}")

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "orders.csv")
    write_orders(path, orders)
    rebuilt = read_order_flow(path)

# limits arriving deep in the book are invisible, so counts differ a little
for pairing in ("all-events", "market-next-limit"):
    a = extract_durations(run.events, pairing)
    b = extract_durations(rebuilt, pairing)
    print(f"\n{pairing}: true n={len(a)} median={np.median(a) * 1e3:.0f} ms, "
          f"rebuilt n={len(b)} median={np.median(b) * 1e3:.0f} ms")
