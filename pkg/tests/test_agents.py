import numpy as np
import pytest

from hawkeslob import hawkes
from hawkeslob.agents import (
    VARIANTS,
    AgentParams,
    BookEmptiedError,
    ModelVariant,
    cancellation_step,
    draw_placement_price,
    draw_volume,
    read_series,
    run_simulation,
    variant_name,
)
from hawkeslob.hawkes import ExponentialKernel, HawkesModelSpec
from hawkeslob.ingest import KIND_CANCEL, KIND_LIMIT, KIND_MARKET, extract_durations
from hawkeslob.lob import ASK, BID, OrderBook


class FixedT:
    """Generator stand-in returning preset Student-t draws."""

    def __init__(self, draws):
        self.draws = list(draws)

    def standard_t(self, df):
        return self.draws.pop(0)


def two_sided(bid=10_000, ask=10_003):
    book = OrderBook()
    book.submit_limit(BID, bid, 10)
    book.submit_limit(ASK, ask, 10)
    return book


# -- placement


def test_placement_zero_draw():
    book = two_sided()
    assert draw_placement_price(book, BID, AgentParams(), FixedT([0.0])) == 9_997
    assert draw_placement_price(book, ASK, AgentParams(), FixedT([0.0])) == 10_006


def test_crossing_draw_is_redrawn():
    book = two_sided()
    # -5 would give 10_000 - (2.7 - 4.5) -> 10_002, still below the ask; -10 crosses
    price = draw_placement_price(book, BID, AgentParams(), FixedT([-10.0, 0.0]))
    assert price == 9_997


def test_placement_clamps_after_max_attempts():
    book = two_sided()
    price = draw_placement_price(book, BID, AgentParams(), FixedT([-100.0] * 5), max_attempts=5)
    assert price == 10_002


def test_degenerate_placement_is_same_side_best():
    params = AgentParams(m_P1=0.0, s_P1=1e-12)
    rng = np.random.default_rng(0)
    book = two_sided()
    assert {draw_placement_price(book, ASK, params, rng) for _ in range(50)} == {10_003}


def test_placement_never_crosses():
    rng = np.random.default_rng(1)
    book = two_sided(10_000, 10_001)
    for _ in range(2000):
        side = BID if rng.random() < 0.5 else ASK
        p = draw_placement_price(book, side, AgentParams(), rng)
        assert p < 10_001 if side == BID else p > 10_000


def test_placement_needs_a_quote():
    with pytest.raises(ValueError):
        draw_placement_price(OrderBook(), BID, AgentParams(), np.random.default_rng(0))


# -- volumes


def test_volume_mean():
    rng = np.random.default_rng(2)
    draws = [draw_volume(275.0, rng) for _ in range(10**6)]
    assert abs(np.mean(draws) - 275.5) / 275.5 < 0.01


def test_tiny_mean_gives_one():
    rng = np.random.default_rng(3)
    assert {draw_volume(1e-9, rng) for _ in range(1000)} == {1}


# -- cancellation


def deep_book(n, rng):
    book = OrderBook()
    for _ in range(n):
        side = BID if rng.random() < 0.5 else ASK
        book.submit_limit(side, 100 - int(rng.integers(0, 20)) if side == BID else 101 + int(rng.integers(0, 20)), 1)
    return book


def test_delta_zero_never_cancels():
    rng = np.random.default_rng(4)
    book = deep_book(200, rng)
    for mode in ("thin", "event"):
        params = AgentParams(delta=0.0, cancel_mode=mode)
        assert all(cancellation_step(book, params, rng) == [] for _ in range(100))
    assert len(book) == 200


def test_delta_one_thin_empties_book():
    rng = np.random.default_rng(5)
    book = deep_book(300, rng)
    cancelled = cancellation_step(book, AgentParams(delta=1.0, cancel_mode="thin"), rng)
    assert len(cancelled) == 300 and len(book) == 0


def test_thin_binomial_mean():
    rng = np.random.default_rng(6)
    book = deep_book(1000, rng)
    params = AgentParams(delta=0.015, cancel_mode="thin")
    from hawkeslob.agents import _choose_cancellations

    counts = [len(_choose_cancellations(book, params, rng)) for _ in range(20_000)]
    # binomial(1000, 0.015): mean 15, sd 3.84; standard error of the mean is 0.027
    assert abs(np.mean(counts) - 15.0) < 4 * np.sqrt(1000 * 0.015 * 0.985 / 20_000)


def test_event_mode_rate():
    rng = np.random.default_rng(7)
    book = deep_book(50, rng)
    from hawkeslob.agents import _choose_cancellations

    params = AgentParams(delta=0.2, cancel_mode="event")
    counts = [len(_choose_cancellations(book, params, rng)) for _ in range(20_000)]
    assert set(counts) <= {0, 1}
    assert abs(np.mean(counts) - 0.2) < 4 * np.sqrt(0.2 * 0.8 / 20_000)


def test_empty_book_cancellation():
    assert cancellation_step(OrderBook(), AgentParams(cancel_mode="thin"), np.random.default_rng(0)) == []


def test_params_validation():
    for bad in (dict(nu_P1=0), dict(s_P1=0), dict(m_V1=0), dict(lambda_C=-1), dict(delta=1.5),
                dict(cancel_mode="sometimes")):
        with pytest.raises(ValueError):
            AgentParams(**bad)


# -- variants


def test_variant_names():
    assert variant_name("mm ll lm") == "MM+LL+LM"
    assert variant_name("LM+MM") == "MM+LM"
    with pytest.raises(ValueError):
        variant_name("LL")


def test_variant_structures():
    for name in VARIANTS:
        v = ModelVariant.preset(name)
        assert v.spec.is_stable
    with pytest.raises(ValueError):
        ModelVariant("LM", VARIANTS["MM"])


def test_unstable_variant_refused():
    spec = HawkesModelSpec(mu0=0.1, lambda0=1.0, kernel_MM=ExponentialKernel(7.0, 6.0))
    with pytest.raises(hawkes.UnstableModelError, match="alpha_MM"):
        run_simulation(spec, horizon=10, warmup=10)


# -- runs


@pytest.fixture(scope="module")
def short_run():
    return run_simulation("MM+LM", horizon=3600, seed=3, warmup=1800, record_book=True)


def test_run_deterministic(short_run):
    again = run_simulation("MM+LM", horizon=3600, seed=3, warmup=1800, record_book=True)
    for a, b in ((short_run.events.times, again.events.times), (short_run.events.prices, again.events.prices),
                 (short_run.spreads, again.spreads), (short_run.mids, again.mids)):
        np.testing.assert_array_equal(a, b)
    assert short_run.counts == again.counts
    other = run_simulation("MM+LM", horizon=3600, seed=4, warmup=1800)
    assert not np.array_equal(other.events.times[:50], short_run.events.times[:50])


def test_run_series_invariants(short_run):
    assert np.all(np.diff(short_run.events.times) >= 0)
    assert np.all(np.diff(short_run.spread_times) >= 0)
    assert np.all(short_run.spreads > 0)
    assert short_run.events.times.min() >= 0 and short_run.events.times.max() <= 3600


def test_order_accounting(short_run):
    c = short_run.counts
    ev = short_run.events
    assert c["market_orders"] == np.sum(ev.kinds == KIND_MARKET) + c["market_orders_skipped"]
    assert c["limit_orders"] == np.sum(ev.kinds == KIND_LIMIT)
    assert c["cancelled_orders"] == np.sum(ev.kinds == KIND_CANCEL)
    assert (c["initial_resting_orders"] + c["limit_orders"]
            == c["final_resting_orders"] + c["filled_orders"] + c["cancelled_orders"])
    assert (c["volume_added"] + c["initial_resting_volume"]
            == c["volume_executed"] + c["volume_cancelled"] + c["final_resting_volume"])


def test_trades_come_from_market_orders(short_run):
    market_times = set(short_run.events.times[short_run.events.kinds == KIND_MARKET].tolist())
    assert all(t.t in market_times for t in short_run.trades)


def test_stream_matches_events(short_run):
    stream = short_run.stream
    ev = short_run.events
    np.testing.assert_array_equal(stream.limit_times, ev.times[ev.kinds == KIND_LIMIT])


def test_csv_outputs(short_run, tmp_path):
    paths = short_run.to_csv(tmp_path)
    assert open(paths["events"]).readline().strip() == "t,kind,side,price_ticks,volume"
    t, s = read_series(paths["spread"])
    np.testing.assert_allclose(t, short_run.spread_times, atol=1e-9)
    np.testing.assert_array_equal(s, short_run.spreads)
    _, m = read_series(paths["mid"])
    np.testing.assert_array_equal(m, short_run.mids)
    assert "book" in paths
    back = hawkes.read_event_stream(paths["stream"])
    np.testing.assert_allclose(back.times, short_run.stream.times, atol=1e-9)


def test_book_dump_matches_series(short_run):
    dump = short_run.book_dump
    assert len(dump) == len(short_run.spreads)
    for snap, spread in zip(dump[::500], short_run.spreads[::500]):
        assert snap.asks[0].price - snap.bids[0].price == spread


def test_lm_durations_shorter(short_run):
    ml = extract_durations(short_run, "market-next-limit")
    allev = extract_durations(short_run, "all-events")
    assert ml.mean() < allev.mean()


def test_thin_mode_can_empty_the_book():
    # aggressive thinning drains a shallow book; the run must stop with a diagnostic
    params = AgentParams(delta=0.5, cancel_mode="thin", lambda_C=5.0)
    with pytest.raises(BookEmptiedError) as info:
        run_simulation("HP", params, horizon=3600, seed=1, warmup=600)
    assert info.value.side in ("bid", "ask") and info.value.t is not None


def test_no_warmup_starts_from_empty_book():
    out = run_simulation("HP", horizon=600, seed=2, warmup=0)
    assert out.counts["initial_resting_orders"] == 0
    assert out.spread_times[0] > 0


def test_hp_daily_counts():
    out = run_simulation("HP", seed=11)
    c = out.counts
    for name, rate in (("market_orders", 0.22), ("limit_orders", 1.69)):
        expected = rate * 86_400
        assert abs(c[name] - expected) < 4 * np.sqrt(expected)
