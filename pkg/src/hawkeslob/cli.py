"""
Command-line entry point: simulate, fit, reconstruct, analyze, compare.

Exit codes: 0 ok, 1 usage, 2 data error, 3 fit did not converge,
4 run aborted because a side of the book emptied.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np
from scipy import stats as sps

from . import hawkes, ingest, stats
from .agents import (
    DAY,
    DEFAULT_INITIAL_MID,
    DEFAULT_WARMUP,
    VARIANTS,
    AgentParams,
    BookEmptiedError,
    ModelVariant,
    read_series,
    run_simulation,
    variant_name,
)
from .hawkes import KERNEL_NAMES, EventStream, HawkesModelSpec
from .lob import DEFAULT_TICK

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NO_CONVERGENCE = 3
EXIT_ABORTED = 4


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters; what a manifest records."""

    variant: str
    spec: HawkesModelSpec
    agent: AgentParams = field(default_factory=AgentParams)
    horizon: float = DAY
    warmup: float = DEFAULT_WARMUP
    seed: int = 0
    out: str = "."
    tick: float = DEFAULT_TICK
    initial_mid: int = DEFAULT_INITIAL_MID

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "hawkes": self.spec.to_dict(),
            "agent": asdict(self.agent),
            "horizon": self.horizon,
            "warmup": self.warmup,
            "seed": self.seed,
            "tick": self.tick,
            "initial_mid": self.initial_mid,
        }


_RUN_KEYS = {"preset": str, "horizon": float, "warmup": float, "seed": int, "out": str,
             "tick": float, "initial_mid": int}
_AGENT_TYPES = {f.name: (str if f.name == "cancel_mode" else float) for f in fields(AgentParams)}
_SPEC_KEYS = {"mu0", "lambda0"} | {f"{p}_{k}" for k in KERNEL_NAMES for p in ("alpha", "beta")}


def preset_spec(name: str, section: Optional[configparser.SectionProxy] = None) -> HawkesModelSpec:
    """Preset row with any values from a same-named config section laid on top."""
    d = VARIANTS[name].to_dict()
    if section is not None:
        for key, value in section.items():
            if key not in _SPEC_KEYS:
                raise DataError(f"[{section.name}] unknown key {key!r}")
            d[key] = None if value.strip().lower() in ("", "none") else float(value)
    spec = HawkesModelSpec.from_dict(d)
    ModelVariant(name, spec)  # structure must still match the name
    return spec


def load_config(path: Optional[str] = None, **overrides) -> RunConfig:
    """Build a RunConfig from an optional config file plus overrides.

    The file holds a ``[run]`` section (preset, horizon, warmup, seed, out,
    tick, initial_mid), an ``[agent]`` section with AgentParams fields, and
    optional sections named after presets (``[MM+LL+LM]`` ...) that replace
    individual model parameters. Overrides that are ``None`` are ignored.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys like alpha_MM are case sensitive
    if path is not None:
        if not os.path.exists(path):
            raise DataError(f"{path}: config file not found")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise DataError(f"{path}: {exc}") from None
        for name in cp.sections():
            if name not in ("run", "agent"):
                try:
                    canonical = variant_name(name)
                except ValueError:
                    raise DataError(f"{path}: unknown section [{name}]") from None
                if canonical != name:
                    raise DataError(f"{path}: section [{name}] must be named [{canonical}]")

    run = {}
    if cp.has_section("run"):
        for key, value in cp["run"].items():
            if key not in _RUN_KEYS:
                raise DataError(f"{path}: [run] unknown key {key!r}")
            try:
                run[key] = _RUN_KEYS[key](value)
            except ValueError:
                raise DataError(f"{path}: [run] bad value for {key}: {value!r}") from None
    run.update({k: v for k, v in overrides.items() if v is not None})

    agent = {}
    if cp.has_section("agent"):
        for key, value in cp["agent"].items():
            if key not in _AGENT_TYPES:
                raise DataError(f"{path}: [agent] unknown key {key!r}")
            try:
                agent[key] = _AGENT_TYPES[key](value)
            except ValueError:
                raise DataError(f"{path}: [agent] bad value for {key}: {value!r}") from None
    try:
        agent_params = AgentParams(**agent)
    except ValueError as exc:
        raise DataError(f"{path}: [agent] {exc}") from None

    if "preset" not in run:
        raise UsageError("no preset given (use --preset or [run] preset = ...)")
    try:
        name = variant_name(run.pop("preset"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        spec = preset_spec(name, cp[name] if cp.has_section(name) else None)
    except ValueError as exc:
        raise DataError(f"{path}: [{name}] {exc}") from None

    horizon = run.get("horizon", DAY)
    warmup = run.get("warmup", DEFAULT_WARMUP)
    if not horizon > 0:
        raise UsageError(f"horizon must be > 0, got {horizon:g}")
    if not warmup >= 0:
        raise UsageError(f"warmup must be >= 0, got {warmup:g}")
    return RunConfig(variant=name, spec=spec, agent=agent_params, **run)


def _check_stable(cfg: RunConfig):
    try:
        cfg.spec.check_stable()
    except hawkes.UnstableModelError as exc:
        raise DataError(f"refusing to simulate {cfg.variant}: {exc}") from None


def _write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=_json_default, allow_nan=False)
        f.write("\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(type(o).__name__)


def _simulate(cfg: RunConfig, record_book: bool = False):
    return run_simulation(ModelVariant(cfg.variant, cfg.spec), cfg.agent,
                          horizon=cfg.horizon, seed=cfg.seed, warmup=cfg.warmup,
                          initial_mid=cfg.initial_mid, tick=cfg.tick, record_book=record_book)


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, preset=args.preset, horizon=args.horizon, warmup=args.warmup,
                      seed=args.seed, out=args.out)
    _check_stable(cfg)
    os.makedirs(cfg.out, exist_ok=True)
    out = _simulate(cfg, record_book=args.record_book)
    paths = out.to_csv(cfg.out)
    manifest = out.manifest()
    manifest["config"] = cfg.to_dict()
    manifest["files"] = sorted(os.path.basename(p) for p in paths.values())
    _write_json(os.path.join(cfg.out, "manifest.json"), manifest)
    c = out.counts
    print(f"{cfg.variant} seed {cfg.seed}: {c['market_orders']} market, {c['limit_orders']} limit, "
          f"{c['cancelled_orders']} cancelled orders -> {cfg.out}")
    return EXIT_OK


def _read_stream(path, horizon=None) -> EventStream:
    """Event stream from a ``t,mark`` file or a simulated/reconstructed order CSV."""
    with open(path) as f:
        head = ""
        for line in f:
            if line.strip() and not line.startswith("#"):
                head = line
                break
    cols = [c.strip() for c in head.split(",")]
    if cols == ["t", "mark"]:
        return hawkes.read_event_stream(path, horizon)
    flow = ingest.read_order_flow(path)
    if len(flow) == 0:
        raise ValueError(f"{path}: no events")
    t0 = 0.0 if "t" in cols else float(flow.times[0])
    keep = flow.kinds != ingest.KIND_CANCEL
    times = flow.times[keep] - t0
    marks = np.where(flow.kinds[keep] == ingest.KIND_MARKET, hawkes.MARKET, hawkes.LIMIT)
    if horizon is None:
        horizon = float(np.nextafter(times[-1], np.inf)) if len(times) else 0.0
    return EventStream.from_events(times, marks, horizon)


def cmd_fit(args) -> int:
    stream = _read_stream(args.events, args.horizon)
    result = hawkes.fit_mle(stream, args.structure, max_evals=args.max_evals)
    report = result.to_dict()
    report["structure"] = sorted(result.spec.structure)
    report["horizon"] = stream.horizon
    report["counts"] = {"market": stream.count(hawkes.MARKET), "limit": stream.count(hawkes.LIMIT)}
    diag = {}
    for comp, name in ((hawkes.MARKET, "market"), (hawkes.LIMIT, "limit")):
        res = hawkes.residuals(result.spec, stream, comp)
        if len(res) == 0:
            continue
        ks = sps.kstest(res, "expon")
        diag[name] = {"n": int(len(res)), "ks_statistic": float(ks.statistic),
                      "ks_p_value": float(ks.pvalue), "mean": float(np.mean(res))}
    report["residuals"] = diag
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "fit.json"), report)
    p = result.spec.to_dict()
    shown = ", ".join(f"{k}={v:.4g}" for k, v in p.items() if v is not None)
    print(f"loglik {result.log_likelihood:.3f}; {shown}")
    if not result.converged:
        print(f"fit did not converge: {result.message}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    snaps = ingest.parse_snapshots(args.snapshots)
    orders, diag = ingest.reconstruct(snaps, full_output=True)
    os.makedirs(args.out, exist_ok=True)
    ingest.write_orders(os.path.join(args.out, "orders.csv"), orders)
    flow = ingest.OrderFlow.from_orders(orders)
    for pairing in ingest.PAIRINGS:
        _write_column(os.path.join(args.out, f"durations_{pairing}.csv"), "duration_s",
                      ingest.extract_durations(flow, pairing))
    diag["snapshots"] = len(snaps)
    _write_json(os.path.join(args.out, "diagnostics.json"), diag)
    print(f"{len(snaps)} snapshots -> {len(orders)} orders ({args.out})")
    return EXIT_OK


def _write_column(path, name, values):
    with open(path, "w") as f:
        f.write(name + "\n")
        for v in np.asarray(values).tolist():
            f.write(f"{v:.9f}\n")


def _label(path):
    base = os.path.basename(os.path.normpath(path))
    stem = os.path.splitext(base)[0]
    if stem == "events":
        stem = os.path.basename(os.path.dirname(os.path.abspath(path))) or stem
    return stem


def _duration_pdf(durations, path):
    d = durations[durations > 0]
    if len(d) == 0:
        return False
    stats.empirical_pdf(d, "log", bins=50).to_csv(path)
    return True


def cmd_analyze(args) -> int:
    if not (args.events or args.spread or args.mid):
        raise UsageError("nothing to analyze: give --events, --spread or --mid")
    if args.events and len(args.events) > 2:
        raise UsageError("--events takes at most two inputs")
    pairing = ingest.normalize_pairing(args.pairing)
    if args.sample_size < 0 or not 0 < args.alpha < 1:
        raise UsageError("--sample-size must be >= 0 and --alpha in (0, 1)")
    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    def sample(x):
        return stats.random_subsample(x, args.sample_size, rng)

    results = []
    if args.events:
        samples = []
        for path in args.events:
            label = _label(path)
            flow = ingest.read_order_flow(path)
            pair = ingest.extract_durations(flow, pairing)
            allev = ingest.extract_durations(flow, "all-events")
            _duration_pdf(pair, os.path.join(args.out, f"durations_{label}_{pairing}.csv"))
            _duration_pdf(allev, os.path.join(args.out, f"durations_{label}_all-events.csv"))
            samples.append((label, pair, allev))
        if len(samples) == 1:
            label, pair, allev = samples[0]
            if len(pair) and len(allev):
                results += _labelled(stats.compare_samples(sample(pair), sample(allev), args.alternative),
                                     f"{label}:{pairing}", f"{label}:all-events")
        else:
            (la, pa, _), (lb, pb, _) = samples
            if len(pa) and len(pb):
                results += _labelled(stats.compare_samples(sample(pa), sample(pb), args.alternative),
                                     f"{la}:{pairing}", f"{lb}:{pairing}")
    if args.spread:
        t, s = read_series(args.spread)
        weighted, event = stats.time_weighted_spread(t, s)
        weighted.to_csv(os.path.join(args.out, "spread_weighted.csv"))
        event.to_csv(os.path.join(args.out, "spread_event_time.csv"))
        terc = stats.conditional_waiting_time(t, s)
        terc = {k: (None if isinstance(v, float) and np.isnan(v) else v) for k, v in terc._asdict().items()}
        _write_json(os.path.join(args.out, "spread_terciles.json"), terc)
    if args.mid:
        t, m = read_series(args.mid)
        var = stats.mid_price_variations(t, m, interval=args.interval)
        stats.WeightedDistribution.from_samples(var).to_csv(os.path.join(args.out, "mid_variations.csv"))
    if results:
        stats.write_test_results(os.path.join(args.out, "tests.csv"), results, alpha=args.alpha)
        for r in results:
            print(f"{r.test}: statistic {r.statistic:.6g}, p {r.p_value:.3g} {r.direction}".rstrip())
    return EXIT_OK


def _labelled(results, a, b):
    names = {"a < b": f"{a} < {b}", "a > b": f"{a} > {b}", "a = b": f"{a} = {b}"}
    return [r._replace(direction=names.get(r.direction, r.direction)) for r in results]


def _compare_one(cfg: RunConfig, out_dir: str) -> dict:
    out = _simulate(cfg)
    name = cfg.variant
    weighted, event = stats.time_weighted_spread(out.spread_times, out.spreads, end=cfg.horizon)
    event.to_csv(os.path.join(out_dir, f"{name}_spread_event_time.csv"))
    weighted.to_csv(os.path.join(out_dir, f"{name}_spread_weighted.csv"))
    ml = ingest.extract_durations(out, "market-next-limit")
    _duration_pdf(ml, os.path.join(out_dir, f"{name}_durations_market-next-limit.csv"))
    var = stats.mid_price_variations(out.mid_times, out.mids, start=0.0, end=cfg.horizon)
    stats.WeightedDistribution.from_samples(var).to_csv(os.path.join(out_dir, f"{name}_mid_variations.csv"))
    return {
        "seed": cfg.seed,
        "counts": out.counts,
        "spread_weighted_mean": weighted.mean(),
        "spread_weighted_variance": weighted.variance(),
        "spread_mass_at_or_below_1": weighted.mass_at_or_below(1),
        "mean_market_next_limit_s": float(ml.mean()) if len(ml) else None,
        "mid_variation_std": float(np.std(var)),
    }


def cmd_compare(args) -> int:
    names = [variant_name(p) for p in (args.presets.split(",") if args.presets else VARIANTS)]
    base = load_config(args.config, preset=names[0], horizon=args.horizon, warmup=args.warmup,
                       seed=args.seed, out=args.out)
    cfgs = []
    for i, name in enumerate(names):
        cfg = load_config(args.config, preset=name, horizon=base.horizon, warmup=base.warmup,
                          seed=base.seed + i, out=base.out)
        _check_stable(cfg)
        cfgs.append(cfg)
    os.makedirs(base.out, exist_ok=True)
    summary = {}
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(args.jobs) as pool:
            futures = [pool.submit(_compare_one, c, base.out) for c in cfgs]
            for c, fut in zip(cfgs, futures):
                summary[c.variant] = fut.result()
    else:
        for c in cfgs:
            summary[c.variant] = _compare_one(c, base.out)
    _write_json(os.path.join(base.out, "summary.json"),
                {"variants": summary, "configs": {c.variant: c.to_dict() for c in cfgs}})
    for name, s in summary.items():
        print(f"{name:9s} seed {s['seed']}: weighted spread mean {s['spread_weighted_mean']:.3f}, "
              f"var {s['spread_weighted_variance']:.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hawkeslob", description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_flags(sp):
        sp.add_argument("--preset", help="model variant: " + ", ".join(VARIANTS))
        sp.add_argument("--config", help="config file with [run], [agent] and preset sections")
        sp.add_argument("--horizon", type=float, help="recorded seconds (default 86400)")
        sp.add_argument("--warmup", type=float, help="liquidity-provider-only seconds before the run")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("simulate", help="simulate one model variant")
    run_flags(sp)
    sp.add_argument("--record-book", action="store_true", help="also write per-event top-five book states")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="maximum likelihood fit of an event stream")
    sp.add_argument("events", help="t,mark stream or order CSV")
    sp.add_argument("--structure", default="HP", help="kernels to fit, e.g. MM+LM (default HP)")
    sp.add_argument("--horizon", type=float, help="observation window; read from the file if present")
    sp.add_argument("--max-evals", type=int, default=10_000)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("reconstruct", help="infer orders from a snapshot CSV")
    sp.add_argument("snapshots")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("analyze", help="distributions and two-sample tests")
    sp.add_argument("--events", action="append", help="order CSV; give twice to compare two inputs")
    sp.add_argument("--pairing", default="market-next-limit", help="duration pairing")
    sp.add_argument("--alternative", default="two-sided", choices=("two-sided", "less", "greater"))
    sp.add_argument("--spread", help="t,spread_ticks series")
    sp.add_argument("--mid", help="t,mid_ticks series")
    sp.add_argument("--interval", type=float, default=30.0, help="mid sampling interval, s")
    sp.add_argument("--sample-size", type=int, default=10_000,
                    help="random subsample per test input; 0 uses every value")
    sp.add_argument("--alpha", type=float, default=0.01, help="significance level for the reject column")
    sp.add_argument("--seed", type=int, default=0, help="seed for subsampling")
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("compare", help="per-variant density CSVs for side-by-side plots")
    run_flags(sp)
    sp.add_argument("--presets", help="comma-separated variants (default: all six)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hawkeslob: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BookEmptiedError as exc:
        print(f"hawkeslob: run aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    except (DataError, ValueError, OSError) as exc:
        print(f"hawkeslob: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
