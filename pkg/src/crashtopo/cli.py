"""Command-line entry point: ``crashtopo <subcommand> [options]``."""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import platform
import sys
from dataclasses import dataclass
from datetime import timedelta
from pathlib import Path

import numpy as np
import scipy

from crashtopo import __version__
from crashtopo.config import ConfigError, RunConfig, load_config
from crashtopo.econometrics import adf_test, difference, pp_test
from crashtopo.errors import CrashtopoError, ValidationError
from crashtopo.market_data import PriceMatrix, align, fetch_prices, load_price_csv, log_returns, point_cloud
from crashtopo.network import (
    GRANGER_HEADER,
    AnalysisConfig,
    PeriodSpec,
    counts_csv,
    export_dot,
    export_json,
    granger_rows,
    import_json,
    pairwise_analysis,
    relation_counts,
)
from crashtopo.pipeline import WDSeries, WindowSpec, crash_summary, normalize_series, wd_series_cross, wd_series_self
from crashtopo.plots import line_svg
from crashtopo import synth

log = logging.getLogger("crashtopo")

EXIT_FILE = 8

ASSUMPTIONS = (
    "unit-root tests use a constant and no trend",
    "summary means are taken over the full WD series",
    "windows are dated by their last day; periods are half-open [start, end)",
)


@dataclass
class Run:
    cfg: RunConfig
    prices: PriceMatrix
    data_hash: str

    @property
    def out(self) -> Path:
        return self.cfg.out_dir()

    def stamp(self) -> list[str]:
        return [f"config_hash={self.cfg.hash()}", f"data_hash={self.data_hash}", f"crashtopo={__version__}"]

    def market_cloud(self, market: str):
        return point_cloud(log_returns(self.prices.select(self.cfg.markets[market])))


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    log.info("wrote %s", path)
    return path


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_=" else "_" for c in name)


def load_run(cfg: RunConfig) -> Run:
    """Load every symbol of every market and inner-join them on dates."""
    tables, digest = [], hashlib.sha256()
    symbols: list[str] = []
    for syms in cfg.markets.values():
        symbols += [s for s in syms if s not in symbols]
    for sym in symbols:
        path = cfg.symbol_path(sym)
        if not path.exists():
            raise FileNotFoundError(f"no data file for {sym}: {path}")
        digest.update(sym.encode() + b"\0" + path.read_bytes())
        tables.append(load_price_csv(path, cfg.date_column, cfg.close_column, symbol=sym))
    return Run(cfg, align(tables), digest.hexdigest())


def _series_label(market: str, p: int) -> str:
    return f"{market} WD_{p}"


def compute_self(run: Run) -> dict[tuple[str, int], WDSeries]:
    spec = WindowSpec(run.cfg.window, run.cfg.stride)
    out = {}
    for market in run.cfg.markets:
        cloud = run.market_cloud(market)
        for p in run.cfg.degrees:
            out[(market, p)] = wd_series_self(cloud, spec, p, _series_label(market, p), run.cfg.workers)
    return out


def compute_cross(run: Run) -> dict[tuple[str, str, int], WDSeries]:
    spec = WindowSpec(run.cfg.window, run.cfg.stride)
    out = {}
    for a, b in run.cfg.compare_pairs:
        ca, cb = run.market_cloud(a), run.market_cloud(b)
        for p in run.cfg.degrees:
            out[(a, b, p)] = wd_series_cross(ca, cb, spec, p, f"{a} vs {b} WD_{p}", run.cfg.workers)
    return out


def _emit_series(run: Run, folder: str, stem: str, s: WDSeries) -> None:
    stamp = run.stamp() + [f"series={s.label}", f"mode={s.mode}", f"degree={s.degree:g}"]
    csv_text = s.to_csv(stamp)
    _write(run.out / folder / f"{stem}.csv", csv_text)
    # The figure is rendered from the CSV just written, never from live values.
    parsed = WDSeries.from_csv(csv_text, s.degree, s.mode, s.label)
    _write(run.out / folder / f"{stem}.svg", line_svg(parsed.dates, list(parsed.values), s.label, run.cfg.crash_band, stamp))


def cmd_ingest(cfg: RunConfig, args) -> int:
    if args.fetch or cfg.fetch is not None:
        if cfg.fetch is None:
            raise ConfigError("fetch", "--fetch needs a fetch section with start/end")
        symbols = sorted({s for syms in cfg.markets.values() for s in syms})
        result = fetch_prices(symbols, cfg.fetch.start, cfg.fetch.end, cfg.fetch.endpoint, cfg.fetch.close_column)
        for t in result.tables:
            _write(cfg.symbol_path(t.symbol), t.to_csv())
        for e in result.errors:
            print(f"fetch error: {e}", file=sys.stderr)
        if not result.ok:
            return result.errors[0].exit_code
    run = load_run(cfg)
    info = {
        "config_hash": cfg.hash(),
        "data_hash": run.data_hash,
        "symbols": list(run.prices.symbols),
        "rows": len(run.prices.dates),
        "first_date": run.prices.dates[0].isoformat(),
        "last_date": run.prices.dates[-1].isoformat(),
        "close_column": cfg.fetch.close_column if cfg.fetch else cfg.close_column,
    }
    _write(run.out / "ingest.json", json.dumps(info, indent=2, sort_keys=True) + "\n")
    print(f"{len(info['symbols'])} symbols aligned on {info['rows']} dates "
          f"({info['first_date']} .. {info['last_date']})")
    return 0


def cmd_wdseries(cfg: RunConfig, args) -> int:
    run = load_run(cfg)
    for (market, p), s in compute_self(run).items():
        _emit_series(run, "wdseries", f"{_safe(market)}_WD{p}", s)
    return 0


def cmd_compare(cfg: RunConfig, args) -> int:
    if len(cfg.markets) < 2:
        raise ConfigError("markets", "compare needs at least two markets")
    run = load_run(cfg)
    for (a, b, p), s in compute_cross(run).items():
        _emit_series(run, "compare", f"{_safe(a)}__{_safe(b)}_WD{p}", s)
    return 0


def cmd_stationarity(cfg: RunConfig, args) -> int:
    run = load_run(cfg)
    buf = io.StringIO()
    for line in run.stamp():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["period", "series", "d", "test", "statistic", "p", "lags", "decision"])
    for (market, p), s in compute_self(run).items():
        for period in cfg.periods:
            sliced = s.between(period.start, period.end)
            for d in range(cfg.d_max + 1):
                try:
                    x = difference(sliced.values, d)
                    results = (adf_test(x), pp_test(x))
                except CrashtopoError as exc:
                    w.writerow([period.label, s.label, d, "-", "", "", "", f"skipped: {exc}"])
                    continue
                for r in results:
                    decision = "stationary" if r.rejects(cfg.alpha) else "unit root"
                    w.writerow([period.label, s.label, d, r.test, f"{r.statistic:.6g}",
                                f"{r.p_value:.6g}", r.lags_or_bandwidth, decision])
    _write(run.out / "stationarity.csv", buf.getvalue())
    return 0


def run_causality(run: Run):
    cfg = run.cfg
    if len(cfg.markets) < 2:
        raise ConfigError("markets", "causality needs at least two markets")
    series = compute_self(run)
    acfg = AnalysisConfig(d_max=cfg.d_max, max_lag=cfg.max_lag, bonferroni=cfg.bonferroni, workers=cfg.workers)
    nets = []
    for p in cfg.degrees:
        by_node = {m: series[(m, p)] for m in cfg.markets}
        for period in cfg.periods:
            nets.append(pairwise_analysis(by_node, period, cfg.alpha, acfg, metric=f"WD_{p}"))
    return nets


def _emit_network(run: Run, net, folder: str = "causality") -> None:
    stem = f"{_safe(net.metric)}_{_safe(net.period.label)}"
    stamp = run.stamp()
    _write(run.out / folder / f"network_{stem}.dot", export_dot(net, stamp))
    _write(run.out / folder / f"network_{stem}.json", export_json(net, {"config_hash": run.cfg.hash(), "data_hash": run.data_hash}))
    _write(run.out / folder / f"counts_{stem}.csv", counts_csv(net, stamp))


def cmd_causality(cfg: RunConfig, args) -> int:
    run = load_run(cfg)
    nets = run_causality(run)
    buf = io.StringIO()
    for line in run.stamp():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GRANGER_HEADER + ["d"])
    for net in nets:
        for row, rel in zip(granger_rows(net), [r for r in net.edges for _ in (0, 1)]):
            w.writerow(row + [rel.d])
        _emit_network(run, net)
    _write(run.out / "causality" / "granger.csv", buf.getvalue())
    for net in nets:
        for rel in net.edges:
            print(f"{net.metric:5s} {net.period.label:11s} {rel.a} / {rel.b}: {rel.kind.value} (lag {rel.lag}, d={rel.d})")
    return 0


def cmd_network(cfg: RunConfig | None, args) -> int:
    """Re-export a saved network JSON as DOT and a counts table."""
    path = Path(args.network)
    net = import_json(path.read_text(encoding="utf-8"))
    dot = export_dot(net)
    target = Path(args.out) if args.out else path.parent
    _write(target / (path.stem + ".dot"), dot)
    _write(target / (path.stem + "_counts.csv"), counts_csv(net))
    for node, c in relation_counts(net).items():
        print(f"{node}: cause={c.cause} effect={c.effect} bidirectional={c.bidirectional}")
    return 0


def cmd_report(cfg: RunConfig, args) -> int:
    run = load_run(cfg)
    self_series = compute_self(run)
    ref = cfg.reference_market
    summaries = []
    for (market, p), s in self_series.items():
        raw = crash_summary(s)
        ref_mean = crash_summary(self_series[(ref, p)]).mean
        norm = crash_summary(normalize_series(s, ref_mean)) if ref_mean > 0 else None
        summaries.append({
            "series": s.label, "market": market, "degree": p,
            "mean": raw.mean, "max": raw.max, "max_date": raw.max_date.isoformat() if raw.max_date else None,
            "normalized_to": ref, "normalized_mean": norm.mean if norm else None,
            "normalized_max": norm.max if norm else None,
        })
    cross = []
    if len(cfg.markets) > 1 and args.cross:
        for (a, b, p), s in compute_cross(run).items():
            c = crash_summary(s)
            cross.append({"series": s.label, "mean": c.mean, "max": c.max, "max_date": c.max_date.isoformat()})
    report = {
        "metadata": {
            "config_hash": cfg.hash(),
            "data_hash": run.data_hash,
            "config": cfg.to_dict(),
            "versions": {
                "crashtopo": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "close_column": cfg.fetch.close_column if cfg.fetch else cfg.close_column,
            "assumptions": list(ASSUMPTIONS),
            "dates": [run.prices.dates[0].isoformat(), run.prices.dates[-1].isoformat()],
        },
        "summaries": summaries,
        "cross": cross,
    }
    _write(run.out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    lines = [f"# crashtopo report ({cfg.hash()[:12]})", "",
             f"reference market for normalisation: {ref}", "",
             "| series | mean | max | max date | mean (norm) | max (norm) |",
             "|---|---|---|---|---|---|"]
    for s in summaries:
        lines.append(f"| {s['series']} | {s['mean']:.4g} | {s['max']:.4g} | {s['max_date']} | "
                     f"{s['normalized_mean']:.3f} | {s['normalized_max']:.3f} |")
    for c in cross:
        lines.append(f"| {c['series']} | {c['mean']:.4g} | {c['max']:.4g} | {c['max_date']} | | |")
    _write(run.out / "report.md", "\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def cmd_synth(args) -> int:
    """Write a crash fixture as per-symbol CSVs plus a ready-to-run config."""
    target = Path(args.out or "synth")
    fx = synth.crash_fixture(args.days, args.instruments, args.burst_len, scale=args.scale, seed=args.seed)
    paths = synth.write_price_csvs(fx.prices, target / "data")
    config = {
        "markets": {"synthetic": list(fx.prices.symbols)},
        "data_dir": "data",
        "out": str((target / "out").resolve()),
        "crash_band": [fx.burst_start.isoformat(), fx.burst_end.isoformat()],
        "periods": [{"label": "all", "start": fx.prices.dates[0].isoformat(),
                     "end": (fx.prices.dates[-1] + timedelta(days=1)).isoformat()}],
        "seed": args.seed,
    }
    _write(target / "config.json", json.dumps(config, indent=2) + "\n")
    _write(target / "burst.json", json.dumps({"start": fx.burst_start.isoformat(), "end": fx.burst_end.isoformat(),
                                               "scale": args.scale, "seed": args.seed}, indent=2) + "\n")
    print(f"wrote {len(paths)} series to {target / 'data'}; burst {fx.burst_start} .. {fx.burst_end}")
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--window", type=int, help="sliding-window size in days (default 30)")
    p.add_argument("--stride", type=int, help="window stride in days (default 1)")
    p.add_argument("--degree", type=int, action="append", choices=(1, 2), help="Wasserstein degree; repeatable")
    p.add_argument("--alpha", type=float, help="significance level (default 0.05)")
    p.add_argument("--period", action="append", metavar="LABEL:START:END", help="analysis period; repeatable")
    p.add_argument("--max-lag", type=int, help="largest VAR lag considered by FPE")
    p.add_argument("--out", help="output root directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="processes for window/pair parallelism")
    p.add_argument("--preset", choices=("stock-commodity", "sectors"), help="use a built-in universe")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crashtopo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("ingest", "fetch (optional) and validate input prices"),
        ("wdseries", "per-market WD_p series (CSV + SVG)"),
        ("compare", "cross-market WD_p series (CSV + SVG)"),
        ("stationarity", "ADF / PP tables on WD series"),
        ("causality", "pairwise Granger analysis per period"),
        ("report", "crash summaries and run metadata"),
    ):
        p = sub.add_parser(name, help=help_)
        _common(p)
        if name == "ingest":
            p.add_argument("--fetch", action="store_true", help="download prices first")
        if name == "report":
            p.add_argument("--cross", action="store_true", help="also summarise cross-market series")
    p = sub.add_parser("network", help="re-export a saved network JSON")
    p.add_argument("network", help="network JSON written by 'causality'")
    p.add_argument("--out")
    p = sub.add_parser("synth", help="write a synthetic crash fixture")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, default=500)
    p.add_argument("--instruments", type=int, default=20)
    p.add_argument("--burst-len", type=int, default=20)
    p.add_argument("--scale", type=float, default=5.0)
    return parser


COMMANDS = {
    "ingest": cmd_ingest,
    "wdseries": cmd_wdseries,
    "compare": cmd_compare,
    "stationarity": cmd_stationarity,
    "causality": cmd_causality,
    "report": cmd_report,
}


def _config_from_args(args) -> RunConfig:
    overrides = {
        "window": args.window,
        "stride": args.stride,
        "degrees": args.degree,
        "alpha": args.alpha,
        "max_lag": args.max_lag,
        "out": args.out,
        "seed": args.seed,
        "workers": args.workers,
        "preset": args.preset,
    }
    if args.period:
        try:
            overrides["periods"] = [PeriodSpec.parse(p).to_dict() for p in args.period]
        except ValidationError as exc:
            raise ConfigError("periods", str(exc)) from None
    return load_config(args.config, overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "network":
            return cmd_network(None, args)
        cfg = _config_from_args(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"crashtopo: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"crashtopo: file error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except CrashtopoError as exc:
        print(f"crashtopo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
