"""Run configuration: JSON file plus command-line overrides."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, replace
from datetime import date
from pathlib import Path
from typing import Any, Mapping

from crashtopo.errors import CrashtopoError
from crashtopo.market_data import DEFAULT_CLOSE_COLUMN, DEFAULT_DATE_COLUMN, YAHOO_ENDPOINT
from crashtopo.network import DEFAULT_PERIODS, PeriodSpec

DATA_DIR_ENV = "CRASHTOPO_DATA_DIR"

# Reference universes (20 US stocks, 20 commodity futures, 11 sectors), usable as presets.
US_STOCKS = (
    "AAPL", "MSFT", "GOOGL", "AMZN", "NVDA", "META", "TSLA", "V", "BRK-B", "UNH",
    "LLY", "JNJ", "XOM", "WMT", "PG", "MA", "CVX", "AVGO", "HD", "MRK",
)
COMMODITIES = (
    "CL=F", "BZ=F", "RB=F", "HO=F", "NG=F", "ALI=F", "HG=F", "ZN=F", "GC=F", "SI=F",
    "ZC=F", "ZW=F", "KE=F", "ZS=F", "CT=F", "KC=F", "CC=F", "LE=F", "GF=F", "HE=F",
)
US_SECTORS = {
    "Consumer Discretionary": ("AMZN", "TSLA", "HD", "MCD", "NKE"),
    "Consumer Staples": ("WMT", "PG", "COST", "KO", "PEP"),
    "Energy": ("XOM", "CVX", "COP", "SLB", "EOG"),
    "Financials": ("BRK-B", "V", "JPM", "MA", "BAC"),
    "Healthcare": ("LLY", "UNH", "JNJ", "MRK", "ABBV"),
    "Industrials": ("UNP", "CAT", "GE", "UPS", "HON"),
    "IT": ("MSFT", "AAPL", "NVDA", "AVGO", "ORCL"),
    "Materials": ("LIN", "SHW", "SCCO", "APD", "ECL"),
    "Real Estate": ("PLD", "AMT", "EQIX", "SPG", "PSA"),
    "Utilities": ("NEE", "SO", "DUK", "SRE", "AEP"),
    "Communications Services": ("GOOGL", "META", "NFLX", "TMUS", "CMCSA"),
}
PRESETS = {
    "stock-commodity": {"stock": US_STOCKS, "commodity": COMMODITIES},
    "sectors": US_SECTORS,
}


class ConfigError(CrashtopoError):
    exit_code = 2

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"config field {field_name!r}: {message}")


@dataclass(frozen=True)
class FetchSpec:
    start: date
    end: date
    endpoint: str = YAHOO_ENDPOINT
    close_column: str = "Adj Close"


@dataclass(frozen=True)
class RunConfig:
    markets: dict[str, tuple[str, ...]]
    data_dir: str = "data"
    date_column: str = DEFAULT_DATE_COLUMN
    close_column: str = DEFAULT_CLOSE_COLUMN
    window: int = 30
    stride: int = 1
    degrees: tuple[int, ...] = (1, 2)
    alpha: float = 0.05
    periods: tuple[PeriodSpec, ...] = DEFAULT_PERIODS
    max_lag: int | None = None
    d_max: int = 2
    bonferroni: bool = False
    compare: tuple[tuple[str, str], ...] = ()
    reference: str | None = None
    crash_band: tuple[date, date] | None = (date(2020, 2, 1), date(2020, 5, 31))
    fetch: FetchSpec | None = None
    out: str = "out"
    seed: int = 0
    workers: int | None = None

    def validate(self) -> RunConfig:
        if not self.markets:
            raise ConfigError("markets", "at least one market is required")
        for name, symbols in self.markets.items():
            if not symbols:
                raise ConfigError("markets", f"market {name!r} has no symbols")
        if not (isinstance(self.window, int) and self.window >= 1):
            raise ConfigError("window", f"must be a positive integer, got {self.window!r}")
        if not (isinstance(self.stride, int) and self.stride >= 1):
            raise ConfigError("stride", f"must be a positive integer, got {self.stride!r}")
        if not self.degrees or any(p not in (1, 2) for p in self.degrees):
            raise ConfigError("degrees", f"must be a non-empty subset of {{1, 2}}, got {self.degrees!r}")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha", f"must lie in (0, 1), got {self.alpha!r}")
        if self.max_lag is not None and self.max_lag < 1:
            raise ConfigError("max_lag", "must be at least 1")
        if self.d_max < 1:
            raise ConfigError("d_max", "must be at least 1")
        for a, b in self.compare:
            for m in (a, b):
                if m not in self.markets:
                    raise ConfigError("compare", f"unknown market {m!r}")
        if self.reference is not None and self.reference not in self.markets:
            raise ConfigError("reference", f"unknown market {self.reference!r}")
        return self

    @property
    def reference_market(self) -> str:
        return self.reference or next(iter(self.markets))

    @property
    def compare_pairs(self) -> tuple[tuple[str, str], ...]:
        if self.compare:
            return self.compare
        names = list(self.markets)
        return tuple((a, b) for i, a in enumerate(names) for b in names[i + 1 :])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["markets"] = {k: list(v) for k, v in self.markets.items()}
        d["periods"] = [p.to_dict() for p in self.periods]
        d["degrees"] = list(self.degrees)
        d["compare"] = [list(p) for p in self.compare]
        d["crash_band"] = [x.isoformat() for x in self.crash_band] if self.crash_band else None
        if self.fetch:
            d["fetch"] = {**asdict(self.fetch), "start": self.fetch.start.isoformat(), "end": self.fetch.end.isoformat()}
        return d

    def hash(self) -> str:
        """Digest of everything that can change numerical output."""
        d = self.to_dict()
        for key in ("out", "workers", "data_dir", "fetch"):
            d.pop(key, None)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def out_dir(self) -> Path:
        return Path(self.out) / self.hash()[:12]

    def symbol_path(self, symbol: str) -> Path:
        return Path(self.data_dir) / f"{symbol}.csv"


def _date(value: Any, field_name: str) -> date:
    try:
        return value if isinstance(value, date) else date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(field_name, f"bad ISO date {value!r}") from None


def from_mapping(data: Mapping) -> RunConfig:
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known - {"preset"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    kw: dict[str, Any] = {k: v for k, v in data.items() if k in known}
    markets = data.get("markets")
    if markets is None and "preset" in data:
        if data["preset"] not in PRESETS:
            raise ConfigError("preset", f"unknown preset {data['preset']!r}; choose from {sorted(PRESETS)}")
        markets = PRESETS[data["preset"]]
    if not isinstance(markets, Mapping):
        raise ConfigError("markets", "must map market names to symbol lists")
    kw["markets"] = {str(k): tuple(v) for k, v in markets.items()}
    if "degrees" in kw:
        kw["degrees"] = tuple(int(p) for p in kw["degrees"])
    if "periods" in kw:
        try:
            kw["periods"] = tuple(PeriodSpec.from_dict(p) for p in kw["periods"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("periods", str(exc)) from None
    if "compare" in kw:
        kw["compare"] = tuple(tuple(p) for p in kw["compare"])
    if kw.get("crash_band") is not None:
        a, b = kw["crash_band"]
        kw["crash_band"] = (_date(a, "crash_band"), _date(b, "crash_band"))
    if kw.get("fetch") is not None:
        f = dict(kw["fetch"])
        try:
            kw["fetch"] = FetchSpec(
                _date(f.pop("start"), "fetch.start"), _date(f.pop("end"), "fetch.end"), **f
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError("fetch", str(exc)) from None
    for key, typ in (("window", int), ("stride", int), ("d_max", int), ("seed", int), ("alpha", float)):
        if key in kw and not isinstance(kw[key], (int, float)):
            raise ConfigError(key, f"expected a number, got {kw[key]!r}")
        if key in kw:
            kw[key] = typ(kw[key])
    return RunConfig(**kw)


def load_config(path=None, overrides: Mapping | None = None) -> RunConfig:
    """Read a JSON config, apply non-None overrides and the data-dir env var."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON: {exc}") from None
        base = Path(path).parent
        if "data_dir" in data and not Path(data["data_dir"]).is_absolute():
            data["data_dir"] = str(base / data["data_dir"])
    if not isinstance(data, dict):
        raise ConfigError("<file>", "top level must be an object")
    overrides = dict(overrides or {})
    if overrides.get("preset"):
        data.pop("markets", None)
    for k, v in overrides.items():
        if v is not None:
            data[k] = v
    env_dir = os.environ.get(DATA_DIR_ENV)
    if env_dir:
        data["data_dir"] = env_dir
    if "markets" not in data and "preset" not in data:
        raise ConfigError("markets", "missing (give markets or preset)")
    return from_mapping(data).validate()


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None}).validate()
