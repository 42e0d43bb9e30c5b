"""Price ingestion, date alignment, log returns and point-cloud construction."""
from __future__ import annotations

import csv
import io
import logging
import math
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date, datetime, time, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from crashtopo.errors import (
    AlignmentError,
    EmptyDataError,
    FetchError,
    InsufficientDataError,
    ParseError,
    ValidationError,
)

log = logging.getLogger(__name__)

DEFAULT_DATE_COLUMN = "Date"
DEFAULT_CLOSE_COLUMN = "Close"
ADJUSTED_CLOSE_COLUMN = "Adj Close"

YAHOO_ENDPOINT = (
    "https://query1.finance.yahoo.com/v7/finance/download/{symbol}"
    "?period1={period1}&period2={period2}&interval=1d&events=history"
)

_MISSING_TOKENS = {"", "null", "nan", "na", "n/a"}


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_increasing(dates: Sequence[date], what: str) -> None:
    for a, b in zip(dates, dates[1:]):
        if not a < b:
            raise ValidationError(f"{what}: dates not strictly increasing at {b.isoformat()}")


@dataclass(frozen=True)
class PriceTable:
    """Daily closes of a single instrument, sorted by date."""

    symbol: str
    rows: tuple[tuple[date, float], ...]
    column: str = DEFAULT_CLOSE_COLUMN

    def __post_init__(self):
        rows = tuple((d, float(c)) for d, c in self.rows)
        object.__setattr__(self, "rows", rows)
        _check_increasing([d for d, _ in rows], self.symbol)
        for d, c in rows:
            if not (math.isfinite(c) and c > 0):
                raise ValidationError(f"{self.symbol}: non-positive close {c!r} on {d.isoformat()}")

    @property
    def dates(self) -> list[date]:
        return [d for d, _ in self.rows]

    @property
    def closes(self) -> list[float]:
        return [c for _, c in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([DEFAULT_DATE_COLUMN, DEFAULT_CLOSE_COLUMN])
        for d, c in self.rows:
            writer.writerow([d.isoformat(), repr(c)])
        return buf.getvalue()


@dataclass(frozen=True)
class PriceMatrix:
    symbols: tuple[str, ...]
    dates: tuple[date, ...]
    values: np.ndarray  # shape (l, n)

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "dates", tuple(self.dates))
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape != (len(self.dates), len(self.symbols)):
            raise ValidationError(
                f"price grid shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.symbols)} symbols"
            )
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValidationError("price grid must be finite and strictly positive")
        _check_increasing(self.dates, "price matrix")
        object.__setattr__(self, "values", values)

    def select(self, symbols: Iterable[str]) -> PriceMatrix:
        """Column subset, in the order given."""
        symbols = list(symbols)
        index = {s: i for i, s in enumerate(self.symbols)}
        missing = [s for s in symbols if s not in index]
        if missing:
            raise ValidationError(f"unknown symbols: {missing}")
        cols = [index[s] for s in symbols]
        return PriceMatrix(tuple(symbols), self.dates, self.values[:, cols])


@dataclass(frozen=True)
class ReturnMatrix:
    symbols: tuple[str, ...]
    dates: tuple[date, ...]
    values: np.ndarray  # shape (l - 1, n)

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "dates", tuple(self.dates))
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape != (len(self.dates), len(self.symbols)):
            raise ValidationError(f"return grid shape {values.shape} does not match labels")
        if not np.all(np.isfinite(values)):
            raise ValidationError("return grid contains non-finite entries")
        _check_increasing(self.dates, "return matrix")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class PointCloud:
    """One point in R^n per return date."""

    points: np.ndarray  # shape (m, n)
    dates: tuple[date, ...] = field(default=())

    def __post_init__(self):
        points = _frozen(self.points)
        if points.ndim == 1:
            points = _frozen(points.reshape(-1, 1))
        if points.ndim != 2:
            raise ValidationError("points must form a 2-D array")
        dates = tuple(self.dates)
        if dates and len(dates) != points.shape[0]:
            raise ValidationError("one date per point required")
        _check_increasing(dates, "point cloud")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _parse_date(text: str) -> date:
    return date.fromisoformat(text.strip()[:10])


def parse_price_csv(
    text: str,
    symbol: str,
    date_column: str = DEFAULT_DATE_COLUMN,
    close_column: str = DEFAULT_CLOSE_COLUMN,
    skip_missing: bool = False,
) -> PriceTable:
    """Parse CSV text into a :class:`PriceTable`.

    Rows may arrive in any order and are sorted by date. Duplicate dates and
    non-positive closes are rejected with the offending line number. With
    ``skip_missing`` a blank or ``null`` close is dropped instead of raising
    (remote feeds emit these on exchange holidays).
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError(f"{symbol}: empty file", line=1) from None
    for name in (date_column, close_column):
        if name not in header:
            raise ParseError(f"{symbol}: missing column {name!r} in header {header}", line=1)
    di, ci = header.index(date_column), header.index(close_column)

    rows: list[tuple[date, float]] = []
    seen: dict[date, int] = {}
    for record in reader:
        lineno = reader.line_num
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) <= max(di, ci):
            raise ParseError(f"{symbol}: expected at least {max(di, ci) + 1} fields", line=lineno)
        try:
            d = _parse_date(record[di])
        except ValueError:
            raise ParseError(f"{symbol}: bad date {record[di]!r}", line=lineno) from None
        raw = record[ci].strip()
        if skip_missing and raw.lower() in _MISSING_TOKENS:
            continue
        try:
            close = float(raw)
        except ValueError:
            raise ParseError(f"{symbol}: bad close {raw!r}", line=lineno) from None
        if not (math.isfinite(close) and close > 0):
            raise ValidationError(f"line {lineno}: {symbol}: close must be positive, got {raw}")
        if d in seen:
            raise ValidationError(
                f"line {lineno}: {symbol}: duplicate date {d.isoformat()} (first at line {seen[d]})"
            )
        seen[d] = lineno
        rows.append((d, close))
    rows.sort(key=lambda r: r[0])
    return PriceTable(symbol, tuple(rows), column=close_column)


def load_price_csv(
    path,
    date_column: str = DEFAULT_DATE_COLUMN,
    close_column: str = DEFAULT_CLOSE_COLUMN,
    symbol: str | None = None,
) -> PriceTable:
    """Load one instrument's closes from a CSV file.

    The symbol defaults to the file stem (``data/AAPL.csv`` -> ``AAPL``).
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8-sig")
    return parse_price_csv(text, symbol or path.stem, date_column, close_column)


@dataclass
class FetchResult:
    tables: list[PriceTable]
    errors: list[FetchError]

    @property
    def ok(self) -> bool:
        return not self.errors


def _epoch(d: date) -> int:
    return int(datetime.combine(d, time(), tzinfo=timezone.utc).timestamp())


def _fetch_one(symbol, start, end, endpoint, close_column, timeout) -> PriceTable:
    url = endpoint.format(
        symbol=symbol,
        start=start.isoformat(),
        end=end.isoformat(),
        period1=_epoch(start),
        period2=_epoch(end),
    )
    request = urllib.request.Request(url, headers={"User-Agent": "crashtopo/0.1"})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as resp:
            payload = resp.read().decode("utf-8-sig")
    except urllib.error.HTTPError as exc:
        raise FetchError(symbol, f"HTTP {exc.code}") from exc
    except (urllib.error.URLError, OSError) as exc:
        raise FetchError(symbol, f"transport failure: {exc}") from exc
    if not payload.strip():
        raise EmptyDataError(symbol, "empty payload")

    header = next(csv.reader(io.StringIO(payload)), [])
    column = close_column
    if column not in header and DEFAULT_CLOSE_COLUMN in header:
        log.info("%s: %r absent, using %r", symbol, column, DEFAULT_CLOSE_COLUMN)
        column = DEFAULT_CLOSE_COLUMN
    try:
        table = parse_price_csv(payload, symbol, close_column=column, skip_missing=True)
    except ValidationError as exc:
        raise FetchError(symbol, f"bad payload: {exc}") from exc
    rows = tuple(r for r in table.rows if start <= r[0] <= end)
    if not rows:
        raise EmptyDataError(symbol, "no rows in requested range")
    return PriceTable(symbol, rows, column=column)


def fetch_prices(
    symbols: Sequence[str],
    start: date,
    end: date,
    endpoint: str = YAHOO_ENDPOINT,
    close_column: str = ADJUSTED_CLOSE_COLUMN,
    timeout: float = 30.0,
    workers: int = 4,
) -> FetchResult:
    """Download daily closes for each symbol over ``[start, end]``.

    ``endpoint`` is a URL template with ``{symbol}``, ``{start}``/``{end}``
    (ISO dates) and ``{period1}``/``{period2}`` (Unix seconds) placeholders.
    A failing symbol is recorded in ``errors`` and the rest of the batch
    proceeds; both lists keep input order.
    """
    symbols = list(symbols)

    def task(sym):
        try:
            return _fetch_one(sym, start, end, endpoint, close_column, timeout)
        except FetchError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(symbols) or 1))) as pool:
        outcomes = list(pool.map(task, symbols))
    tables = [o for o in outcomes if isinstance(o, PriceTable)]
    errors = [o for o in outcomes if isinstance(o, FetchError)]
    for err in errors:
        log.warning("fetch failed: %s", err)
    return FetchResult(tables, errors)


def align(tables: Sequence[PriceTable]) -> PriceMatrix:
    """Inner-join tables on date. Columns keep the input order."""
    if not tables:
        raise AlignmentError("no tables to align")
    for t in tables:
        if len(t) == 0:
            raise AlignmentError(f"{t.symbol}: empty table")
    symbols = [t.symbol for t in tables]
    if len(set(symbols)) != len(symbols):
        raise AlignmentError(f"duplicate symbols: {symbols}")
    common = set(tables[0].dates)
    for t in tables[1:]:
        common &= set(t.dates)
    if not common:
        raise AlignmentError(f"no common dates across {symbols}")
    dates = sorted(common)
    lookups = [dict(t.rows) for t in tables]
    values = np.array([[lk[d] for lk in lookups] for d in dates])
    return PriceMatrix(tuple(symbols), tuple(dates), values)


def log_returns(m: PriceMatrix) -> ReturnMatrix:
    """Daily log returns; each row is dated by the later day of its pair."""
    if len(m.dates) < 2:
        raise InsufficientDataError(f"need at least 2 price rows, got {len(m.dates)}")
    values = np.log(m.values[1:] / m.values[:-1])
    return ReturnMatrix(m.symbols, m.dates[1:], values)


def point_cloud(r: ReturnMatrix) -> PointCloud:
    return PointCloud(r.values, r.dates)


def tables_from_matrix(m: PriceMatrix) -> list[PriceTable]:
    return [
        PriceTable(sym, tuple(zip(m.dates, m.values[:, i].tolist())))
        for i, sym in enumerate(m.symbols)
    ]
