"""Sliding-window Wasserstein-distance series and crash summaries."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from datetime import date
from typing import Sequence

import numpy as np

from crashtopo._parallel import ordered_map
from crashtopo.errors import AlignmentError, InsufficientDataError, ValidationError
from crashtopo.market_data import PointCloud
from crashtopo.persistence import PersistenceDiagram, cloud_diagram
from crashtopo.wasserstein import wd_between, wd_to_diagonal

DEFAULT_WINDOW = 30


@dataclass(frozen=True)
class WindowSpec:
    size: int = DEFAULT_WINDOW
    stride: int = 1

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ValidationError(f"window size must be a positive integer, got {self.size}")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValidationError(f"stride must be a positive integer, got {self.stride}")

    def count(self, length: int) -> int:
        if length < self.size:
            return 0
        return (length - self.size) // self.stride + 1


@dataclass(frozen=True)
class WDSeries:
    """Wasserstein distances dated by the last day of each window."""

    dates: tuple[date, ...]
    values: np.ndarray
    degree: float
    mode: str = "self"
    label: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", values)
        if len(self.dates) != len(values):
            raise ValidationError("WD series needs one date per value")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValidationError("WD values must be finite and nonnegative")
        if self.mode not in ("self", "cross"):
            raise ValidationError(f"unknown mode {self.mode!r}")

    def __len__(self) -> int:
        return len(self.values)

    def between(self, start: date, end: date) -> WDSeries:
        """Values dated in the half-open interval [start, end)."""
        keep = [i for i, d in enumerate(self.dates) if start <= d < end]
        return replace(self, dates=tuple(self.dates[i] for i in keep), values=self.values[keep])

    def to_csv(self, comments: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["date", "value"])
        for d, v in zip(self.dates, self.values):
            writer.writerow([d.isoformat(), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, degree: float = 2, mode: str = "self", label: str = "") -> WDSeries:
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        reader = csv.DictReader(lines)
        dates, values = [], []
        for row in reader:
            dates.append(date.fromisoformat(row["date"]))
            values.append(float(row["value"]))
        return cls(tuple(dates), np.array(values), degree, mode, label)


@dataclass(frozen=True)
class CrashSummary:
    mean: float
    max: float
    max_date: date | None

    @property
    def ratio(self) -> float:
        return self.max / self.mean if self.mean > 0 else float("inf")


def sliding_windows(cloud: PointCloud, spec: WindowSpec = WindowSpec()) -> list[PointCloud]:
    """Windows ``[j, j + w)`` for ``j = 0, stride, ...``, each ending on a cloud date."""
    m = len(cloud)
    if m < spec.size:
        raise InsufficientDataError(f"cloud has {m} points, window needs {spec.size}")
    out = []
    for j in range(0, m - spec.size + 1, spec.stride):
        dates = cloud.dates[j : j + spec.size] if cloud.dates else ()
        out.append(PointCloud(cloud.points[j : j + spec.size], dates))
    return out


def _window_end_dates(cloud: PointCloud, spec: WindowSpec) -> tuple[date, ...]:
    if not cloud.dates:
        return ()
    return tuple(cloud.dates[j + spec.size - 1] for j in range(0, len(cloud) - spec.size + 1, spec.stride))


def window_diagrams(cloud: PointCloud, spec: WindowSpec = WindowSpec(), workers: int | None = None) -> list[PersistenceDiagram]:
    return ordered_map(cloud_diagram, [w.points for w in sliding_windows(cloud, spec)], workers)


def _self_task(args):
    points, p = args
    return wd_to_diagonal(cloud_diagram(points), p)


def _cross_task(args):
    a, b, p = args
    return wd_between(cloud_diagram(a), cloud_diagram(b), p)


def _series_dates(cloud: PointCloud, spec: WindowSpec, n: int) -> tuple[date, ...]:
    dates = _window_end_dates(cloud, spec)
    if not dates:
        # Undated clouds get ordinal placeholders so the series stays well formed.
        dates = tuple(date.fromordinal(1 + k) for k in range(n))
    return dates


def wd_series_self(
    cloud: PointCloud,
    spec: WindowSpec = WindowSpec(),
    p: float = 2,
    label: str = "",
    workers: int | None = None,
) -> WDSeries:
    """Distance of each window's H0 diagram to the diagonal."""
    windows = sliding_windows(cloud, spec)
    values = ordered_map(_self_task, [(w.points, p) for w in windows], workers)
    return WDSeries(_series_dates(cloud, spec, len(values)), np.array(values), p, "self", label)


def wd_series_cross(
    cloud_a: PointCloud,
    cloud_b: PointCloud,
    spec: WindowSpec = WindowSpec(),
    p: float = 2,
    label: str = "",
    workers: int | None = None,
) -> WDSeries:
    """Distance between the H0 diagrams of two clouds over identical date ranges."""
    if cloud_a.dates != cloud_b.dates or len(cloud_a) != len(cloud_b):
        raise AlignmentError("cross-mode clouds must share the same date axis")
    wa = sliding_windows(cloud_a, spec)
    wb = sliding_windows(cloud_b, spec)
    values = ordered_map(_cross_task, [(a.points, b.points, p) for a, b in zip(wa, wb)], workers)
    return WDSeries(_series_dates(cloud_a, spec, len(values)), np.array(values), p, "cross", label)


def normalize_series(s: WDSeries, reference_mean: float) -> WDSeries:
    if not (np.isfinite(reference_mean) and reference_mean > 0):
        raise ValidationError(f"reference mean must be positive, got {reference_mean}")
    return replace(s, values=s.values / reference_mean)


def crash_summary(s: WDSeries) -> CrashSummary:
    if len(s) == 0:
        raise ValidationError("cannot summarise an empty series")
    k = int(np.argmax(s.values))
    return CrashSummary(
        mean=float(np.mean(s.values)),
        max=float(s.values[k]),
        max_date=s.dates[k] if s.dates else None,
    )
