"""Seeded synthetic data: stationary VARs, random walks and crash fixtures.

All randomness goes through ``numpy.random.Generator(PCG64(seed))`` so a
seed reproduces the same draws on any platform running the same numpy
major version.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Sequence

import numpy as np

from crashtopo.errors import ValidationError
from crashtopo.market_data import PriceMatrix, ReturnMatrix, tables_from_matrix

GENERATOR = "PCG64"
BURN_IN = 200


def rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class VarSpec:
    """VAR(p) y_t = A_1 y_{t-1} + ... + A_p y_{t-p} + e_t, e_t ~ N(0, noise_cov)."""

    coefficients: tuple  # p matrices of shape (n, n)
    noise_cov: np.ndarray | None = None
    seed: int = 0
    intercept: np.ndarray | None = field(default=None)

    def __post_init__(self):
        coefs = tuple(np.atleast_2d(np.asarray(a, dtype=float)) for a in self.coefficients)
        if not coefs:
            raise ValidationError("need at least one coefficient matrix")
        n = coefs[0].shape[0]
        if any(a.shape != (n, n) for a in coefs):
            raise ValidationError("coefficient matrices must all be n x n")
        cov = np.eye(n) if self.noise_cov is None else np.atleast_2d(np.asarray(self.noise_cov, dtype=float))
        if cov.shape != (n, n):
            raise ValidationError("noise covariance shape mismatch")
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "noise_cov", cov)
        radius = self.spectral_radius
        if radius >= 1:
            raise ValidationError(f"nonstationary VAR: companion spectral radius {radius:.4f} >= 1")

    @property
    def n_vars(self) -> int:
        return self.coefficients[0].shape[0]

    @property
    def lag(self) -> int:
        return len(self.coefficients)

    def companion(self) -> np.ndarray:
        n, p = self.n_vars, self.lag
        c = np.zeros((n * p, n * p))
        c[:n, :] = np.hstack(self.coefficients)
        c[n:, :-n] = np.eye(n * (p - 1))
        return c

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.companion()))))


def simulate_var(spec: VarSpec, T: int, burn_in: int = BURN_IN) -> np.ndarray:
    """Draw a (T, n) sample after discarding ``burn_in`` start-up values."""
    if T <= 10 * spec.lag:
        raise ValidationError(f"T={T} too short for a lag-{spec.lag} VAR")
    n, p = spec.n_vars, spec.lag
    g = rng(spec.seed)
    chol = np.linalg.cholesky(spec.noise_cov)
    total = T + burn_in
    noise = g.standard_normal((total, n)) @ chol.T
    c = np.zeros(n) if spec.intercept is None else np.asarray(spec.intercept, dtype=float)
    y = np.zeros((total + p, n))
    for t in range(p, total + p):
        acc = c + noise[t - p]
        for i, a in enumerate(spec.coefficients, start=1):
            acc = acc + a @ y[t - i]
        y[t] = acc
    return y[p + burn_in :]


def simulate_random_walk(T: int, seed: int | None = 0) -> np.ndarray:
    return np.cumsum(rng(seed).standard_normal(T))


def business_days(start: date, count: int) -> list[date]:
    days, d = [], start
    while len(days) < count:
        if d.weekday() < 5:
            days.append(d)
        d += timedelta(days=1)
    return days


def baseline_returns(
    n_days: int,
    n_instruments: int,
    seed: int = 0,
    vol: float = 0.01,
    start: date = date(2018, 6, 1),
    symbols: Sequence[str] | None = None,
) -> ReturnMatrix:
    """I.i.d. Gaussian log returns on consecutive business days."""
    g = rng(seed)
    values = vol * g.standard_normal((n_days, n_instruments))
    symbols = tuple(symbols) if symbols else tuple(f"SYN{i:02d}" for i in range(n_instruments))
    return ReturnMatrix(symbols, tuple(business_days(start, n_days)), values)


def inject_crash(
    returns: ReturnMatrix,
    start: date,
    end: date,
    scale: float,
    shock: float | None = None,
    seed: int = 0,
) -> ReturnMatrix:
    """Amplify returns dated in ``[start, end]`` and add a common daily shock.

    Every return in the window is multiplied by ``scale`` and one shock
    draw per day is added to all instruments. ``shock`` is its standard
    deviation; by default ``(scale - 1)`` times the pooled standard
    deviation of the window, which vanishes at ``scale == 1``.
    """
    if not scale >= 1:
        raise ValidationError(f"crash scale must be >= 1, got {scale}")
    mask = np.array([start <= d <= end for d in returns.dates])
    if not mask.any():
        raise ValidationError(f"crash window {start}..{end} does not intersect the return dates")
    values = returns.values.copy()
    window = values[mask]
    if shock is None:
        shock = (scale - 1.0) * float(np.std(window))
    common = rng(seed).standard_normal(int(mask.sum())) * shock if shock > 0 else 0.0
    values[mask] = window * scale + np.asarray(common).reshape(-1, 1)
    return ReturnMatrix(returns.symbols, returns.dates, values)


def prices_from_returns(returns: ReturnMatrix, start_price: float = 100.0, first_date: date | None = None) -> PriceMatrix:
    """Invert log returns: a price row before the first return, then cumulative products."""
    if first_date is None:
        first_date = returns.dates[0] - timedelta(days=1)
        while first_date.weekday() >= 5:
            first_date -= timedelta(days=1)
    n = len(returns.symbols)
    levels = np.vstack([np.zeros((1, n)), np.cumsum(returns.values, axis=0)])
    return PriceMatrix(returns.symbols, (first_date, *returns.dates), start_price * np.exp(levels))


@dataclass(frozen=True)
class CrashFixture:
    returns: ReturnMatrix
    prices: PriceMatrix
    burst_start: date
    burst_end: date


def crash_fixture(
    n_days: int = 500,
    n_instruments: int = 20,
    burst_len: int = 20,
    burst_at: int | None = None,
    scale: float = 5.0,
    seed: int = 0,
    vol: float = 0.01,
) -> CrashFixture:
    """Baseline returns with one crash burst (defaults: 500 days, 20 names, 20-day burst at scale 5)."""
    if burst_at is None:
        burst_at = int(rng(seed + 1).integers(n_days // 4, 3 * n_days // 4))
    if not 0 <= burst_at <= n_days - burst_len:
        raise ValidationError("burst does not fit inside the sample")
    base = baseline_returns(n_days, n_instruments, seed=seed, vol=vol)
    b0, b1 = base.dates[burst_at], base.dates[burst_at + burst_len - 1]
    crashed = inject_crash(base, b0, b1, scale, seed=seed + 2)
    return CrashFixture(crashed, prices_from_returns(crashed), b0, b1)


def write_price_csvs(prices: PriceMatrix, directory) -> list[Path]:
    """One ``<symbol>.csv`` per column in the Date,Close layout."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for table in tables_from_matrix(prices):
        path = directory / f"{table.symbol}.csv"
        path.write_text(table.to_csv(), encoding="utf-8", newline="\n")
        paths.append(path)
    return paths
