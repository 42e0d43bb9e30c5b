"""Bivariate VAR lag selection (FPE) and Granger-causality F-tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from crashtopo.econometrics.regression import multi_residuals, ols
from crashtopo.errors import InsufficientDataError, ValidationError


@dataclass(frozen=True)
class GrangerResult:
    cause: str
    effect: str
    lag: int
    f_statistic: float
    p_value: float
    df: tuple[int, int]
    rss_restricted: float
    rss_unrestricted: float
    perfect_fit: bool = False

    @property
    def direction(self) -> tuple[str, str]:
        return (self.cause, self.effect)

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail of the F(d1, d2) distribution via the regularized incomplete beta."""
    if f <= 0:
        return 1.0
    if not np.isfinite(f):
        return 0.0
    return float(betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)))


def lag_matrix(x: np.ndarray, lags: int, start: int) -> np.ndarray:
    """Columns x_{t-1}, ..., x_{t-lags} for t = start .. len(x) - 1."""
    rows = np.arange(start, len(x))
    return np.column_stack([x[rows - i] for i in range(1, lags + 1)]) if lags else np.empty((len(rows), 0))


def default_max_lag(T: int) -> int:
    return min(10, T // 10)


def fpe_values(y, x, max_lag: int | None = None) -> dict[int, float]:
    """FPE of the bivariate VAR(m) on (y, x) for m = 1..max_lag.

    All orders share the sample left after dropping the first ``max_lag``
    observations. The residual covariance is the ML estimate.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(y) != len(x):
        raise ValidationError("series lengths differ")
    T = len(y)
    max_lag = default_max_lag(T) if max_lag is None else int(max_lag)
    if max_lag < 1:
        raise InsufficientDataError(f"series of length {T} too short for lag selection")
    if T <= 2 * max_lag + 2:
        raise InsufficientDataError(f"need more than {2 * max_lag + 2} observations, got {T}")
    n = T - max_lag
    Y = np.column_stack([y[max_lag:], x[max_lag:]])
    out = {}
    for m in range(1, max_lag + 1):
        X = np.column_stack([np.ones(n), lag_matrix(y, m, max_lag), lag_matrix(x, m, max_lag)])
        k = X.shape[1]
        if n <= k:
            break
        E = multi_residuals(Y, X)
        sigma = E.T @ E / n
        out[m] = float(((n + k) / (n - k)) ** 2 * np.linalg.det(sigma))
    return out


def fpe_select(y, x, max_lag: int | None = None) -> int:
    """Lag order in ``1..max_lag`` minimising the final prediction error."""
    values = fpe_values(y, x, max_lag)
    return min(values, key=lambda m: (values[m], m))


def granger_test(effect, cause, q: int, effect_label: str = "y", cause_label: str = "x") -> GrangerResult:
    """F-test of H0: lags 1..q of ``cause`` add nothing to an AR(q) for ``effect``."""
    y = np.asarray(effect, dtype=float).reshape(-1)
    x = np.asarray(cause, dtype=float).reshape(-1)
    if len(y) != len(x):
        raise ValidationError("series lengths differ")
    q = int(q)
    if q < 1:
        raise ValidationError("lag must be at least 1")
    n = len(y) - q
    df2 = n - 2 * q - 1
    if df2 <= 0:
        raise InsufficientDataError(f"{len(y)} observations too few for lag {q}")
    const = np.ones((n, 1))
    own = lag_matrix(y, q, q)
    other = lag_matrix(x, q, q)
    dep = y[q:]
    restricted = ols(dep, np.hstack([const, own]))
    unrestricted = ols(dep, np.hstack([const, own, other]))
    rss_r, rss_u = restricted.rss, unrestricted.rss
    if rss_u <= np.finfo(float).eps * max(rss_r, np.finfo(float).tiny):
        return GrangerResult(cause_label, effect_label, q, float("inf"), 0.0, (q, df2), rss_r, rss_u, True)
    f = max(0.0, ((rss_r - rss_u) / q) / (rss_u / df2))
    return GrangerResult(cause_label, effect_label, q, f, f_sf(f, q, df2), (q, df2), rss_r, rss_u)
