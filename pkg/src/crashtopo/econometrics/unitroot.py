"""Augmented Dickey-Fuller and Phillips-Perron unit-root tests.

Both use the constant-only regression and MacKinnon's (1994) response
surface for approximate p-values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from crashtopo.econometrics.regression import RegressionFit, ols
from crashtopo.errors import DegenerateRegressionError, InsufficientDataError, SingularDesignError

MIN_LENGTH = 20

# MacKinnon (1994), tau statistic, one unit root, constant only.
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_SMALL_P = (2.1659, 1.4412, 0.038269)
_LARGE_P = (1.7339, 0.93202, -0.12745, -0.010368)


def mackinnon_pvalue(stat: float) -> float:
    """Approximate asymptotic p-value of a Dickey-Fuller tau statistic."""
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return 0.0
    coef = _SMALL_P if stat <= _TAU_STAR else _LARGE_P
    z = sum(c * stat**i for i, c in enumerate(coef))
    return float(ndtr(z))


@dataclass(frozen=True)
class UnitRootResult:
    statistic: float
    p_value: float
    test: str
    lags_or_bandwidth: int
    n_obs: int
    spec: str = "c"

    def rejects(self, alpha: float = 0.05) -> bool:
        """True when the unit-root null is rejected at ``alpha``."""
        return self.p_value < alpha


def difference(s, d: int = 1) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if d < 0:
        raise ValueError("differencing order must be nonnegative")
    if len(s) <= d:
        raise InsufficientDataError(f"series of length {len(s)} cannot be differenced {d} times")
    return np.diff(s, n=d) if d else s.copy()


def _check_series(y) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1)
    if len(y) < MIN_LENGTH:
        raise InsufficientDataError(f"unit-root tests need at least {MIN_LENGTH} points, got {len(y)}")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if np.ptp(y) == 0:
        raise DegenerateRegressionError("series is constant")
    return y


def schwert_max_lag(T: int) -> int:
    return int(math.floor(12 * (T / 100) ** 0.25))


def _adf_design(y: np.ndarray, k: int, start: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows for Delta y_t, t = start + 1 .. T - 1, with k lagged differences."""
    dy = np.diff(y)
    rows = np.arange(start, len(dy))
    cols = [np.ones(len(rows)), y[rows]]
    cols += [dy[rows - i] for i in range(1, k + 1)]
    return dy[rows], np.column_stack(cols)


def _fit(y, X) -> RegressionFit:
    try:
        return ols(y, X)
    except SingularDesignError as exc:
        raise DegenerateRegressionError(str(exc)) from exc


def adf_test(s, max_lag: int | None = None) -> UnitRootResult:
    """ADF t-test with the augmentation order chosen by AIC.

    Every order in ``0..max_lag`` is fitted on the same trimmed sample; the
    winning order is then refitted on all rows it can use.
    """
    y = _check_series(s)
    T = len(y)
    k_max = schwert_max_lag(T) if max_lag is None else int(max_lag)
    k_max = max(0, min(k_max, T // 2 - 2))
    best_k, best_aic = 0, np.inf
    for k in range(k_max + 1):
        dep, X = _adf_design(y, k, k_max)
        aic = _fit(dep, X).aic()
        if aic < best_aic:
            best_k, best_aic = k, aic
    dep, X = _adf_design(y, best_k, best_k)
    fit = _fit(dep, X)
    stat = float(fit.tvalues[1])
    return UnitRootResult(stat, mackinnon_pvalue(stat), "ADF", best_k, fit.n_obs)


def newey_west_bandwidth(T: int) -> int:
    return int(math.floor(4 * (T / 100) ** (2 / 9)))


def long_run_variance(u: np.ndarray, bandwidth: int) -> float:
    """Bartlett-kernel (Newey-West) long-run variance of ``u`` (not demeaned)."""
    n = len(u)
    lrv = float(u @ u) / n
    for j in range(1, bandwidth + 1):
        w = 1.0 - j / (bandwidth + 1.0)
        lrv += 2.0 * w * float(u[j:] @ u[:-j]) / n
    return lrv


def pp_test(s, bandwidth: int | None = None) -> UnitRootResult:
    """Phillips-Perron Z_tau test on the unaugmented Dickey-Fuller regression."""
    y = _check_series(s)
    T = len(y)
    L = newey_west_bandwidth(T) if bandwidth is None else int(bandwidth)
    X = np.column_stack([np.ones(T - 1), y[:-1]])
    fit = _fit(y[1:], X)
    n, k = fit.n_obs, fit.n_params
    u = fit.residuals
    rho, se_rho = fit.coefficients[1], fit.std_errors[1]
    if se_rho <= 0:
        raise DegenerateRegressionError("zero variance for the lagged-level coefficient")
    s2 = fit.rss / (n - k)
    gamma0 = fit.rss / n
    lam2 = long_run_variance(u, L)
    if lam2 <= 0:
        raise DegenerateRegressionError("nonpositive long-run variance")
    lam = math.sqrt(lam2)
    stat = math.sqrt(gamma0 / lam2) * (rho - 1) / se_rho - 0.5 * (lam2 - gamma0) / lam * n * se_rho / math.sqrt(s2)
    # Z_tau tests rho = 1 in y_t = c + rho * y_{t-1}; report that t-form.
    return UnitRootResult(float(stat), mackinnon_pvalue(stat), "PP", L, n)


@dataclass
class StationarySeries:
    values: np.ndarray
    d: int
    adf: UnitRootResult | None = None
    pp: UnitRootResult | None = None
    stationary: bool = False
    label: str = ""
    history: list = field(default_factory=list)


def _passes(adf: UnitRootResult, pp: UnitRootResult, alpha: float) -> bool:
    return adf.rejects(alpha) and pp.rejects(alpha)


def ensure_stationary(series, alpha: float = 0.05, d_max: int = 2, labels=None):
    """Smallest common differencing order at which every series passes both tests.

    Returns ``(stationary_series, d)``. If some series still fails at
    ``d_max`` the result is returned at ``d_max`` with ``stationary=False``
    on the offenders.
    """
    series = [np.asarray(s, dtype=float) for s in series]
    if not series:
        raise ValueError("no series given")
    if d_max < 1:
        raise ValueError("d_max must be at least 1")
    labels = list(labels) if labels is not None else [str(i) for i in range(len(series))]
    history: list[list[tuple[UnitRootResult, UnitRootResult]]] = [[] for _ in series]
    out: list[StationarySeries] = []
    for d in range(d_max + 1):
        out = []
        for i, s in enumerate(series):
            values = difference(s, d)
            adf, pp = adf_test(values), pp_test(values)
            history[i].append((adf, pp))
            out.append(StationarySeries(values, d, adf, pp, _passes(adf, pp, alpha), labels[i], history[i]))
        if all(o.stationary for o in out):
            return out, d
    return out, d_max
