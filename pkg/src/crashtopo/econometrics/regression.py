"""Ordinary least squares through a thin QR factorisation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from crashtopo.errors import SingularDesignError, ValidationError


@dataclass(frozen=True)
class RegressionFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    rss: float
    n_obs: int
    n_params: int
    std_errors: np.ndarray

    @property
    def sigma2(self) -> float:
        """Unbiased residual variance, rss / (n - k)."""
        return self.rss / (self.n_obs - self.n_params)

    @property
    def tvalues(self) -> np.ndarray:
        return self.coefficients / self.std_errors

    def aic(self) -> float:
        """Gaussian AIC up to an additive constant shared by all fits on the same sample."""
        n = self.n_obs
        return n * np.log(self.rss / n) + 2 * self.n_params


def _qr(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, k = X.shape
    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    tol = max(n, k) * np.finfo(float).eps * (diag.max() if k else 0.0)
    if k and (diag.max() == 0 or np.any(diag <= tol)):
        raise SingularDesignError(f"design matrix is rank deficient ({n}x{k})")
    return Q, R


def ols(y, X) -> RegressionFit:
    """Least-squares fit of ``y`` on the columns of ``X``.

    Raises :class:`SingularDesignError` when ``X`` lacks full column rank.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if n != len(y):
        raise ValidationError(f"{len(y)} observations but design has {n} rows")
    if n <= k:
        raise ValidationError(f"need more observations ({n}) than parameters ({k})")
    Q, R = _qr(X)
    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    Rinv = np.linalg.solve(R, np.eye(k))
    cov_unscaled = Rinv @ Rinv.T
    se = np.sqrt(np.diag(cov_unscaled) * rss / (n - k))
    return RegressionFit(beta, resid, rss, n, k, se)


def multi_residuals(Y: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Residuals of every column of ``Y`` regressed on ``X`` (one QR shared)."""
    Q, _ = _qr(np.asarray(X, dtype=float))
    return Y - Q @ (Q.T @ Y)
