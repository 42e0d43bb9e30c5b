"""Crash detection from multivariate price series with 0-dimensional
persistent homology, plus Granger-causality analysis of the resulting
Wasserstein-distance series."""

from crashtopo.errors import (
    AlignmentError,
    CoverageError,
    CrashtopoError,
    DegenerateRegressionError,
    FetchError,
    InsufficientDataError,
    ParseError,
    SingularDesignError,
    ValidationError,
)
from crashtopo.market_data import (
    PointCloud,
    PriceMatrix,
    PriceTable,
    ReturnMatrix,
    align,
    fetch_prices,
    load_price_csv,
    log_returns,
    point_cloud,
)
from crashtopo.persistence import PersistenceDiagram, cloud_diagram, h0_persistence, pairwise_distances
from crashtopo.wasserstein import Matching, optimal_matching, wd_between, wd_to_diagonal

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "CoverageError",
    "CrashtopoError",
    "DegenerateRegressionError",
    "FetchError",
    "InsufficientDataError",
    "Matching",
    "ParseError",
    "PersistenceDiagram",
    "PointCloud",
    "PriceMatrix",
    "PriceTable",
    "ReturnMatrix",
    "SingularDesignError",
    "ValidationError",
    "align",
    "cloud_diagram",
    "fetch_prices",
    "h0_persistence",
    "load_price_csv",
    "log_returns",
    "optimal_matching",
    "pairwise_distances",
    "point_cloud",
    "wd_between",
    "wd_to_diagonal",
]
