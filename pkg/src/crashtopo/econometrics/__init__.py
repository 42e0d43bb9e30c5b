from crashtopo.econometrics.granger import (
    GrangerResult,
    default_max_lag,
    f_sf,
    fpe_select,
    fpe_values,
    granger_test,
)
from crashtopo.econometrics.regression import RegressionFit, ols
from crashtopo.econometrics.unitroot import (
    StationarySeries,
    UnitRootResult,
    adf_test,
    difference,
    ensure_stationary,
    mackinnon_pvalue,
    newey_west_bandwidth,
    pp_test,
    schwert_max_lag,
)

__all__ = [
    "GrangerResult",
    "RegressionFit",
    "StationarySeries",
    "UnitRootResult",
    "adf_test",
    "default_max_lag",
    "difference",
    "ensure_stationary",
    "f_sf",
    "fpe_select",
    "fpe_values",
    "granger_test",
    "mackinnon_pvalue",
    "newey_west_bandwidth",
    "ols",
    "pp_test",
    "schwert_max_lag",
]
