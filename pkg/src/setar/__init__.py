"""Global time-series forecasting with threshold autoregressive trees.

A collection of series is pooled into one lag-embedded design matrix; a
binary tree splits rows on (lag value, threshold) pairs and fits one
pooled linear autoregression per leaf. A bagged forest of randomized
trees averages their recursive forecasts.
"""

from .data import (
    CovariateSpec,
    EmbeddedMatrix,
    ForecastMatrix,
    InstanceRow,
    Series,
    SeriesCollection,
    build_covariate_specs,
    create_input_matrix,
    create_test_set,
    encode_covariates,
    update_test_set,
)
from .forest import ForestConfig, SetarForest, forecast_forest, train_forest
from .linalg import (
    InnerProducts,
    LinearFit,
    accumulate,
    fit_from_inner_products,
    fit_least_squares,
    right_complement,
)
from .metrics import EvaluationReport, evaluate, heuristic_lags, mase, msmape
from .serialize import load_model, save_model
from .simulate import (
    ChaoticLogisticConfig,
    MackeyGlassConfig,
    Setar2Config,
    gen_chaotic_logistic,
    gen_mackey_glass,
    gen_setar2,
    generate,
)
from .split import SplitDecision, ThresholdGrid, get_opt_params, make_threshold_grid, split_node
from .stopping import (
    FTestResult,
    StoppingConfig,
    alpha_at_depth,
    check_error_reduction,
    check_linearity,
    is_good_split,
)
from .tree import (
    LeafModel,
    SetarTree,
    find_leaf,
    forecast,
    predict_leaf,
    train_pr_model,
    train_tree,
)

__version__ = "0.1.0"

__all__ = [
    "ChaoticLogisticConfig",
    "CovariateSpec",
    "EmbeddedMatrix",
    "EvaluationReport",
    "ForecastMatrix",
    "ForestConfig",
    "FTestResult",
    "InnerProducts",
    "InstanceRow",
    "LeafModel",
    "LinearFit",
    "MackeyGlassConfig",
    "Series",
    "SeriesCollection",
    "Setar2Config",
    "SetarForest",
    "SetarTree",
    "SplitDecision",
    "StoppingConfig",
    "ThresholdGrid",
    "accumulate",
    "alpha_at_depth",
    "build_covariate_specs",
    "check_error_reduction",
    "check_linearity",
    "create_input_matrix",
    "create_test_set",
    "encode_covariates",
    "evaluate",
    "find_leaf",
    "fit_from_inner_products",
    "fit_least_squares",
    "forecast",
    "forecast_forest",
    "gen_chaotic_logistic",
    "gen_mackey_glass",
    "gen_setar2",
    "generate",
    "get_opt_params",
    "heuristic_lags",
    "is_good_split",
    "load_model",
    "make_threshold_grid",
    "mase",
    "msmape",
    "predict_leaf",
    "right_complement",
    "save_model",
    "split_node",
    "train_forest",
    "train_pr_model",
    "train_tree",
    "update_test_set",
]
