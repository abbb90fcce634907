"""Expert aggregation for long-horizon time-series forecasting.

Square-loss aggregation of expert forecast streams under delayed feedback,
online smoothing regression over sliding-window ridge experts, and the
regret accounting that verifies both engines' guarantees numerically.
"""

from .core import (
    ConfigurationError,
    DimensionError,
    DomainError,
    InfiniteDivergenceError,
    LossSpec,
    StateError,
    SubstitutionCheck,
    exp_weight_update,
    relative_entropy,
    square_loss,
    subst_mean,
    subst_vovk,
    substitute,
    superprediction,
    verify_substitution,
)
from .datasets import (
    SwitchingDataset,
    SwitchingDatasetConfig,
    generate_switching_dataset,
)
from .experiments import (
    LongTermScenario,
    SweepRunSpec,
    default_longterm_sweep,
    default_regression_sweep,
    run_bound_sweep,
    run_longterm_scenario,
    run_switching_experiment,
    write_figure_csv,
    write_sweep_csv,
)
from .longterm import (
    ExpertForecastStream,
    LongTermAggregator,
    confidence_weighted_normalization,
    delayed_weight_update,
)
from .regression import OnlineSmoothingRegressor, RegressionExpert, ridge_fit
from .regret import (
    RegretLedger,
    discounted_excess,
    expert_birth_bound,
    longterm_regret_bound,
    mixloss,
    regression_regret_bound,
    verify_delayed_regret_bound,
    verify_mixloss_identity,
    windowed_average_regret,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DimensionError",
    "DomainError",
    "ExpertForecastStream",
    "InfiniteDivergenceError",
    "LongTermAggregator",
    "LongTermScenario",
    "LossSpec",
    "OnlineSmoothingRegressor",
    "RegressionExpert",
    "RegretLedger",
    "StateError",
    "SubstitutionCheck",
    "SweepRunSpec",
    "SwitchingDataset",
    "SwitchingDatasetConfig",
    "confidence_weighted_normalization",
    "default_longterm_sweep",
    "default_regression_sweep",
    "delayed_weight_update",
    "discounted_excess",
    "exp_weight_update",
    "expert_birth_bound",
    "generate_switching_dataset",
    "longterm_regret_bound",
    "mixloss",
    "regression_regret_bound",
    "relative_entropy",
    "ridge_fit",
    "run_bound_sweep",
    "run_longterm_scenario",
    "run_switching_experiment",
    "square_loss",
    "subst_mean",
    "subst_vovk",
    "substitute",
    "superprediction",
    "verify_delayed_regret_bound",
    "verify_mixloss_identity",
    "verify_substitution",
    "windowed_average_regret",
    "write_figure_csv",
    "write_sweep_csv",
]
