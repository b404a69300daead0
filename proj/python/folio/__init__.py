"""Portfolio management toolkit: wavelet denoising, minimum-variance asset
selection, a trading environment and learned allocation agents."""

from ._core import (
    ConfigError,
    DataError,
    EnvConfig,
    NumericalError,
    PortfolioEnv,
    PriceSeries,
    baseline_action,
    binomial,
    decompose,
    default_config,
    denoise,
    max_drawdown,
    min_variance_weights,
    normalize_config,
    round_trip,
    run_compare,
    select_subset,
    sharpe,
    soft_shrink,
    universal_threshold,
)

__all__ = [
    "ConfigError",
    "DataError",
    "EnvConfig",
    "NumericalError",
    "PortfolioEnv",
    "PriceSeries",
    "baseline_action",
    "binomial",
    "decompose",
    "default_config",
    "denoise",
    "max_drawdown",
    "min_variance_weights",
    "normalize_config",
    "round_trip",
    "run_compare",
    "select_subset",
    "sharpe",
    "soft_shrink",
    "universal_threshold",
]
