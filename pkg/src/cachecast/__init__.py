"""Cache-aided multi-antenna content delivery: simulation and asymptotics.

Core objects: a `SystemConfig` scenario, seeded `RngStream`s, Monte-Carlo
rate estimators for multicasting / user selection / zero-forcing
multiplexing / mixed delivery, and their large-system closed forms.
"""

from .caching import (
    CacheLoad,
    delivery_rate_multicast,
    delivery_rate_selection,
    delivery_rate_unicast,
    transmissions,
)
from .channel import (
    ChannelDraw,
    RngStream,
    SystemConfig,
    draw_channel,
    exact_min_mean,
    min_norm_statistic,
    per_user_snr,
)
from .mixed import (
    MixedRates,
    PowerSplit,
    SplitOptimum,
    mixed_rates_asymptotic,
    mixed_rates_mc,
    optimal_split_closed_form,
    optimal_split_numeric,
    regime_map,
)
from .multicast import (
    AsymptoticRate,
    asymptotic_rate,
    avg_rate_parallel,
    avg_rate_quasistatic,
    extreme_value_scale,
    parallel_rate_bounds,
)
from .multiplex import (
    ZfPrecoder,
    build_zf_precoder,
    symmetric_rate_asymptotic,
    symmetric_rate_mc,
    symmetric_rate_surrogate,
)
from .results import RateEstimate
from .selection import (
    empirical_optimal_threshold,
    optimal_threshold_general,
    optimal_threshold_rayleigh,
    simulated_selection_rate,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticRate",
    "CacheLoad",
    "ChannelDraw",
    "MixedRates",
    "PowerSplit",
    "RateEstimate",
    "RngStream",
    "SplitOptimum",
    "SystemConfig",
    "ZfPrecoder",
    "asymptotic_rate",
    "avg_rate_parallel",
    "avg_rate_quasistatic",
    "build_zf_precoder",
    "delivery_rate_multicast",
    "delivery_rate_selection",
    "delivery_rate_unicast",
    "draw_channel",
    "empirical_optimal_threshold",
    "exact_min_mean",
    "extreme_value_scale",
    "min_norm_statistic",
    "mixed_rates_asymptotic",
    "mixed_rates_mc",
    "optimal_split_closed_form",
    "optimal_split_numeric",
    "optimal_threshold_general",
    "optimal_threshold_rayleigh",
    "parallel_rate_bounds",
    "per_user_snr",
    "regime_map",
    "simulated_selection_rate",
    "symmetric_rate_asymptotic",
    "symmetric_rate_mc",
    "symmetric_rate_surrogate",
    "transmissions",
    "__version__",
]
