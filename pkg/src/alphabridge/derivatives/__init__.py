from .barrier import (
    AlreadyKnockedIn,
    BarrierOptionSpec,
    barrier_payoff,
    down_and_in_put_price,
    down_and_out_put_price,
    mc_down_and_in_put,
    vanilla_put_price,
)
from .swaption import (
    NonPositiveForward,
    SwaptionInputs,
    SwaptionPrices,
    estimate_floating_forward,
    swaption_prices,
)
from .systemic import (
    MarketScenario,
    asset_jump_price,
    event_swap_return,
    scenario_classify,
    systemic_alpha_residual,
)

__all__ = [
    "AlreadyKnockedIn",
    "BarrierOptionSpec",
    "MarketScenario",
    "NonPositiveForward",
    "SwaptionInputs",
    "SwaptionPrices",
    "asset_jump_price",
    "barrier_payoff",
    "down_and_in_put_price",
    "down_and_out_put_price",
    "estimate_floating_forward",
    "event_swap_return",
    "mc_down_and_in_put",
    "scenario_classify",
    "swaption_prices",
    "systemic_alpha_residual",
    "vanilla_put_price",
]
