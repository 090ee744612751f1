"""Alpha as a Brownian bridge: simulation, local time, crash hedges."""

from .paths import (
    BridgeSpec,
    GbmParams,
    SamplePath,
    SingularityError,
    TimeGrid,
    dds_clock,
    dds_inverse,
    doob_transform_bridge,
    sample_bridge_paper_sde,
    sample_bridge_pinned,
    sample_brownian,
    sample_gbm,
)
from .rng import SeedRecord, substream

__version__ = "0.1.0"

__all__ = [
    "BridgeSpec",
    "GbmParams",
    "SamplePath",
    "SeedRecord",
    "SingularityError",
    "TimeGrid",
    "__version__",
    "dds_clock",
    "dds_inverse",
    "doob_transform_bridge",
    "sample_bridge_paper_sde",
    "sample_bridge_pinned",
    "sample_brownian",
    "sample_gbm",
    "substream",
]
