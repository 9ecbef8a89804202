"""Three-slot physical-layer network coding with embedded linear channel equalisation."""

from .core import (
    AmplitudeOrder,
    ChannelPair,
    DegenerateChannel,
    DomainError,
    NonPositive,
    OutOfRange,
    SchemeConfig,
    SymbolFrame,
    snr_db_to_sigma2,
    validate_config,
)
from .analysis import end_to_end_ber, relay_error_probabilities, downlink_ber
from .sim import Stopping, run_point, sweep

__version__ = "0.1.0"
