"""Simulation and analysis toolkit for the fake news game.

A transmitter publishes true or false stories and conditions its next story on
the engagement the previous one received; receivers decide whether to engage.
"""

from fakenews.errors import (
    ArgumentError,
    DataError,
    DegenerateParameterizationError,
    DegenerateStrategyError,
    InvalidStrategyError,
)
from fakenews.game import (
    PayoffConfig,
    ReceiverStrategy,
    StationaryDistribution,
    TransmitterStrategy,
    engage_prob,
    enforced_fake_rate,
    receiver_payoff,
    transmit_prob,
    transmitter_payoff,
    validate_strategy,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "DataError",
    "DegenerateParameterizationError",
    "DegenerateStrategyError",
    "InvalidStrategyError",
    "PayoffConfig",
    "ReceiverStrategy",
    "StationaryDistribution",
    "TransmitterStrategy",
    "engage_prob",
    "enforced_fake_rate",
    "receiver_payoff",
    "transmit_prob",
    "transmitter_payoff",
    "validate_strategy",
]
