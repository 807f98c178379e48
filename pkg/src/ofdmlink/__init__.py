"""OFDM link-level simulator with LMS adaptive equalization."""

from . import channel, equalizer, fec, modem, numerics, ofdm, simcli
from .errors import (ConfigurationError, DivergenceError, FramingError,
                     SimError, SingularChannelError)

__version__ = "0.1.0"

__all__ = [
    "channel", "equalizer", "fec", "modem", "numerics", "ofdm", "simcli",
    "SimError", "ConfigurationError", "FramingError", "SingularChannelError",
    "DivergenceError",
]
