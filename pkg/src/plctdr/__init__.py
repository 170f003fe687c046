"""Pulse-compression time-domain reflectometry over power distribution networks.

Submodules:
    pulses        HS-OFDM, UWB-1, UWB-2 and CSS pulses; bandwidth/duration maps.
    autocorr      closed-form and numeric autocorrelation functions.
    metrics       resolution, PCR, PSLR, ISLR, unambiguous range.
    channel       transmission-line network model and reflection channel.
    reflectometry echo simulation, pulse compression, fault location.
    scenarios     regulatory bands, cable presets, table reproduction, sweeps.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AcfDomainError,
    AliasingError,
    AxisMismatchError,
    ChannelError,
    NegativeRangeError,
    NoZeroCrossingError,
    NumericalGuardError,
    PulseSpecError,
    TDRError,
    UndersamplingError,
)
from .signals import SampledSignal  # noqa: F401
