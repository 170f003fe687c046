"""Exception hierarchy.

Everything raised on purpose by the toolkit derives from :class:`TDRError`.
Validation problems also derive from :class:`ValueError`; numerical guards
(aliasing, singular evaluations) derive from :class:`NumericalGuardError` so
the CLI can map them to their own exit code.
"""


class TDRError(Exception):
    """Base class for toolkit errors."""


class PulseSpecError(TDRError, ValueError):
    """A pulse description violates a family constraint.

    Attributes:
        field: name of the offending field.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class UndersamplingError(TDRError, ValueError):
    def __init__(self, sample_rate, minimum):
        self.sample_rate = sample_rate
        self.minimum = minimum
        super().__init__(
            f"sample rate {sample_rate:.6g} Hz is below the required minimum "
            f"of {minimum:.6g} Hz"
        )


class AcfDomainError(TDRError, ValueError):
    """Lag outside the support of a closed-form autocorrelation."""


class NoZeroCrossingError(TDRError, ValueError):
    """The autocorrelation does not change sign in the searched interval."""


class NegativeRangeError(TDRError, ValueError):
    """Pulse repetition interval shorter than the pulse itself."""


class SidelobeRegionError(TDRError, ValueError):
    """No samples beyond the main lobe to measure sidelobes on."""


class ChannelError(TDRError, ValueError):
    """Invalid network description or degenerate impedance combination."""


class AxisMismatchError(TDRError, ValueError):
    """Reflectograms or signals that must share an axis do not."""


class NumericalGuardError(TDRError):
    """A numerical guard tripped (aliasing, singular evaluation)."""


class AliasingError(NumericalGuardError):
    def __init__(self, delay, window, required_spacing):
        self.delay = delay
        self.window = window
        self.required_spacing = required_spacing
        super().__init__(
            f"expected echo delay {delay:.6g} s exceeds the time window "
            f"{window:.6g} s of the frequency grid; use a grid spacing of at "
            f"most {required_spacing:.6g} Hz"
        )
