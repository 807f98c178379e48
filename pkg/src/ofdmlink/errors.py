"""Exception types shared across the simulator."""


class SimError(ValueError):
    """Base class for all simulator errors."""


class ConfigurationError(SimError):
    """Invalid parameter or configuration file entry."""


class FramingError(SimError):
    """Input length does not match the expected frame structure."""


class SingularChannelError(SimError):
    """Zero-forcing attempted on a (near-)zero channel coefficient."""

    def __init__(self, bin_index, magnitude):
        self.bin_index = bin_index
        self.magnitude = magnitude
        super().__init__(
            f"channel response on bin {bin_index} has magnitude {magnitude:.3e}; "
            "cannot zero-force"
        )


class DivergenceError(SimError):
    """Adaptive filter weights blew up."""

    def __init__(self, step, step_size, detail=""):
        self.step = step
        self.step_size = step_size
        msg = f"LMS diverged at update {step} with step size {step_size}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
