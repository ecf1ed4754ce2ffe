#!/usr/bin/env python3
"""
Exception types for the rb-lab application.
"""


class RBError(Exception):
    """Base class for all errors raised by rb-lab."""


class NonFiniteFieldError(RBError, ValueError):
    """A field contains NaN or infinite samples."""


class SymmetryError(RBError, ValueError):
    """A spectral field violates Hermitian symmetry."""

    def __init__(self, mode: tuple, deviation: float):
        """
        Args:
            mode (tuple): Integer wavenumber (k1, k2) with the largest violation
            deviation (float): Size of the violation relative to the field scale
        """
        self.mode = mode
        self.deviation = deviation
        super().__init__(
            f"Hermitian symmetry violated at mode k={mode} (relative deviation {deviation:.3e})"
        )


class MeanModeError(RBError, ValueError):
    """A field has a nonzero mean where a mean-zero field is required."""


class ConfigError(RBError, ValueError):
    """Invalid configuration, parameter combination or index range."""


class WindowError(RBError, ValueError):
    """A diagnostic window is too short or not uniformly spaced."""


class BlowUpError(RBError):
    """The integrator produced a non-finite state."""

    def __init__(self, t: float, last_good_state, message: str = ""):
        """
        Args:
            t (float): Simulation time at which the blow-up was detected
            last_good_state: The last SolverState whose coefficients were all finite
            message (str): Optional extra detail
        """
        self.t = t
        self.last_good_state = last_good_state
        detail = f": {message}" if message else ""
        super().__init__(f"blow-up detected at t={t:.6g}{detail}")
