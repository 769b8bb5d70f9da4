"""Exception types raised by the simulator."""


class SlitVLCError(Exception):
    """Base class for all simulator errors."""


class DomainError(SlitVLCError, ValueError):
    """Argument outside the domain of a special function."""


class GeometryError(SlitVLCError, ValueError):
    """Source, link or receiver geometry violates an invariant."""


class FarZoneError(SlitVLCError, ValueError):
    """Far-field formula requested too close to the emitter."""


class BeamwidthSaturationError(SlitVLCError, ValueError):
    """Main lobe fills the half-space; the beamwidth formula has no solution."""


class UnsupportedRegimeError(SlitVLCError, ValueError):
    """Parameters fall outside the regime a formula is valid for."""


class QuadratureError(SlitVLCError, ArithmeticError):
    """Adaptive quadrature hit its depth limit without converging.

    The best available estimate and its error bound are kept on the
    instance so callers can decide whether to use them anyway.
    """

    def __init__(self, message, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ConfigError(SlitVLCError, ValueError):
    """Run configuration or sweep specification is invalid.

    ``problems`` lists every violation found, not just the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
