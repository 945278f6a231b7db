"""Exception types shared across the package."""


class FcqemError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(FcqemError, ValueError):
    """Operands act on different numbers of qubits."""


class CapacityError(FcqemError):
    """Requested system size exceeds the dense-simulation thresholds."""


class DegenerateInputError(FcqemError):
    """Input is degenerate for the requested operation (e.g. an all-zero
    distribution, or a corrector denominator at or below the zero guard)."""


class MissingMeasurementError(FcqemError):
    """A required measurement basis is absent from the supplied data."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(
            "missing measurement bases: " + ", ".join(self.missing)
        )


class ParseError(FcqemError, ValueError):
    """Malformed input file; the message names the offending location."""


class InternalConsistencyError(FcqemError):
    """A computation produced a result that violates an internal invariant
    (e.g. a non-negligible imaginary weight in a Hermitian product)."""


class PreconditionError(FcqemError, ValueError):
    """A documented operation precondition does not hold for the inputs."""
