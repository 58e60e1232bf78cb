"""Exception types shared across the package."""


class CatloopError(Exception):
    """Base class for package errors."""


class TruncationError(CatloopError):
    """A state does not fit in the requested Fock cutoff within tolerance."""

    def __init__(self, deficit, tolerance, message=None):
        self.deficit = float(deficit)
        self.tolerance = float(tolerance)
        super().__init__(
            message or f"truncated-norm deficit {deficit:.3e} exceeds tolerance {tolerance:.3e}"
        )


class ZeroProbabilityError(CatloopError):
    """A projective outcome has (numerically) zero probability; do not renormalize."""


class ZeroNormError(CatloopError):
    """A state construction produced the zero vector (e.g. odd cat at alpha=0)."""


class ConfigError(CatloopError):
    """Invalid configuration or descriptor."""
