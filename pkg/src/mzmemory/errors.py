"""Exception types shared across the package."""


class DegeneratePath(ValueError):
    """Conditional dynamics requested on an exit path with vanishing probability."""


class NonPhysical(ValueError):
    """A density matrix violates Hermiticity, unit trace, or positivity."""


class EmptyTrajectory(ValueError):
    """A trajectory with fewer than two samples cannot be analyzed."""


class RedrawExhausted(RuntimeError):
    """Noise redraw cap hit; the noise width is too large for the given state."""


class FitDiverged(RuntimeError):
    """Least-squares refinement ran into the search bracket boundary."""


class GridUnderresolved(RuntimeError):
    """Frequency-grid refinement did not converge to the requested tolerance."""


class EnsembleFailure(RuntimeError):
    """More than half of the Monte-Carlo repetitions failed."""
