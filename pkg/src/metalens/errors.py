"""Exception hierarchy shared by all metalens modules."""


class MetalensError(Exception):
    """Base class for every error raised by this package."""


class SceneError(MetalensError, ValueError):
    """The problem geometry violates a structural constraint."""


class EmptyBisector(MetalensError):
    """The equal-cost set of two targets is empty over the whole plane."""


class OutsideDomain(MetalensError, ValueError):
    """A point passed to a domain-restricted operation lies outside the aperture."""


class LiftConditionViolated(MetalensError):
    """Two weights are too far apart for the power-diagram lifting to apply."""

    def __init__(self, pairs):
        self.pairs = list(pairs)
        i, j = self.pairs[0]
        super().__init__(
            f"|b_i - b_j| too large for {len(self.pairs)} pair(s), first ({i}, {j})"
        )


class DegenerateGradient(MetalensError):
    """Cost gradients of two targets (nearly) coincide on a shared arc."""


class InfeasibleStart(MetalensError):
    """The initial weights leave at least one cell without mass."""


class ProjectionOutsideDomain(MetalensError):
    """Zero weights cannot be used because some targets project outside the aperture."""

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(f"target projections outside the domain: {self.indices}")


class SingularSystem(MetalensError):
    """The Newton system restricted to the zero-sum subspace is singular."""


class StepFailure(MetalensError):
    """No admissible step length was found by the damped line search."""


class ParallelDirections(MetalensError):
    """Two far-field directions share the same in-plane projection."""


class ConfigError(MetalensError, ValueError):
    """A run configuration is malformed."""
