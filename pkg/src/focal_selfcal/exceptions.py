"""Exception types shared across the toolkit."""


class FocalSelfCalError(Exception):
    """Base class for all toolkit errors."""


class RankDeficient(FocalSelfCalError):
    """Input matrix is (numerically) rank 1 or worse; no epipolar geometry."""


class CheiralityAmbiguous(FocalSelfCalError):
    """No pose candidate places any point in front of both cameras."""


class DegenerateFormula(FocalSelfCalError):
    """Closed-form focal extraction hit its generic singularity."""


class NoRealFocal(FocalSelfCalError):
    """Equal-focal closed form found no real positive squared focal."""


class NoRealSolution(FocalSelfCalError):
    """Polynomial system has no real common root."""


class SolverFailure(FocalSelfCalError):
    """Elimination step was numerically rank-deficient."""


class InvalidPrior(FocalSelfCalError):
    """Prior configuration is unusable (e.g. nonpositive focal prior)."""


class DegenerateSample(FocalSelfCalError):
    """Minimal/linear solver sample is rank deficient."""


class TooFewPoints(FocalSelfCalError):
    """Not enough correspondences for the requested estimator."""


class NoModelFound(FocalSelfCalError):
    """RANSAC exhausted its budget without a single acceptable model."""


class FrustumEmpty(FocalSelfCalError):
    """Scene generator could not sample enough mutually visible points."""
