"""Exception types shared across the package."""


class CovbaiError(Exception):
    """Base class for all covbai errors."""


class AmbiguousOptimum(CovbaiError):
    """The maximal mean is attained by more than one arm."""


class InsufficientData(CovbaiError):
    """An estimator or radius was requested before enough rounds were observed."""


class MissingArm(CovbaiError):
    """A joint update did not cover exactly the tracked arm set."""


class BadWeights(CovbaiError):
    """A weight vector leaves the probability simplex (or its allowed support)."""


class BadConfig(CovbaiError):
    """An algorithm or benchmark configuration is invalid."""


class BadDelta(CovbaiError):
    """A confidence parameter is outside its admissible range."""


class BadRho(CovbaiError):
    """Equicorrelation parameter outside [0, 1)."""


class BadClusterCount(CovbaiError):
    """Cluster count does not evenly partition the arm set."""


class InfeasibleInstance(CovbaiError):
    """Requested means/difference-variances violate the Bernoulli feasibility range."""


class MissingVariance(CovbaiError):
    """A known-variance baseline was run without per-arm variances."""


class NumericalIntegrity(CovbaiError):
    """An internal quantity fell outside its numerically plausible range."""
