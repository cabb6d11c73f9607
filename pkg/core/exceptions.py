"""
Error hierarchy for the NuMIT library
"""


class NumitError(Exception):
    """Base class for every error raised by this package"""


class ConfigError(NumitError):
    """Configuration could not be parsed or failed validation"""


class DataFormatError(NumitError):
    """An input data file does not follow the expected layout"""


class NonFiniteData(NumitError):
    """Input values contain NaN or infinity"""


class SampleRejected(NumitError):
    """A draw that the null-ensemble builder may discard and resample"""


# Covariance algebra

class CholeskyFailure(SampleRejected):
    """Matrix is not positive definite, even after one jitter retry"""


class OverlappingIndexSets(NumitError, ValueError):
    pass


class EmptyIndexSet(NumitError, ValueError):
    pass


class NegativeInformation(NumitError):
    """A mutual information came out below the rounding tolerance"""


# PID

class InconsistentInformation(NumitError):
    """Total MI is smaller than a marginal MI beyond tolerance"""


class ZeroTmi(NumitError):
    """Normalisation requested for a system that carries no information"""


# Null models and root finding

class ZeroChannel(SampleRejected):
    """The source-to-target map carries no signal, no gain reaches the target"""


class BracketFailure(SampleRejected):
    """Root bracket could not be established within the expansion cap"""


class TargetUnreachable(SampleRejected):
    """The target TMI lies outside the range the tuning parameter can reach"""


class ZeroDynamics(SampleRejected):
    """VAR coefficient draw has zero spectral radius"""


class SamplingExhausted(NumitError):
    """A null sample kept failing after its whole retry budget"""


class EmptyEnsemble(NumitError, ValueError):
    pass


# VAR

class UnstableSystem(SampleRejected):
    """Spectral radius at or above the stability boundary"""


class RankDeficientRegressors(NumitError):
    pass


class TooShortEpoch(NumitError):
    pass


class TooFewVariables(NumitError):
    pass


# Statistics

class DegenerateDesign(NumitError):
    """Regression design is rank deficient or has a constant predictor"""


class LengthMismatch(NumitError, ValueError):
    pass


class TooFewSamples(NumitError):
    pass
