"""Exception and warning types shared across the toolkit."""


class SobikitError(Exception):
    """Base class for all toolkit errors."""


class NotSymmetricError(SobikitError):
    """Input matrix is not symmetric within the required tolerance."""


class ConvergenceError(SobikitError):
    """An iterative kernel failed to converge within its sweep/iteration budget."""


class LagTooLargeError(SobikitError):
    """Requested covariance lag is too large for the recording length."""


class DegenerateDataError(SobikitError):
    """Data carries no variance; whitening is undefined."""


class InvalidSpecError(SobikitError):
    """A synthetic source specification violates its constraints."""


class RankDeficientMixingError(SobikitError):
    """Mixing matrix is rank deficient or too ill conditioned."""


class SignalTooShortError(SobikitError):
    """Signal is too short for the requested spectral estimate."""


class EmptySignalError(SobikitError):
    """Operation requires a nonempty signal."""


class ZeroReferenceError(SobikitError):
    """ERD/ERS percentage needs a strictly positive reference power."""


class EpochTooShortError(SobikitError):
    """Feature extraction requires at least one second of samples."""


class SingleClassError(SobikitError):
    """Classifier training requires examples from both classes."""


class DimensionMismatchError(SobikitError):
    """Vector length does not match the model dimension."""


class TooFewSamplesError(SobikitError):
    """Cross-validation fold count exceeds the number of samples."""


class RecordingParseError(SobikitError):
    """A recording file failed to parse; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class MissingSidecarError(SobikitError):
    """A recording CSV has no <name>.meta.json sidecar."""


class PipelineStageError(SobikitError):
    """Wraps a failure with the name of the pipeline stage it occurred in."""

    def __init__(self, stage, cause):
        super().__init__(f"pipeline stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause


class UnidentifiableWarning(UserWarning):
    """Two or more sources share lagged-correlation spectra; their rotation is arbitrary."""


class DegenerateCombinationWarning(UserWarning):
    """The weighted covariance combination has a (near-)repeated eigenvalue."""


class NoConvergenceWarning(UserWarning):
    """A best-effort result was returned after the iteration budget ran out."""
