"""Exception types raised across the package."""


class OcrCorrectError(Exception):
    """Base class for every error raised by ocrcorrect."""


class ConfigError(OcrCorrectError):
    """Missing or invalid configuration (files, thresholds, probabilities)."""


class NgramParseError(OcrCorrectError):
    """A malformed line in an n-gram count file."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {message}")


class SchemaError(OcrCorrectError):
    """Input data does not match the requested n-gram order."""


class UsageError(OcrCorrectError, ValueError):
    """A function was called with arguments outside its contract."""


class ScoringError(OcrCorrectError, ValueError):
    """A feature scorer received input it cannot score."""


class TrainingDataError(OcrCorrectError):
    """The training set is unusable (e.g. no positive rows)."""


class ModelFormatError(OcrCorrectError):
    """A serialized model could not be loaded."""


class CountOverflowError(OcrCorrectError, OverflowError):
    """Summed n-gram counts no longer fit in 64 unsigned bits."""
