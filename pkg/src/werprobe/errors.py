"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes: ConfigError -> 2,
FormatError -> 3, DataError -> 4, NumericError -> 5.
"""


class WerprobeError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(WerprobeError):
    """Invalid configuration value or combination."""


class ShapeError(ConfigError):
    """Tensor shapes do not conform to an operation's contract."""


class WindowError(ConfigError):
    """Pooling or convolution window larger than the input extent."""


class FormatError(WerprobeError):
    """Malformed or unreadable on-disk artifact."""


class VersionError(FormatError):
    """Artifact written by an unsupported format version."""


class DataError(WerprobeError):
    """Problem with data contents rather than configuration."""


class LabelError(DataError):
    """Label or class index outside the expected set."""


class VocabularyError(DataError):
    """Token index outside the vocabulary."""


class EmptyBatchError(DataError):
    """An operation that needs at least one item received none."""


class BalanceError(DataError):
    """Balanced subset construction is infeasible."""


class AlignmentError(DataError):
    """Per-utterance records from different sources do not line up."""


class NumericError(WerprobeError):
    """Non-finite values where finite ones are required."""
