"""Exception types shared across the toolkit.

Each class carries a short machine-readable ``kind`` used in reject records
and service error payloads.
"""


class SegkitError(Exception):
    kind = "error"


class InvalidTranscriptError(SegkitError):
    kind = "invalid-transcript"


class DimensionMismatchError(SegkitError):
    kind = "dimension-mismatch"


class InfeasibleAlignmentError(SegkitError):
    kind = "infeasible-alignment"


class DegenerateInputError(SegkitError):
    kind = "degenerate-input"


class MissingWordError(SegkitError):
    kind = "missing-word"


class ConfigurationError(SegkitError):
    kind = "configuration"


class ParameterError(SegkitError):
    kind = "parameter"


class IncompatiblePairError(SegkitError):
    kind = "incompatible-pair"


class FormatError(SegkitError):
    kind = "format"


class TruncationError(FormatError):
    kind = "truncation"


class UnsupportedAudioError(SegkitError):
    kind = "unsupported-audio"


class InvalidDistributionError(SegkitError):
    kind = "invalid-distribution"


class UndefinedMetricError(SegkitError):
    kind = "undefined-metric"


class ManifestError(SegkitError):
    kind = "manifest"


class MissingInputError(SegkitError):
    kind = "missing-input"
