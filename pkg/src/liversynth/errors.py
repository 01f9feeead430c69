"""Exception hierarchy shared by all pipeline stages."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class DecodeError(PipelineError):
    """Input file is not a PNG we can read (bad magic, unsupported color type)."""


class ImageTooSmallError(PipelineError):
    """Image is below the minimum size required by an operation."""


class DimensionMismatchError(PipelineError):
    """Two rasters that must share dimensions do not."""


class EmptyMaskError(PipelineError):
    """A mask that must contain foreground pixels is all background."""


class EmptyResultError(PipelineError):
    """A geometric transform pushed every foreground pixel out of frame."""


class EmptyTumorError(PipelineError):
    """Tumor/liver intersection is empty; the caller must resample."""


class ConstraintUnsatisfiableError(PipelineError):
    """Rejection sampling exhausted its attempt budget."""


class TooFewSamplesError(PipelineError):
    """Covariance estimation needs at least two samples."""


class NotPSDError(PipelineError):
    """A covariance matrix has an eigenvalue below the PSD tolerance."""


class EmbeddingFormatError(PipelineError):
    """EMB1 file is truncated, has bad magic, or an inconsistent header."""


class ParseError(PipelineError):
    """Malformed manifest, config, or metadata file."""


class ValidationError(PipelineError):
    """A manifest record fails its invariants (missing file, empty mask, ...)."""


class PlanInfeasibleError(PipelineError):
    """M * S * P is too small for the requested number of synthetic cases."""


class MixedInputError(PipelineError):
    """The two embedding inputs to the FID command have different dimensions."""
