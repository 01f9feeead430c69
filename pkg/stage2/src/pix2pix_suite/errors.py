class SuiteError(Exception):
    """Base class for stage-2 errors."""


class EmptyDatasetError(SuiteError):
    pass


class ShapeMismatchError(SuiteError):
    """Input raster has the wrong size or an invalid conditioning alphabet."""


class MissingCheckpointError(SuiteError):
    pass


class EmptyDirectoryError(SuiteError):
    pass
