"""Exception types raised across the pipeline.

Every error derives from :class:`PipelineError` so the CLI can turn any of
them into a one-line diagnostic and a nonzero exit code.
"""


class PipelineError(Exception):
    """Base class for all pipeline failures."""


# ingest
class SchemaError(PipelineError):
    """A CSV header column could not be bound to a channel."""


class ParseError(PipelineError):
    """A cell could not be read; carries its 1-based row and column name."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class LabelError(PipelineError):
    pass


class IntegrityError(PipelineError):
    """Frames violate the recording/label/timing invariants."""


class DegenerateVectorError(PipelineError):
    pass


# feature extraction
class WindowTooShortError(PipelineError):
    pass


class TimeOrderError(PipelineError):
    pass


# selection
class ClassCoverageError(PipelineError):
    pass


class InsufficientClassesError(PipelineError):
    pass


class SelectionEmptyError(PipelineError):
    pass


class BoundsError(PipelineError):
    pass


class SelectionBoundsError(BoundsError):
    pass


# classification
class DegenerateTrainingError(PipelineError):
    pass


class ShapeError(PipelineError):
    pass


class StratificationError(PipelineError):
    pass


class ModelFormatError(PipelineError):
    pass
