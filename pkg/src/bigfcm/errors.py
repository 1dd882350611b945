"""Exception types shared across the package."""


class ParseError(ValueError):
    """Raised when a delimited-text record cannot be parsed.

    Carries the 1-based line number and column index of the offending field.
    """

    def __init__(self, message, line, column=None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{message} ({where})")


class DegenerateDataError(ValueError):
    """Input too degenerate to cluster (e.g. fewer usable records than clusters)."""


class UndefinedMetricError(ValueError):
    """A validity metric is undefined for the given partition (e.g. one cluster)."""


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name and, for workers, the partition."""

    def __init__(self, stage, message, partition=None):
        self.stage = stage
        self.partition = partition
        tag = stage if partition is None else f"{stage}[partition {partition}]"
        super().__init__(f"{tag}: {message}")
