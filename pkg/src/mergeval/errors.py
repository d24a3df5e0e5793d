"""Exception types shared across the package."""


class MergeEvalError(Exception):
    """Base class for every error raised by mergeval."""


class ParseError(MergeEvalError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, reason, line=None):
        self.reason = reason
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + str(reason))


class EmptyTrajectory(MergeEvalError):
    pass


class NonMonotonicTimestamps(MergeEvalError):
    pass


class InvalidOrientation(MergeEvalError):
    pass


class DuplicateTimestamp(MergeEvalError):
    pass


class EmptySubmapAfterAlignment(MergeEvalError):
    def __init__(self, submap_id):
        self.submap_id = submap_id
        super().__init__(f"submap {submap_id} lost all frames during ground-truth alignment")


class NoOverlap(MergeEvalError):
    pass


class ZeroNormDescriptor(MergeEvalError):
    def __init__(self, row):
        self.row = row
        super().__init__(f"descriptor row {row} has zero norm; cosine distance undefined")


class MissingDescriptor(MergeEvalError):
    def __init__(self, frame_index):
        self.frame_index = frame_index
        super().__init__(f"frame {frame_index} has no descriptor row")


class DimensionMismatch(MergeEvalError):
    pass


class DegenerateEvaluation(MergeEvalError):
    pass


class NoGroundTruthMatches(MergeEvalError):
    pass


class InvalidConfig(MergeEvalError):
    pass
