"""Exception hierarchy shared across the package."""


class ConceptGraphError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(ConceptGraphError):
    """Malformed or inconsistent input data (bad line, dangling id, duplicate id)."""


class UndefinedIdfError(ConceptGraphError):
    """idf requested for a concept that appears in no document."""


class UndefinedModularityError(ConceptGraphError):
    """Modularity requested for a graph with no edges (m = 0)."""


class StoreError(ConceptGraphError):
    """Unreadable, truncated, or version-mismatched binary artifact."""


class StageError(ConceptGraphError):
    """A pipeline stage failed; carries the stage name and the original error."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
