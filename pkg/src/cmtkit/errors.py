"""Shared exception types."""


class CmtkitError(Exception):
    """Base class for errors raised by this package."""


class RankDeficiencyError(CmtkitError):
    """A parity-check matrix does not have the rank the operation requires."""


class ResourceLimitError(CmtkitError):
    """An enumeration exceeded its configured node/cycle cap."""


class EmptyWeightClassError(CmtkitError):
    """A stopping-set weight class needed by the operation is empty."""


class EmptyCatalogError(CmtkitError):
    """An operation needs at least one stopping set but the catalog is empty."""


class LpSolverError(CmtkitError):
    """The LP solver failed to produce an optimal solution."""


class StageError(CmtkitError):
    """A pipeline stage failed; carries the stage name for CLI exit codes."""

    def __init__(self, stage, message):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
