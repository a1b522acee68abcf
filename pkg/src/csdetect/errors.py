"""Exception types shared across the package.

``DataError`` subclasses indicate problems with input data or configuration
values; ``UsageError`` indicates a malformed invocation (bad CLI flag, unknown
config key). The CLI maps UsageError to exit code 1 and DataError to 2.
"""


class CsdetectError(Exception):
    """Base class for all package-specific errors."""


class UsageError(CsdetectError):
    """Invalid invocation: unknown subcommand, flag, or config key."""


class DataError(CsdetectError):
    """Invalid or inconsistent input data."""


# -- ingestion --------------------------------------------------------------

class MissingColumn(DataError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"required column missing from header: {column!r}")


class MalformedRow(DataError):
    def __init__(self, row_index: int, detail: str):
        self.row_index = row_index
        super().__init__(f"row {row_index}: {detail}")


class NonMonotonicTime(DataError):
    def __init__(self, session, detail):
        self.session = session
        self.detail = detail
        if isinstance(detail, int):
            detail = f"row {detail}: timestamp does not increase"
        super().__init__(f"session {session}: {detail}")


class ScoreOutOfRange(DataError):
    def __init__(self, score):
        self.score = score
        super().__init__(f"FMS score {score!r} outside [0, 10]")


class InvalidSpec(DataError):
    """Synthetic-dataset spec violates its own invariants."""


# -- preprocessing ----------------------------------------------------------

class AllNonFinite(DataError):
    def __init__(self, feature: str):
        self.feature = feature
        super().__init__(f"feature {feature!r} has no finite value in session")


class TooFewSamples(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class UnknownSubset(DataError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown feature subset: {name!r}")


# -- partitioning -----------------------------------------------------------

class EmptyTrainingSet(DataError):
    """Requested level combination selects no samples for some fold."""


class InsufficientClasses(DataError):
    def __init__(self, user: str, n_classes: int):
        self.user = user
        super().__init__(
            f"user {user!r} has samples in {n_classes} class(es); "
            "personalized protocol requires at least 2"
        )


class UserIneligible(DataError):
    pass


# -- learners / evaluation --------------------------------------------------

class EmptyInput(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DegenerateInput(DataError):
    pass


# -- warnings ---------------------------------------------------------------

class ClassSmallerThanFoldsWarning(UserWarning):
    """A class has fewer samples than the fold count (allowed)."""


class NonConvergenceWarning(UserWarning):
    """Optimizer hit its iteration cap before reaching tolerance."""
