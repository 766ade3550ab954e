"""Exception hierarchy shared by all modules."""


class OTSError(Exception):
    """Base class for every error raised by the package."""


class SchemaError(OTSError):
    """A case document is missing a field or has one of the wrong shape."""


class ValidationError(OTSError):
    """A case document violates a data invariant.

    ``path`` names the offending field, e.g. ``lines[3].b``.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnitsError(OTSError):
    """A numeric field is NaN or infinite."""


class NameCollisionError(OTSError):
    pass


class EmptyBoxError(OTSError):
    pass


class UnsupportedSupportError(OTSError):
    pass


class DimensionTooLargeError(OTSError):
    pass


class NotFullDimensionalError(OTSError):
    pass


class ScenarioOutsideSupportError(OTSError):
    pass


class MissingMomentsError(OTSError):
    pass


class PSDError(OTSError):
    pass


class NumericalError(OTSError):
    """Pivot breakdown in the simplex engine."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class EnumerationTooLargeError(OTSError):
    pass
