"""Exception hierarchy shared across the package."""


class FacselError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(FacselError):
    """Schema file is malformed, or the data does not match the schema."""


class DataError(FacselError):
    """Data violates an assembly invariant (missing values, empty cells,
    too few rows, collinearity that breaks the declared design rank)."""


class DegenerateDataError(FacselError):
    """The response is fitted exactly by the sure variables (or the sure
    block itself is rank-deficient), so Bayes factors are undefined."""


class CapacityError(FacselError):
    """Model space too large for exhaustive enumeration."""


class DomainError(FacselError):
    """Argument outside the domain a numerical routine supports."""


class NumericError(FacselError):
    """A numerical routine failed to converge to its accuracy target."""


class ConstructionError(FacselError):
    """A generalized-inverse construction is impossible for the given input."""
