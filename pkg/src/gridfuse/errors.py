"""Exception types shared across the package."""


class GridfuseError(Exception):
    """Base class for every error this library raises on purpose."""


# -- tabular ----------------------------------------------------------------

class HeaderMismatch(GridfuseError):
    """CSV header does not match the expected column schema."""


class EmptyTable(GridfuseError):
    """No valid rows survived parsing."""


class NonMonotonicTimestamps(GridfuseError):
    """Timestamps are not strictly increasing."""


class EmptyIntersection(GridfuseError):
    """Tables share no common timestamps."""


class MalformedInput(GridfuseError):
    """An input file is structurally unreadable (bad JSON, bad schema)."""


# -- normalize / pca --------------------------------------------------------

class TooFewSamples(GridfuseError):
    """An operation needs more observations than were supplied."""


class NonPositiveInput(GridfuseError):
    """Box-Cox input contains values <= 0."""


class DegenerateColumn(GridfuseError):
    """A column is constant where variation is required."""


class NotSymmetric(GridfuseError):
    """Eigendecomposition input is not symmetric within tolerance."""


class NoConvergence(GridfuseError):
    """Jacobi sweeps exceeded the iteration budget."""


# -- evidence / fusion ------------------------------------------------------

class FrameMismatch(GridfuseError):
    """Mass functions or focal sets refer to different frames."""


class TotalConflict(GridfuseError):
    """Dempster combination is undefined: all product mass is conflicting."""


class EmptyConflict(GridfuseError):
    """Conflict-matrix operation called on a conflict-free pair."""


# -- simgen / experiments / cli ---------------------------------------------

class InvalidConfig(GridfuseError):
    """A scenario or run configuration violates its constraints."""


class DimensionMismatch(GridfuseError):
    """Feature vector length disagrees with fitted prototypes."""


class LengthMismatch(GridfuseError):
    """Paired sequences have different lengths."""


class ParamsMismatch(GridfuseError):
    """Stored normalization parameters do not cover the input columns."""


class DegenerateData(GridfuseError):
    """Every input column is degenerate; nothing can be normalized."""
