"""Enumeration caps shared by the exhaustive routines."""

MAX_ENUM_N = 8
EXHAUSTIVE_CAP = 6
EXHAUSTIVE_CAP_EXTENDED = 7
MATRIX_CAP = 6
EXACT_COVER_MAX_ONES = 200


class CapExceededError(ValueError):
    """Raised when an exhaustive routine is asked for an instance above its cap."""
