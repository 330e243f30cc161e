"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: DataError -> 2,
NumericalError -> 3; anything argparse/click-ish -> 1.
"""


class AeroVRError(Exception):
    pass


class DataError(AeroVRError, ValueError):
    """Malformed, out-of-bounds, or inconsistent input data."""


class NumericalError(AeroVRError, RuntimeError):
    """A numerical operation could not be completed (rank deficiency, etc.)."""


class PreconditionError(AeroVRError, RuntimeError):
    """A session operation was attempted while its precondition did not hold.

    The HTTP layer reports these as 409.
    """
