"""Exception types.

Every error carries an ``exit_code`` so the command line front end can map
failures to distinct process exit statuses.
"""


class MaxisetError(ValueError):
    exit_code = 1


class ShapeError(MaxisetError):
    exit_code = 3


class LevelOutOfRangeError(ShapeError):
    exit_code = 4


class PenaltyTooSmallError(MaxisetError):
    """The penalty level must exceed 1 for the Kraft-type sums to make sense."""

    exit_code = 5


class TooLargeCollectionError(MaxisetError):
    exit_code = 6


class DegeneratePenaltyError(MaxisetError):
    exit_code = 7


class NoiseTooLargeError(MaxisetError):
    """n / lambda_n < 1, so no resolution level is admissible."""

    exit_code = 8


class InsufficientDepthError(MaxisetError):
    exit_code = 9


class DegenerateRateError(MaxisetError):
    exit_code = 10


class DomainError(MaxisetError):
    exit_code = 11


class ConfigError(MaxisetError):
    """Unknown names or malformed inputs on the command line."""

    exit_code = 2


class GridError(ConfigError):
    """An n-grid that is empty, unsorted, or not admissible for the signal depth."""

    exit_code = 12


class InputFileError(MaxisetError):
    """A coefficient, sample or config file that cannot be read."""

    exit_code = 13
