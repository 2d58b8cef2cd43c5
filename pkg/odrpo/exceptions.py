"""Exception hierarchy shared by the services and the command line."""


class OdrpoError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class InputError(OdrpoError, ValueError):
    """Malformed input file, flag or model field."""

    exit_code = 2

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(InputError):
    """Configuration value outside the domain of the operation it drives."""


class EstimatorError(OdrpoError, ArithmeticError):
    """An estimator is undefined on the given input."""

    exit_code = 3


class MeanTooSmall(EstimatorError):
    """Group mean too close to zero for mean normalization."""


class DegenerateMatrix(EstimatorError):
    """Every rater assigned constant scores, so concordance is undefined."""


class TooLarge(OdrpoError):
    """An exact enumeration would exceed its configured size guard."""

    exit_code = 4
