"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map it onto the
documented process status (1 validation, 2 runtime, 3 internal).
"""


class RepMotionError(Exception):
    exit_code = 2


class ValidationError(RepMotionError, ValueError):
    exit_code = 1


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigurationError(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class ModelError(ValidationError):
    pass


class InsufficientDataError(RepMotionError, ValueError):
    pass


class DegenerateSignalError(RepMotionError, ValueError):
    pass


class DegenerateFitError(DegenerateSignalError):
    pass


class NormalizationError(DegenerateSignalError):
    pass
