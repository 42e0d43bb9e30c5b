"""Exception hierarchy. The CLI maps each class to its own exit code."""


class CrashtopoError(Exception):
    exit_code = 1


class ValidationError(CrashtopoError, ValueError):
    exit_code = 3


class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientDataError(ValidationError):
    exit_code = 4


class AlignmentError(ValidationError):
    exit_code = 5


class CoverageError(ValidationError):
    exit_code = 5


class FetchError(CrashtopoError):
    exit_code = 6

    def __init__(self, symbol: str, reason: str):
        self.symbol = symbol
        self.reason = reason
        super().__init__(f"{symbol}: {reason}")


class EmptyDataError(FetchError):
    pass


class SingularDesignError(CrashtopoError, ArithmeticError):
    exit_code = 7


class DegenerateRegressionError(SingularDesignError):
    pass
