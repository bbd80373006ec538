"""Exception types raised by l2pnorm."""


class L2pError(Exception):
    """Base class for all package errors."""


class DomainError(L2pError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateRowError(L2pError, ArithmeticError):
    """A zero row was met while building weights under the strict policy."""

    def __init__(self, rows):
        self.rows = list(rows)
        super().__init__(
            f"zero row(s) {self.rows} with epsilon=0 under strict policy; "
            "use a positive epsilon or the 'invert-zero' policy"
        )


class SingularSystemError(L2pError, ArithmeticError):
    """The reweighted normal matrix M D^-1 M^T is numerically singular."""


class NonConvergenceError(L2pError, RuntimeError):
    """An iterative oracle ran out of evaluations before stabilising."""


class DataError(L2pError, ValueError):
    """Base class for dataset loading problems."""


class ParseError(DataError):
    def __init__(self, row, column, value, path=None):
        self.row, self.column, self.value = row, column, value
        where = f"{path}: " if path else ""
        super().__init__(
            f"{where}cannot parse {value!r} as a number (row {row}, column {column})"
        )


class MissingLabelError(DataError):
    pass


class InconsistentWidthError(DataError):
    def __init__(self, row, expected, got, path=None):
        self.row, self.expected, self.got = row, expected, got
        where = f"{path}: " if path else ""
        super().__init__(f"{where}row {row} has {got} fields, expected {expected}")


class TooFewSamplesError(DataError):
    pass
