"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an operation is called outside its domain of validity
    (bad parameters, points outside the grid, mismatched fields, ...)."""


class SolverError(RuntimeError):
    """Raised when a solver cannot produce a trustworthy result.

    Carries optional diagnostics: condition estimate for linear solves,
    offending node for projection failures, energy trace for aborted flows.
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
