"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument lies outside the domain of a function (e.g. the pole of n_l)."""


class SpectralError(RuntimeError):
    """Root search for the cavity spectrum failed.

    ``interval`` holds the last scanned wavenumber interval ``(k_lo, k_hi)``.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class DegenerateRootError(SpectralError):
    """The cross product has a (near) double root, so d(omega)/d(r) is undefined."""


class IntegrationError(RuntimeError):
    """Bogoliubov integration exceeded its unitarity budget.

    ``report`` is a dict with the time, the worst row deviation and the budget.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}
