"""Exception hierarchy shared across the toolkit.

CLI exit-code mapping: argument/domain problems -> 2, data problems -> 3,
numerical problems -> 4 (see cli.main).
"""

from __future__ import annotations


class PegfxError(Exception):
    """Base class for all toolkit errors."""


class DomainError(PegfxError, ValueError):
    """Input outside an operation's documented domain."""


class NoArbitrageError(PegfxError, ValueError):
    """Option price outside the static no-arbitrage interval.

    ``bound`` is ``"lower"`` or ``"upper"``; ``bound_value`` the violated bound.
    """

    def __init__(self, message: str, bound: str, bound_value: float):
        super().__init__(message)
        self.bound = bound
        self.bound_value = bound_value


class ConvergenceError(PegfxError, RuntimeError):
    """Iterative solver hit its iteration cap without meeting tolerance."""


class NumericalError(PegfxError, RuntimeError):
    """Quadrature or transform failed to reach the requested accuracy.

    Carries the best available ``estimate`` and its ``error_bound``.
    """

    def __init__(self, message: str, estimate: float | None = None,
                 error_bound: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class DataError(PegfxError, ValueError):
    """Malformed or internally inconsistent market data. ``row`` is 1-based."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class GapError(DataError):
    """A required date is missing from a quote history or surface store."""


class ConventionError(PegfxError, ValueError):
    """Strike recovery failed under the requested delta convention."""


class CalibrationError(PegfxError, RuntimeError):
    """Least-squares calibration failed; carries the best state found."""

    def __init__(self, message: str, best_theta=None, residual: float | None = None):
        super().__init__(message)
        self.best_theta = best_theta
        self.residual = residual


class CoverageWarning(UserWarning):
    """FFT strike grid does not cover the requested log-moneyness range."""
