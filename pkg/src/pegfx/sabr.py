"""Lognormal SABR implied-volatility benchmark (beta = 1).

Used as the calibration baseline: five-pillar least squares on the smile,
compared against the regime-switching calibration residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import CalibrationError, DomainError, NumericalError

__all__ = ["SabrParams", "sabr_vol", "sabr_calibrate", "lognormal_vol_density"]

#: calibration box: a, b, rho
SABR_BOUNDS = ((1e-6, 0.0, -0.999), (2.0, 10.0, 0.999))
_Z_SERIES_CUTOFF = 1e-7


@dataclass(frozen=True)
class SabrParams:
    """Initial volatility ``a``, vol-of-vol ``b`` and correlation ``rho``."""

    a: float
    b: float
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise DomainError(f"a must be positive, got {self.a!r}")
        if not (math.isfinite(self.b) and self.b >= 0.0):
            raise DomainError(f"b must be non-negative, got {self.b!r}")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho!r}")


def sabr_vol(strike: float, forward: float, maturity: float,
             params: SabrParams) -> float:
    """Hagan lognormal implied volatility a * z/chi(z) * (1 + correction * T)."""
    if not (strike > 0.0 and forward > 0.0 and maturity > 0.0):
        raise DomainError("strike, forward and maturity must be positive")
    a, b, rho = params.a, params.b, params.rho
    z = (b / a) * math.log(forward / strike)
    if abs(z) < _Z_SERIES_CUTOFF:
        ratio = 1.0
    else:
        arg = (math.sqrt(1.0 - 2.0 * rho * z + z * z) + z - rho) / (1.0 - rho)
        if arg <= 0.0:
            raise NumericalError(f"chi(z) log argument {arg} is non-positive at z={z}")
        ratio = z / math.log(arg)
    correction = (rho * b * a / 4.0 + (2.0 - 3.0 * rho * rho) * b * b / 24.0) * maturity
    return a * ratio * (1.0 + correction)


def sabr_calibrate(smile, forward: float, maturity: float) -> SabrParams:
    """Least-squares fit of (a, b, rho) to (strike, vol) pillars.

    ``smile`` is an iterable of five (strike, vol) pairs with distinct strikes.
    """
    pillars = [(float(k), float(v)) for k, v in smile]
    strikes = np.array([k for k, _ in pillars])
    vols = np.array([v for _, v in pillars])
    if len(pillars) != 5 or len(set(strikes.tolist())) != 5:
        raise DomainError("smile must contain five distinct strikes")
    if np.any(vols <= 0.0):
        raise DomainError("pillar vols must be positive")

    def residuals(x):
        p = SabrParams(a=x[0], b=x[1], rho=x[2])
        try:
            model = np.array([sabr_vol(k, forward, maturity, p) for k in strikes])
        except NumericalError:
            return np.full_like(vols, 1e3)
        return model - vols

    atm_guess = float(vols[int(np.argmin(np.abs(np.log(strikes / forward))))])
    skew = float(vols[-1] - vols[0])
    starts = [
        (atm_guess, 1.0, max(-0.9, min(0.9, math.copysign(0.3, skew)))),
        (atm_guess, 0.2, 0.0),
        (float(np.mean(vols)), 2.0, 0.0),
    ]
    lo = np.array(SABR_BOUNDS[0])
    hi = np.array(SABR_BOUNDS[1])
    best = None
    for x0 in starts:
        x0 = np.clip(np.asarray(x0, dtype=float), lo + 1e-9, hi - 1e-9)
        fit = least_squares(residuals, x0, bounds=(lo, hi), method="trf",
                            xtol=1e-12, ftol=1e-12, gtol=1e-12)
        if best is None or fit.cost < best.cost:
            best = fit
    if best is None or not np.all(np.isfinite(best.x)):
        raise CalibrationError("SABR calibration failed",
                               best_theta=None if best is None else best.x,
                               residual=None if best is None else float(best.cost))
    return SabrParams(a=float(best.x[0]), b=float(best.x[1]), rho=float(best.x[2]))


def lognormal_vol_density(grid, params: SabrParams, maturity: float) -> np.ndarray:
    """Density of the model's terminal volatility, LogN(ln a - b^2 T/2, b^2 T).

    Diagnostic for comparing the fitted vol-of-vol against an empirical
    distribution of quoted vols; degenerates to a point mass as b -> 0.
    """
    grid = np.asarray(grid, dtype=float)
    if params.b == 0.0 or maturity <= 0.0:
        return np.zeros_like(grid)
    mu = math.log(params.a) - 0.5 * params.b ** 2 * maturity
    s = params.b * math.sqrt(maturity)
    out = np.zeros_like(grid)
    pos = grid > 0.0
    x = grid[pos]
    out[pos] = np.exp(-0.5 * ((np.log(x) - mu) / s) ** 2) / (x * s * math.sqrt(2.0 * math.pi))
    return out
