"""Garman-Kohlhagen pricing kernel for FX vanilla options.

Conventions: spot is quoted in domestic units per one foreign unit, rates are
continuously compounded, prices are in domestic currency per unit of foreign
notional. Deltas are pips spot deltas. All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .errors import ConvergenceError, DomainError, NoArbitrageError

__all__ = [
    "MarketContext",
    "OptionSpec",
    "bs_price",
    "bs_delta",
    "bs_vega",
    "implied_vol",
    "norm_cdf",
    "norm_pdf",
]

_SQRT_2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

#: implied-vol solver bracket, price tolerance (x spot) and iteration cap
VOL_BRACKET = (1e-8, 5.0)
IV_PRICE_TOL = 1e-10
IV_MAX_ITER = 200
#: prices within this fraction of spot of a no-arbitrage bound are rejected
BOUND_CUTOFF = 1e-12


def norm_cdf(x: float) -> float:
    """Standard normal CDF via erfc, accurate to ~1e-16 in both tails."""
    return 0.5 * math.erfc(-x / _SQRT_2)


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) * _INV_SQRT_2PI


@dataclass(frozen=True)
class MarketContext:
    """Spot FX market state: spot plus the domestic/foreign carry pair."""

    spot: float
    rd: float
    rf: float

    def __post_init__(self):
        if not (math.isfinite(self.spot) and self.spot > 0.0):
            raise DomainError(f"spot must be positive and finite, got {self.spot!r}")
        if not (math.isfinite(self.rd) and math.isfinite(self.rf)):
            raise DomainError(f"rates must be finite, got rd={self.rd!r} rf={self.rf!r}")

    def forward(self, maturity: float) -> float:
        return self.spot * math.exp((self.rd - self.rf) * maturity)


@dataclass(frozen=True)
class OptionSpec:
    """European FX vanilla: strike, year-fraction maturity and side."""

    strike: float
    maturity: float
    side: str = "call"

    def __post_init__(self):
        if not (math.isfinite(self.strike) and self.strike > 0.0):
            raise DomainError(f"strike must be positive and finite, got {self.strike!r}")
        if not (math.isfinite(self.maturity) and self.maturity > 0.0):
            raise DomainError(f"maturity must be positive, got {self.maturity!r}")
        if self.side not in ("call", "put"):
            raise DomainError(f"side must be 'call' or 'put', got {self.side!r}")


# ---------------------------------------------------------------------------
# scalar core on raw floats; total_vol = sigma * sqrt(T)
# ---------------------------------------------------------------------------

def _d_pm(spot: float, strike: float, maturity: float, rd: float, rf: float,
          total_vol: float) -> tuple[float, float]:
    m = math.log(spot / strike) + (rd - rf) * maturity
    d_plus = m / total_vol + 0.5 * total_vol
    return d_plus, d_plus - total_vol


def _call_price(spot, strike, maturity, rd, rf, total_vol):
    d_plus, d_minus = _d_pm(spot, strike, maturity, rd, rf, total_vol)
    return (math.exp(-rf * maturity) * spot * norm_cdf(d_plus)
            - math.exp(-rd * maturity) * strike * norm_cdf(d_minus))


def _put_price(spot, strike, maturity, rd, rf, total_vol):
    d_plus, d_minus = _d_pm(spot, strike, maturity, rd, rf, total_vol)
    return (math.exp(-rd * maturity) * strike * norm_cdf(-d_minus)
            - math.exp(-rf * maturity) * spot * norm_cdf(-d_plus))


def _call_delta(spot, strike, maturity, rd, rf, total_vol):
    d_plus, _ = _d_pm(spot, strike, maturity, rd, rf, total_vol)
    return math.exp(-rf * maturity) * norm_cdf(d_plus)


def _put_delta(spot, strike, maturity, rd, rf, total_vol):
    d_plus, _ = _d_pm(spot, strike, maturity, rd, rf, total_vol)
    return -math.exp(-rf * maturity) * norm_cdf(-d_plus)


def _vega(spot, strike, maturity, rd, rf, total_vol):
    d_plus, _ = _d_pm(spot, strike, maturity, rd, rf, total_vol)
    return spot * math.exp(-rf * maturity) * norm_pdf(d_plus) * math.sqrt(maturity)


# ---------------------------------------------------------------------------
# vectorised core (ndarrays broadcast; used by quadratures and backtests)
# ---------------------------------------------------------------------------

def _call_price_vec(spot, strike, maturity, rd, rf, total_vol):
    m = np.log(spot / strike) + (rd - rf) * maturity
    d_plus = m / total_vol + 0.5 * total_vol
    d_minus = d_plus - total_vol
    return (np.exp(-rf * maturity) * spot * ndtr(d_plus)
            - np.exp(-rd * maturity) * strike * ndtr(d_minus))


def _call_delta_vec(spot, strike, maturity, rd, rf, total_vol):
    m = np.log(spot / strike) + (rd - rf) * maturity
    d_plus = m / total_vol + 0.5 * total_vol
    return np.exp(-rf * maturity) * ndtr(d_plus)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _check_sigma(sigma: float) -> None:
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise DomainError(f"sigma must be positive and finite, got {sigma!r}")


def bs_price(mkt: MarketContext, opt: OptionSpec, sigma: float) -> float:
    """Garman-Kohlhagen price for the given volatility (per sqrt-year)."""
    _check_sigma(sigma)
    total_vol = sigma * math.sqrt(opt.maturity)
    if opt.side == "call":
        return _call_price(mkt.spot, opt.strike, opt.maturity, mkt.rd, mkt.rf, total_vol)
    return _put_price(mkt.spot, opt.strike, opt.maturity, mkt.rd, mkt.rf, total_vol)


def bs_delta(mkt: MarketContext, opt: OptionSpec, sigma: float) -> float:
    """Pips spot delta: exp(-rf T) N(d+) for calls, -exp(-rf T) N(-d+) for puts."""
    _check_sigma(sigma)
    total_vol = sigma * math.sqrt(opt.maturity)
    if opt.side == "call":
        return _call_delta(mkt.spot, opt.strike, opt.maturity, mkt.rd, mkt.rf, total_vol)
    return _put_delta(mkt.spot, opt.strike, opt.maturity, mkt.rd, mkt.rf, total_vol)


def bs_vega(mkt: MarketContext, opt: OptionSpec, sigma: float) -> float:
    """Price sensitivity to sigma; identical for calls and puts."""
    _check_sigma(sigma)
    total_vol = sigma * math.sqrt(opt.maturity)
    return _vega(mkt.spot, opt.strike, opt.maturity, mkt.rd, mkt.rf, total_vol)


def no_arbitrage_bounds(mkt: MarketContext, opt: OptionSpec) -> tuple[float, float]:
    """Static (lower, upper) price bounds for the option."""
    disc_spot = math.exp(-mkt.rf * opt.maturity) * mkt.spot
    disc_strike = math.exp(-mkt.rd * opt.maturity) * opt.strike
    if opt.side == "call":
        return max(0.0, disc_spot - disc_strike), disc_spot
    return max(0.0, disc_strike - disc_spot), disc_strike


def implied_vol(mkt: MarketContext, opt: OptionSpec, price: float,
                bracket: tuple[float, float] | None = None) -> float:
    """Invert the pricing formula for the volatility reproducing ``price``.

    Bracketed Brent iteration on [1e-8, 5.0]; the result satisfies
    |bs_price(sigma) - price| <= 1e-10 * spot. Prices within 1e-12 * spot of a
    no-arbitrage bound raise :class:`NoArbitrageError`. An optional ``bracket``
    narrows the initial search; it is widened back to the full interval when
    the root is not inside it.
    """
    if not math.isfinite(price):
        raise DomainError(f"price must be finite, got {price!r}")
    lower, upper = no_arbitrage_bounds(mkt, opt)
    cutoff = BOUND_CUTOFF * mkt.spot
    if price <= lower + cutoff:
        raise NoArbitrageError(
            f"price {price} at or below lower no-arbitrage bound {lower}",
            bound="lower", bound_value=lower)
    if price >= upper - cutoff:
        raise NoArbitrageError(
            f"price {price} at or above upper no-arbitrage bound {upper}",
            bound="upper", bound_value=upper)

    sqrt_t = math.sqrt(opt.maturity)
    if opt.side == "call":
        def objective(sigma):
            return _call_price(mkt.spot, opt.strike, opt.maturity,
                               mkt.rd, mkt.rf, sigma * sqrt_t) - price
    else:
        def objective(sigma):
            return _put_price(mkt.spot, opt.strike, opt.maturity,
                              mkt.rd, mkt.rf, sigma * sqrt_t) - price

    lo, hi = VOL_BRACKET
    if bracket is not None:
        blo = max(bracket[0], lo)
        bhi = min(bracket[1], hi)
        if blo < bhi and objective(blo) < 0.0 < objective(bhi):
            lo, hi = blo, bhi
    f_lo, f_hi = objective(lo), objective(hi)
    if f_lo > 0.0:
        # price below the sigma->0 limit should have been caught by the bounds
        raise ConvergenceError(f"no root above sigma={lo}: price {price} too low")
    if f_hi < 0.0:
        raise ConvergenceError(f"no root below sigma={hi}: price {price} too high")
    try:
        root = brentq(objective, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=IV_MAX_ITER)
    except RuntimeError as exc:  # pragma: no cover - maxiter exhaustion
        raise ConvergenceError(f"implied vol did not converge: {exc}") from exc
    if abs(objective(root)) > IV_PRICE_TOL * mkt.spot:
        raise ConvergenceError(
            f"implied vol residual {objective(root):.3e} above tolerance")
    return root
