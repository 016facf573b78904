"""Quadratic (mean-variance) hedging for the regime-switching model.

The hedge minimises expected squared terminal error in carry-discounted
accounting, so ratios are produced on the discounted basis: the ratio is the
number of foreign-currency units to hold against the undiscounted spot, with
the carry discount factor folded in. Post-switch the market is complete and
the ratio collapses to the discounted Black-Scholes delta at the high
volatility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .black_scholes import MarketContext, OptionSpec, bs_delta, bs_price
from .errors import DomainError
from .regime_switching import (
    RsParams,
    approx_delta,
    approx_price,
    kappa,
    rs_delta,
    rs_price,
)

__all__ = [
    "RegimeState",
    "HedgeRatio",
    "value_fn",
    "mv_ratio",
    "mv_ratio_jump_integral",
    "mv_initial_capital",
]


@dataclass(frozen=True)
class RegimeState:
    """Point on a path: regime flag, elapsed time and pre-jump spot."""

    alpha: int
    t: float
    spot: float

    def __post_init__(self):
        if self.alpha not in (0, 1):
            raise DomainError(f"alpha must be 0 or 1, got {self.alpha!r}")
        if not (math.isfinite(self.t) and self.t >= 0.0):
            raise DomainError(f"t must be a finite non-negative time, got {self.t!r}")
        if not (math.isfinite(self.spot) and self.spot > 0.0):
            raise DomainError(f"spot must be positive, got {self.spot!r}")


@dataclass(frozen=True)
class HedgeRatio:
    """Units of foreign currency to hold; basis records the accounting."""

    pi: float
    discount_basis: str = "discounted"


def _remaining(state: RegimeState, mkt: MarketContext,
               opt: OptionSpec) -> tuple[MarketContext, OptionSpec]:
    if opt.side != "call":
        raise DomainError("mean-variance hedging is defined for calls only")
    if state.t >= opt.maturity:
        raise DomainError(f"state time {state.t} is at or past expiry {opt.maturity}")
    here = MarketContext(spot=state.spot, rd=mkt.rd, rf=mkt.rf)
    left = OptionSpec(strike=opt.strike, maturity=opt.maturity - state.t, side="call")
    return here, left


def value_fn(state: RegimeState, mkt: MarketContext, opt: OptionSpec,
             params: RsParams) -> float:
    """Conditional option value at the state: high-vol GK after the switch,
    the mixture price before it."""
    here, left = _remaining(state, mkt, opt)
    if state.alpha == 1:
        return bs_price(here, left, params.sigma_high)
    return rs_price(here, left, params)


def mv_ratio(state: RegimeState, mkt: MarketContext, opt: OptionSpec,
             params: RsParams, delta_engine: str = "exact") -> HedgeRatio:
    """Mean-variance hedge ratio.

    Pre-switch the ratio blends the diffusion delta with a jump-compensation
    term built from the value gap between the post-jump high-vol state and the
    current mixture state. ``delta_engine`` selects the exact quadrature or
    the first-order approximation for the pre-switch value and delta (the
    approximate engine replaces both, which is what makes it fast).
    """
    if delta_engine not in ("exact", "approximate"):
        raise DomainError(f"unknown delta engine {delta_engine!r}")
    here, left = _remaining(state, mkt, opt)
    discount = math.exp(-(mkt.rd - mkt.rf) * state.t)
    if state.alpha == 1:
        return HedgeRatio(pi=discount * bs_delta(here, left, params.sigma_high))

    if delta_engine == "exact":
        dvalue = rs_delta(here, left, params)
        value_now = rs_price(here, left, params)
    else:
        dvalue = approx_delta(here, left, params)
        value_now = approx_price(here, left, params)
    kap = kappa(params)
    jumped = MarketContext(spot=state.spot * (1.0 + kap), rd=mkt.rd, rf=mkt.rf)
    value_jumped = bs_price(jumped, left, params.sigma_high)

    sl2 = params.sigma_low ** 2
    lam = params.lam
    jump_weight = lam * math.expm1(params.u) / state.spot
    numerator = sl2 * discount * dvalue + jump_weight * discount * (value_jumped - value_now)
    denominator = sl2 + lam * kap * kap
    return HedgeRatio(pi=numerator / denominator)


def mv_ratio_jump_integral(state: RegimeState, mkt: MarketContext, opt: OptionSpec,
                           params: RsParams, n_nodes: int = 21) -> HedgeRatio:
    """Diagnostic ratio integrating over the full jump law (Gauss-Hermite).

    The first-order-condition form weighs the value gap by (e^y - 1) under
    y ~ N(u, delta^2) and divides the gap term by the discounted spot; it
    coincides with :func:`mv_ratio` when delta == 0 and t == 0.
    """
    here, left = _remaining(state, mkt, opt)
    discount = math.exp(-(mkt.rd - mkt.rf) * state.t)
    if state.alpha == 1:
        return HedgeRatio(pi=discount * bs_delta(here, left, params.sigma_high))

    dvalue = rs_delta(here, left, params)
    value_now = rs_price(here, left, params)
    lam = params.lam
    sl2 = params.sigma_low ** 2

    if params.delta == 0.0:
        ys = np.array([params.u])
        weights = np.array([1.0])
    else:
        x, w = np.polynomial.hermite.hermgauss(n_nodes)
        ys = params.u + math.sqrt(2.0) * params.delta * x
        weights = w / math.sqrt(math.pi)

    gaps = np.array([
        bs_price(MarketContext(spot=state.spot * math.exp(y), rd=mkt.rd, rf=mkt.rf),
                 left, params.sigma_high) - value_now
        for y in ys])
    jump_factor = np.expm1(ys)
    discounted_spot = state.spot / discount
    numerator = (sl2 * discount * dvalue
                 + lam / discounted_spot * float(np.sum(weights * jump_factor
                                                        * discount * gaps)))
    denominator = sl2 + lam * float(np.sum(weights * jump_factor ** 2))
    return HedgeRatio(pi=numerator / denominator)


def mv_initial_capital(mkt: MarketContext, opt: OptionSpec, params: RsParams) -> float:
    """Initial capital of the mean-variance strategy: the exact model price."""
    return rs_price(mkt, opt, params)
