"""Characteristic-function pricing for the regime-switching model.

The log spot return X(T) (excess over the carry drift) has a closed-form
characteristic function: a no-switch lognormal component plus a jump component
whose time integral collapses to a ratio with a removable singularity. Call
prices follow from the contour integral at level 1/2; the no-switch component
of that integral is evaluated in closed form (it is a Garman-Kohlhagen price),
so only the jump component is quadratured.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .black_scholes import MarketContext, OptionSpec, _call_price
from .errors import CoverageWarning, DomainError, NumericalError
from .regime_switching import DEGENERATE_MATURITY, RsParams, _gl_nodes, kappa

__all__ = ["char_fn", "fourier_price", "fourier_smile", "fft_price_grid", "FftGrid"]

#: |denominator| * T below this routes through the time-integral fallback
_SINGULAR_CUTOFF = 1e-4
#: default absolute price tolerance as a fraction of spot
PRICE_TOL = 1e-8


def _phi_components(z: np.ndarray, maturity: float, params: RsParams):
    """phi0, phi1 and the jump-term denominator at complex argument z."""
    kap = kappa(params)
    a_low = 0.5 * params.sigma_low ** 2 * maturity
    a_high = 0.5 * params.sigma_high ** 2 * maturity
    drift = params.lam * kap * maturity
    iz = 1j * z
    zz = z * z
    phi0 = np.exp(-iz * (a_low + drift) - zz * a_low)
    phi1 = np.exp(-iz * a_high - zz * a_high)
    denom = (iz + zz) * (a_high - a_low) / maturity - params.lam * (iz * kap + 1.0)
    return phi0, phi1, denom


def _exp_time_integral(denom: np.ndarray, maturity: float) -> np.ndarray:
    """integral_0^T exp(denom * t) dt by quadrature (removable-limit fallback)."""
    t, w = _gl_nodes(16, maturity)
    return np.exp(np.multiply.outer(denom, t)) @ w


def _jump_term(z: np.ndarray, maturity: float, params: RsParams) -> np.ndarray:
    """Jump component of the characteristic function (zero when lam == 0)."""
    lam = params.lam
    if lam == 0.0:
        return np.zeros_like(z)
    phi0, phi1, denom = _phi_components(z, maturity, params)
    ejump = np.exp(1j * z * params.u - z * z * (0.5 * params.delta ** 2))
    small = np.abs(denom) * maturity < _SINGULAR_CUTOFF
    safe = np.where(small, 1.0, denom)
    out = lam * ejump * (math.exp(-lam * maturity) * phi0 - phi1) / safe
    if np.any(small):
        fallback = lam * ejump * phi1 * _exp_time_integral(denom, maturity)
        out = np.where(small, fallback, out)
    if not np.all(np.isfinite(out)):
        raise NumericalError("jump component of the characteristic function "
                             "is non-finite (singular denominator fallback failed)")
    return out


def char_fn(z, maturity: float, params: RsParams):
    """Characteristic function of X(T); accepts complex scalars or arrays.

    Grouped so that char_fn(0) == 1 holds exactly in floating point, and
    char_fn(-1j) == 1 (discounted-spot martingale identity) to roundoff.
    """
    if not maturity > 0.0:
        raise DomainError(f"maturity must be positive, got {maturity!r}")
    z_arr = np.asarray(z, dtype=complex)
    lam = params.lam
    phi0, phi1, denom = _phi_components(z_arr, maturity, params)
    if lam == 0.0:
        result = phi0
    else:
        ejump = np.exp(1j * z_arr * params.u - z_arr * z_arr * (0.5 * params.delta ** 2))
        small = np.abs(denom) * maturity < _SINGULAR_CUTOFF
        safe = np.where(small, 1.0, denom)
        gain = lam * ejump / safe
        result = math.exp(-lam * maturity) * phi0 * (1.0 + gain) - gain * phi1
        if np.any(small):
            fallback = (math.exp(-lam * maturity) * phi0
                        + lam * ejump * phi1 * _exp_time_integral(denom, maturity))
            result = np.where(small, fallback, result)
    if not np.all(np.isfinite(result)):
        raise NumericalError("characteristic function evaluated non-finite")
    if np.ndim(z) == 0:
        return complex(result)
    return result


# ---------------------------------------------------------------------------
# contour integral of the jump component at level 1/2
# ---------------------------------------------------------------------------

def _jump_envelope(u: np.ndarray, maturity: float, params: RsParams) -> np.ndarray:
    z = u - 0.5j
    return np.abs(_jump_term(z, maturity, params)) / (u * u + 0.25)


def _truncation_point(maturity: float, params: RsParams, tol: float) -> float:
    """Upper limit U with a conservative tail estimate envelope(U) * U < tol."""
    # Gaussian decay of the slow (low-vol) component guarantees an upper cap.
    slow = params.sigma_low * math.sqrt(maturity)
    cap = max(9.0 / slow, 200.0)
    grid = np.geomspace(1.0, cap, 48)
    env = _jump_envelope(grid, maturity, params)
    tails = env * grid
    ok = np.nonzero(tails < 0.05 * tol)[0]
    if ok.size:
        return float(grid[ok[0]])
    if tails[-1] < tol:
        return cap
    raise NumericalError(
        "jump-component integral tail does not reach tolerance at the "
        f"truncation cap {cap:.3g}", estimate=None, error_bound=float(tails[-1]))


def _panel_edges(upper: float, k_max: float) -> np.ndarray:
    """Geometric panels capped by the oscillation wavelength.

    The integrand carries a Lorentzian factor of half-width 1/2 (contour poles
    at +-i/2), so panels double from that fixed scale; Gauss nodes then sit
    well inside each panel's region of analyticity.
    """
    edges = [0.0]
    e = 0.5
    while e < upper:
        edges.append(e)
        e *= 2.0
    edges.append(upper)
    max_width = 12.0 * math.pi / max(abs(k_max), 1e-6)
    refined = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        pieces = max(1, math.ceil((b - a) / max_width))
        refined.extend(a + (b - a) * (i + 1) / pieces for i in range(pieces))
    return np.asarray(refined)


def _panel_nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    a = edges[:-1]
    half = 0.5 * np.diff(edges)
    nodes = (a + half)[:, None] + half[:, None] * x
    weights = half[:, None] * w
    return nodes.ravel(), weights.ravel()


def _jump_integrals(k_values: np.ndarray, maturity: float, params: RsParams,
                    tol: float) -> np.ndarray:
    """integral_0^inf Re(exp(iuk) J(u - i/2)) / (u^2 + 1/4) du for each k."""
    if params.lam == 0.0:
        return np.zeros_like(k_values)
    upper = _truncation_point(maturity, params, tol)
    edges = _panel_edges(upper, float(np.max(np.abs(k_values))))

    def evaluate(order):
        u, w = _panel_nodes(edges, order)
        core = _jump_term(u - 0.5j, maturity, params) / (u * u + 0.25)
        phase = np.exp(1j * np.multiply.outer(k_values, u))
        return (phase * core).real @ w

    prev = evaluate(16)
    for order in (32, 64, 128):
        cur = evaluate(order)
        if np.max(np.abs(cur - prev)) < 0.5 * tol:
            return cur
        prev = cur
    raise NumericalError(
        "contour integral did not converge under panel refinement",
        estimate=float(np.max(prev)), error_bound=float(np.max(np.abs(cur - prev))))


def fourier_smile(mkt: MarketContext, strikes, maturity: float,
                  params: RsParams, tol: float = PRICE_TOL) -> np.ndarray:
    """Call prices for several strikes at one maturity, sharing the transform.

    The no-switch component of the contour integral is a closed-form
    Garman-Kohlhagen value, so the quadrature covers the jump component only.
    """
    if not maturity > DEGENERATE_MATURITY:
        raise DomainError(f"maturity must exceed {DEGENERATE_MATURITY}")
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    kap = kappa(params)
    lam = params.lam
    spot, rd, rf = mkt.spot, mkt.rd, mkt.rf
    shifted = spot * math.exp(-lam * kap * maturity)
    p = math.exp(-lam * maturity)
    sqrt_t = math.sqrt(maturity)
    base = np.array([
        _call_price(shifted, k, maturity, rd, rf, params.sigma_low * sqrt_t)
        for k in strikes])
    if lam == 0.0:
        return base
    k_values = np.log(spot / strikes) + (rd - rf) * maturity
    prefactor = np.sqrt(spot * strikes) * math.exp(-0.5 * (rd + rf) * maturity) / math.pi
    tol_integral = tol * spot / float(np.max(prefactor))
    integrals = _jump_integrals(k_values, maturity, params, tol_integral)
    return (spot * math.exp(-rf * maturity) * (1.0 - p * math.exp(-lam * kap * maturity))
            + p * base - prefactor * integrals)


def fourier_price(mkt: MarketContext, opt: OptionSpec, params: RsParams,
                  tol: float = PRICE_TOL) -> float:
    """Call price from the contour-integral representation, to tol * spot."""
    if opt.side != "call":
        raise DomainError("Fourier pricing is defined for calls only")
    return float(fourier_smile(mkt, opt.strike, opt.maturity, params, tol=tol)[0])


# ---------------------------------------------------------------------------
# FFT over a log-strike grid with Simpson weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FftGrid:
    """FFT output: log-forward-moneyness grid, strikes and call prices.

    ``log_strikes[m]`` is ln(spot/K_m) + (rd - rf) T, so strikes decrease as
    the grid index grows.
    """

    log_strikes: np.ndarray
    strikes: np.ndarray
    prices: np.ndarray

    def as_pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.log_strikes.tolist(), self.prices.tolist()))

    def nearest(self, log_strike: float) -> tuple[float, float]:
        idx = int(np.argmin(np.abs(self.log_strikes - log_strike)))
        return float(self.log_strikes[idx]), float(self.prices[idx])


def fft_price_grid(mkt: MarketContext, maturity: float, params: RsParams,
                   n: int, eta: float, k_required: float | None = None) -> FftGrid:
    """Call prices on the FFT log-strike grid (trapezoid-in-frequency with
    Simpson weights (eta/3)(3 + (-1)^j - kron_{j-1}))."""
    if n < 2 or n & (n - 1):
        raise DomainError(f"n must be a power of two, got {n}")
    if not eta > 0.0:
        raise DomainError(f"eta must be positive, got {eta}")
    if not maturity > 0.0:
        raise DomainError(f"maturity must be positive, got {maturity!r}")
    spot, rd, rf = mkt.spot, mkt.rd, mkt.rf
    j = np.arange(1, n + 1)
    u = eta * (j - 1)
    eps = 2.0 * math.pi / (n * eta)
    b = 0.5 * n * eps
    if k_required is not None and b < abs(k_required):
        warnings.warn(
            f"log-strike half-width {b:.4f} does not cover |k|={abs(k_required):.4f}",
            CoverageWarning, stacklevel=2)
    weights = (eta / 3.0) * (3.0 + (-1.0) ** j - (j == 1))
    psi = char_fn(-u - 0.5j, maturity, params) / (u * u + 0.25)
    transform = np.fft.fft(np.exp(1j * b * u) * psi * weights)
    log_strikes = -b + eps * (j - 1)
    strikes = spot * np.exp((rd - rf) * maturity - log_strikes)
    prefactor = np.sqrt(spot * strikes) * math.exp(-0.5 * (rd + rf) * maturity) / math.pi
    prices = spot * math.exp(-rf * maturity) - prefactor * transform.real
    return FftGrid(log_strikes=log_strikes, strikes=strikes, prices=prices)
