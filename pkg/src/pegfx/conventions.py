"""FX smile quote mechanics: ATM/RR/BF decomposition and strike recovery.

Quotes per tenor arrive as (ATM, 25RR, 25BF, 10RR, 10BF) volatilities. These
decompose linearly into five pillar vols; the pillar strikes follow from the
premium-adjusted delta conventions (spot basis up to 6M, forward basis at 1Y)
with ATM defined by the delta-neutral straddle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from scipy.optimize import brentq

from .black_scholes import MarketContext, norm_cdf
from .errors import ConventionError, DataError, DomainError

__all__ = [
    "TENOR_YEARS",
    "DeltaConvention",
    "convention_for_tenor",
    "QuoteRow",
    "PillarVols",
    "PillarQuote",
    "SmilePillars",
    "pillar_vols",
    "pa_delta",
    "atm_strike",
    "strike_from_delta",
    "build_pillars",
    "read_quote_csv",
    "write_quote_csv",
]

#: fixed tenor year fractions (trading-day convention for 1D)
TENOR_YEARS = {
    "1D": 1.0 / 260.0,
    "1W": 1.0 / 52.0,
    "1M": 1.0 / 12.0,
    "3M": 1.0 / 4.0,
    "6M": 1.0 / 2.0,
    "1Y": 1.0,
}

QUOTE_CSV_HEADER = ["date", "spot", "rd", "rf", "atm", "rr25", "bf25", "rr10", "bf10"]

PILLAR_LABELS = ("10P", "25P", "ATM", "25C", "10C")


class DeltaConvention(str, Enum):
    SPOT_PA = "spot_premium_adjusted"
    FORWARD_PA = "forward_premium_adjusted"


_TENOR_CONVENTION = {
    "1D": DeltaConvention.SPOT_PA,
    "1W": DeltaConvention.SPOT_PA,
    "1M": DeltaConvention.SPOT_PA,
    "3M": DeltaConvention.SPOT_PA,
    "6M": DeltaConvention.SPOT_PA,
    "1Y": DeltaConvention.FORWARD_PA,
}


def convention_for_tenor(tenor: str) -> DeltaConvention:
    try:
        return _TENOR_CONVENTION[tenor]
    except KeyError:
        raise DataError(f"unknown tenor {tenor!r}") from None


@dataclass(frozen=True)
class QuoteRow:
    """One market snapshot for a tenor: spot, carry pair and smile quotes."""

    date: str
    spot: float
    rd: float
    rf: float
    atm: float
    rr25: float
    bf25: float
    rr10: float
    bf10: float
    tenor: str

    def __post_init__(self):
        if self.tenor not in TENOR_YEARS:
            raise DataError(f"tenor must be one of {sorted(TENOR_YEARS)}, got {self.tenor!r}")
        if not (math.isfinite(self.spot) and self.spot > 0.0):
            raise DataError(f"spot must be positive, got {self.spot!r}")
        if not (math.isfinite(self.atm) and self.atm > 0.0):
            raise DataError(f"atm vol must be positive, got {self.atm!r}")

    @property
    def maturity(self) -> float:
        return TENOR_YEARS[self.tenor]

    def market(self) -> MarketContext:
        return MarketContext(spot=self.spot, rd=self.rd, rf=self.rf)


@dataclass(frozen=True)
class PillarVols:
    p10: float
    p25: float
    atm: float
    c25: float
    c10: float

    def as_tuple(self):
        return (self.p10, self.p25, self.atm, self.c25, self.c10)


def pillar_vols(row: QuoteRow) -> PillarVols:
    """Decompose ATM/RR/BF quotes into the five pillar volatilities:
    sigma_C = atm + bf + rr/2 and sigma_P = atm + bf - rr/2 per wing."""
    vols = PillarVols(
        p10=row.atm + row.bf10 - 0.5 * row.rr10,
        p25=row.atm + row.bf25 - 0.5 * row.rr25,
        atm=row.atm,
        c25=row.atm + row.bf25 + 0.5 * row.rr25,
        c10=row.atm + row.bf10 + 0.5 * row.rr10,
    )
    for label, vol in zip(PILLAR_LABELS, vols.as_tuple()):
        if not (math.isfinite(vol) and vol > 0.0):
            raise DataError(f"pillar {label} vol is non-positive: {vol}")
    return vols


# ---------------------------------------------------------------------------
# premium-adjusted deltas and strike recovery
# ---------------------------------------------------------------------------

def _d_minus(spot, strike, maturity, rd, rf, vol):
    total_vol = vol * math.sqrt(maturity)
    return (math.log(spot / strike) + (rd - rf) * maturity) / total_vol - 0.5 * total_vol


def pa_delta(strike: float, side: str, vol: float, mkt: MarketContext,
             maturity: float, convention: DeltaConvention) -> float:
    """Premium-adjusted delta of the option at (strike, vol)."""
    d_minus = _d_minus(mkt.spot, strike, maturity, mkt.rd, mkt.rf, vol)
    if convention == DeltaConvention.SPOT_PA:
        scale = (strike / mkt.spot) * math.exp(-mkt.rd * maturity)
    else:
        scale = strike / mkt.forward(maturity)
    if side == "call":
        return scale * norm_cdf(d_minus)
    if side == "put":
        return -scale * norm_cdf(-d_minus)
    raise DomainError(f"side must be 'call' or 'put', got {side!r}")


def atm_strike(vol: float, mkt: MarketContext, maturity: float,
               convention: DeltaConvention) -> float:
    """Delta-neutral straddle strike under premium-adjusted conventions:
    F * exp(-vol^2 T / 2) (both bases)."""
    del convention  # same strike on the spot and forward pa bases
    return mkt.forward(maturity) * math.exp(-0.5 * vol * vol * maturity)


def strike_from_delta(target_delta: float, side: str, vol: float,
                      mkt: MarketContext, maturity: float,
                      convention: DeltaConvention) -> float:
    """Strike whose convention delta equals the target (to 1e-10).

    ``target_delta`` is the unsigned quote magnitude (0.25 for a 25-delta put).
    Premium-adjusted call delta is non-monotone in strike; the root on the
    right-most branch (largest strike) is taken, bracketed between the ATM
    strike and ATM * exp(10 vol sqrt(T)). ``side='atm'`` returns the
    delta-neutral straddle strike directly.
    """
    if not (math.isfinite(vol) and vol > 0.0):
        raise DomainError(f"vol must be positive, got {vol!r}")
    if not maturity > 0.0:
        raise DomainError(f"maturity must be positive, got {maturity!r}")
    k_atm = atm_strike(vol, mkt, maturity, convention)
    if side == "atm":
        return k_atm
    if side not in ("call", "put"):
        raise DomainError(f"side must be 'call', 'put' or 'atm', got {side!r}")
    if not 0.0 < target_delta < 1.0:
        raise ConventionError(f"target delta must lie in (0, 1), got {target_delta}")

    width = math.exp(10.0 * vol * math.sqrt(maturity))
    signed_target = target_delta if side == "call" else -target_delta

    def objective(k):
        return pa_delta(k, side, vol, mkt, maturity, convention) - signed_target

    if side == "call":
        lo, hi = k_atm, k_atm * width
        f_lo, f_hi = objective(lo), objective(hi)
        if f_lo < 0.0:
            raise ConventionError(
                f"call delta target {target_delta} exceeds the right-branch range "
                f"(delta at the ATM strike is {f_lo + signed_target:.6f})")
    else:
        lo, hi = k_atm / width, k_atm
        f_lo, f_hi = objective(lo), objective(hi)
    if f_lo * f_hi > 0.0:
        raise ConventionError(
            f"no {side} strike with delta {signed_target} in bracket "
            f"[{lo:.6g}, {hi:.6g}] under {convention.value}")
    strike = brentq(objective, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=200)
    if abs(objective(strike)) > 1e-10:
        raise ConventionError(
            f"strike solve left delta residual {objective(strike):.3e}")
    return strike


# ---------------------------------------------------------------------------
# pillar assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PillarQuote:
    label: str
    target_delta: float   # 0.0 marks the delta-neutral ATM pillar
    side: str             # 'put', 'atm' or 'call'
    vol: float
    strike: float


@dataclass(frozen=True)
class SmilePillars:
    """The five pillar quotes of one tenor, strikes strictly increasing."""

    tenor: str
    maturity: float
    convention: DeltaConvention
    pillars: tuple[PillarQuote, ...]

    @property
    def strikes(self) -> tuple[float, ...]:
        return tuple(p.strike for p in self.pillars)

    @property
    def vols(self) -> tuple[float, ...]:
        return tuple(p.vol for p in self.pillars)


def build_pillars(row: QuoteRow) -> SmilePillars:
    """Pillar vols plus recovered strikes for a quote row, ordering-checked."""
    vols = pillar_vols(row)
    maturity = row.maturity
    convention = convention_for_tenor(row.tenor)
    mkt = row.market()
    spec = [
        ("10P", 0.10, "put", vols.p10),
        ("25P", 0.25, "put", vols.p25),
        ("ATM", 0.0, "atm", vols.atm),
        ("25C", 0.25, "call", vols.c25),
        ("10C", 0.10, "call", vols.c10),
    ]
    pillars = tuple(
        PillarQuote(label=label, target_delta=target, side=side, vol=vol,
                    strike=strike_from_delta(target, side, vol, mkt, maturity, convention))
        for label, target, side, vol in spec)
    strikes = [p.strike for p in pillars]
    if any(a >= b for a, b in zip(strikes[:-1], strikes[1:])):
        raise DataError(
            f"quote row {row.date}/{row.tenor} is internally inconsistent: "
            f"pillar strikes not strictly increasing: {strikes}")
    return SmilePillars(tenor=row.tenor, maturity=maturity,
                        convention=convention, pillars=pillars)


# ---------------------------------------------------------------------------
# CSV ingestion (one file per tenor, Table-style layout)
# ---------------------------------------------------------------------------

def read_quote_csv(path, tenor: str) -> list[QuoteRow]:
    """Read a per-tenor quote file with header ``date,spot,rd,rf,atm,rr25,bf25,rr10,bf10``."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty", row=1) from None
        if [h.strip() for h in header] != QUOTE_CSV_HEADER:
            raise DataError(
                f"{path} header {header} does not match {QUOTE_CSV_HEADER}", row=1)
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not f.strip() for f in record):
                continue
            if len(record) != len(QUOTE_CSV_HEADER):
                raise DataError(f"{path}:{lineno}: expected "
                                f"{len(QUOTE_CSV_HEADER)} fields, got {len(record)}",
                                row=lineno)
            try:
                values = [float(f) for f in record[1:]]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}", row=lineno) from None
            try:
                rows.append(QuoteRow(record[0].strip(), *values, tenor=tenor))
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}", row=lineno) from None
    return rows


def write_quote_csv(rows, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(QUOTE_CSV_HEADER)
        for row in rows:
            writer.writerow([row.date, repr(row.spot), repr(row.rd), repr(row.rf),
                             repr(row.atm), repr(row.rr25), repr(row.bf25),
                             repr(row.rr10), repr(row.bf10)])
