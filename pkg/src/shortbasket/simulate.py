"""Synthetic lending-market time series.

Each security gets seven daily series. Price, availability, short
interest, trading volume, and both loan rates follow geometric Brownian
motion with the exact log-normal step

    S[t+1] = S[t] * exp((mu - sigma^2 / 2) * dt + sigma * sqrt(dt) * Z)

so every value stays strictly positive with no discretization bias. The
loan balance is drawn per day as the absolute value of a normal
variable (folded normal), independent across days.

The per-security (start, drift, volatility) parameters are themselves
uniform draws from configured ranges, one range block per variable, so
a whole universe is reproducible from the range config plus one master
seed. Every (security, variable) pair owns two independent substreams,
one for the parameter draw and one for the path noise; nothing depends
on evaluation order.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .datastore import (
    LendingDataset,
    LendingObservation,
    SecurityProfile,
    SecuritySeries,
    build_dataset,
)
from .errors import MissingVariableRange
from .rng import NoiseStream

TRADING_DAYS_PER_YEAR = 252
DEFAULT_DT = 1.0 / TRADING_DAYS_PER_YEAR

# Stable channel order; substream ids are derived from these indices.
VARIABLES = (
    "price",
    "availability",
    "short_interest",
    "volume",
    "loan_balance",
    "loan_rate",
    "alt_loan_rate",
)
_VARIABLE_INDEX = {name: i for i, name in enumerate(VARIABLES)}
_PROFILE_CHANNEL = len(VARIABLES)
_PARAMS, _PATH = 0, 1

GBM_VARIABLES = tuple(v for v in VARIABLES if v != "loan_balance")

DEFAULT_MARKETS = ("JP", "HK", "TW", "KR", "SG")
DEFAULT_START_DATE = dt.date(2020, 1, 2)
DEFAULT_BUY_RATING_RANGE = (3.0, 5.0)
DEFAULT_BETA_RANGE = (1.0, 2.5)


@dataclass(frozen=True)
class SimulationSeedRange:
    """Uniform-draw bounds for one variable's (start, drift, volatility).

    For GBM variables the three slots are the initial level, annual
    drift, and annual volatility. For the loan balance the drift and
    volatility slots hold the mean and standard deviation (USD) of the
    underlying normal whose absolute value is sampled each day; the
    start slot is unused there and may be zero.
    """

    variable: str
    start_min: float
    start_max: float
    drift_min: float
    drift_max: float
    vol_min: float
    vol_max: float

    def __post_init__(self) -> None:
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown variable {self.variable!r}; expected one of {VARIABLES}")
        if self.start_min > self.start_max:
            raise ValueError(f"{self.variable}: start_min > start_max")
        if self.drift_min > self.drift_max:
            raise ValueError(f"{self.variable}: drift_min > drift_max")
        if not 0 <= self.vol_min <= self.vol_max:
            raise ValueError(f"{self.variable}: need 0 <= vol_min <= vol_max")
        if self.variable in GBM_VARIABLES and self.start_min <= 0:
            raise ValueError(f"{self.variable}: start_min must be > 0 for GBM variables")


@dataclass(frozen=True)
class GbmParams:
    """Initial level, annual drift, and annual volatility of one series."""

    s0: float
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if self.s0 <= 0:
            raise ValueError(f"s0 must be positive, got {self.s0}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")


@dataclass(frozen=True)
class FoldedNormalParams:
    """Mean and std (USD) of the normal underlying the daily |N| draws."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")


def draw_params(
    seed_range: SimulationSeedRange, stream: NoiseStream
) -> GbmParams | FoldedNormalParams:
    """Draw one security's process parameters from a seed range.

    GBM variables draw (s0, mu, sigma) in that order; the loan balance
    draws (mu, sigma) from the drift and volatility slots. Degenerate
    [x, x] intervals yield x exactly.
    """
    gen = stream.generator()
    if seed_range.variable == "loan_balance":
        mu = gen.uniform(seed_range.drift_min, seed_range.drift_max)
        sigma = gen.uniform(seed_range.vol_min, seed_range.vol_max)
        return FoldedNormalParams(mu=mu, sigma=sigma)
    s0 = gen.uniform(seed_range.start_min, seed_range.start_max)
    mu = gen.uniform(seed_range.drift_min, seed_range.drift_max)
    sigma = gen.uniform(seed_range.vol_min, seed_range.vol_max)
    return GbmParams(s0=s0, mu=mu, sigma=sigma)


def simulate_gbm(
    params: GbmParams, n_days: int, dt_step: float, stream: NoiseStream
) -> np.ndarray:
    """Exact-discretization GBM path of ``n_days`` values starting at s0."""
    if n_days < 1:
        raise ValueError(f"n_days must be >= 1, got {n_days}")
    if dt_step <= 0:
        raise ValueError(f"dt must be positive, got {dt_step}")
    out = np.empty(n_days, dtype=np.float64)
    out[0] = params.s0
    if n_days > 1:
        z = stream.generator().standard_normal(n_days - 1)
        log_steps = (params.mu - 0.5 * params.sigma**2) * dt_step + params.sigma * np.sqrt(dt_step) * z
        out[1:] = params.s0 * np.exp(np.cumsum(log_steps))
    return out


def simulate_abs_normal(
    params: FoldedNormalParams, n_days: int, stream: NoiseStream
) -> np.ndarray:
    """Independent daily |N(mu, sigma^2)| draws (folded normal)."""
    if n_days < 1:
        raise ValueError(f"n_days must be >= 1, got {n_days}")
    gen = stream.generator()
    return np.abs(gen.normal(params.mu, params.sigma, size=n_days))


def trading_dates(start_date: dt.date, n_days: int) -> list[dt.date]:
    """``n_days`` consecutive weekdays starting at or after ``start_date``."""
    dates: list[dt.date] = []
    day = start_date
    while len(dates) < n_days:
        if day.weekday() < 5:
            dates.append(day)
        day += dt.timedelta(days=1)
    return dates


def _security_id(index: int, n_securities: int) -> str:
    width = max(4, len(str(n_securities)))
    return f"SEC{index + 1:0{width}d}"


def _as_range_map(
    seed_config: Iterable[SimulationSeedRange] | Mapping[str, SimulationSeedRange],
) -> dict[str, SimulationSeedRange]:
    if isinstance(seed_config, Mapping):
        ranges = dict(seed_config)
    else:
        ranges = {r.variable: r for r in seed_config}
    missing = [v for v in VARIABLES if v not in ranges]
    if missing:
        raise MissingVariableRange(f"seed config lacks ranges for: {missing}")
    return ranges


def simulate_security(
    seed_config: Iterable[SimulationSeedRange] | Mapping[str, SimulationSeedRange],
    security_index: int,
    n_securities: int,
    n_days: int,
    master_seed: int,
    *,
    dt_step: float = DEFAULT_DT,
    start_date: dt.date = DEFAULT_START_DATE,
    markets: tuple[str, ...] = DEFAULT_MARKETS,
    buy_rating_range: tuple[float, float] = DEFAULT_BUY_RATING_RANGE,
    beta_range: tuple[float, float] = DEFAULT_BETA_RANGE,
) -> tuple[SecuritySeries, SecurityProfile]:
    """Simulate one security, independent of all others.

    Depends only on ``(master_seed, security_index)`` plus the config,
    so securities can be generated in any order or in parallel and
    merged by index.
    """
    ranges = _as_range_map(seed_config)
    root = NoiseStream(master_seed)
    columns: dict[str, np.ndarray] = {}
    for variable in VARIABLES:
        channel = root.child(security_index, _VARIABLE_INDEX[variable])
        params = draw_params(ranges[variable], channel.child(_PARAMS))
        if variable == "loan_balance":
            assert isinstance(params, FoldedNormalParams)
            columns[variable] = simulate_abs_normal(params, n_days, channel.child(_PATH))
        else:
            assert isinstance(params, GbmParams)
            columns[variable] = simulate_gbm(params, n_days, dt_step, channel.child(_PATH))

    # The end-borrower rate can never undercut the sourcing rate; floor
    # the independently simulated alternate-rate path at the loan rate.
    columns["alt_loan_rate"] = np.maximum(columns["alt_loan_rate"], columns["loan_rate"])

    security_id = _security_id(security_index, n_securities)
    dates = trading_dates(start_date, n_days)
    observations = tuple(
        LendingObservation(
            date=dates[t],
            security_id=security_id,
            price=float(columns["price"][t]),
            availability=float(columns["availability"][t]),
            short_interest=float(columns["short_interest"][t]),
            volume=float(columns["volume"][t]),
            loan_balance=float(columns["loan_balance"][t]),
            loan_rate=float(columns["loan_rate"][t]),
            alt_loan_rate=float(columns["alt_loan_rate"][t]),
        )
        for t in range(n_days)
    )

    gen = root.child(security_index, _PROFILE_CHANNEL).generator()
    profile = SecurityProfile(
        security_id=security_id,
        market=markets[security_index % len(markets)],
        buy_rating=float(gen.uniform(*buy_rating_range)),
        beta=float(gen.uniform(*beta_range)),
    )
    return SecuritySeries(security_id, observations), profile


def simulate_universe(
    seed_config: Iterable[SimulationSeedRange] | Mapping[str, SimulationSeedRange],
    n_securities: int,
    n_days: int,
    master_seed: int,
    *,
    dt_step: float = DEFAULT_DT,
    start_date: dt.date = DEFAULT_START_DATE,
    markets: tuple[str, ...] = DEFAULT_MARKETS,
    buy_rating_range: tuple[float, float] = DEFAULT_BUY_RATING_RANGE,
    beta_range: tuple[float, float] = DEFAULT_BETA_RANGE,
) -> LendingDataset:
    """Simulate a whole universe; deterministic given the master seed."""
    if n_securities < 1:
        raise ValueError(f"n_securities must be >= 1, got {n_securities}")
    ranges = _as_range_map(seed_config)
    series = []
    profiles = []
    for i in range(n_securities):
        s, p = simulate_security(
            ranges,
            i,
            n_securities,
            n_days,
            master_seed,
            dt_step=dt_step,
            start_date=start_date,
            markets=markets,
            buy_rating_range=buy_rating_range,
            beta_range=beta_range,
        )
        series.append(s)
        profiles.append(p)
    return build_dataset(series, profiles)
