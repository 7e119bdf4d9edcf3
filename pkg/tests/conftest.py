"""Shared builders for hand-crafted rows, series, and datasets."""

from __future__ import annotations

import datetime as dt

import pytest

from shortbasket.datastore import (
    LendingDataset,
    LendingObservation,
    SecurityProfile,
    SecuritySeries,
    build_dataset,
)
from shortbasket.scoring import DerivedFactors, ShortScoreRow
from shortbasket.simulate import trading_dates

START = dt.date(2021, 1, 4)


def make_factors(**overrides) -> DerivedFactors:
    base = dict(
        e_lr=0.05,
        sigma_lr=0.01,
        dtc=6.0,
        lbg=1.5,
        ma_si=2_000_000.0,
        ma_la=50_000.0,
        si_usd=200_000_000.0,
        la_usd=5_000_000.0,
        adv=300_000.0,
    )
    base.update(overrides)
    return DerivedFactors(**base)


def make_row(security_id: str = "SEC0001", **overrides) -> ShortScoreRow:
    factors = overrides.pop("factors", None) or make_factors(**overrides.pop("factor_overrides", {}))
    base = dict(
        date=START,
        security_id=security_id,
        flavor="ma",
        price=100.0,
        volume_view=300_000.0,
        loan_rate=0.05,
        alt_loan_rate=0.06,
        loan_balance_start=1_000_000.0,
        loan_balance_end=1_500_000.0,
        score_one=3.0,
        score_two=120.0,
        score_three=720.0,
        score_four=1080.0,
        factors=factors,
        excluded=False,
        reason=None,
    )
    base.update(overrides)
    return ShortScoreRow(**base)


def make_profile(security_id: str = "SEC0001", **overrides) -> SecurityProfile:
    base = dict(security_id=security_id, market="JP", buy_rating=4.5, beta=1.8)
    base.update(overrides)
    return SecurityProfile(**base)


def series_from_columns(
    security_id: str,
    n_days: int,
    *,
    price=100.0,
    availability=50_000.0,
    short_interest=2_000_000.0,
    volume=300_000.0,
    loan_balance=1_000_000.0,
    loan_rate=0.05,
    alt_loan_rate=None,
) -> SecuritySeries:
    """Build a series from scalars or per-day sequences."""

    def at(value, t):
        return value[t] if isinstance(value, (list, tuple)) else value

    dates = trading_dates(START, n_days)
    observations = []
    for t in range(n_days):
        lr = at(loan_rate, t)
        alt = at(alt_loan_rate, t) if alt_loan_rate is not None else lr * 1.2
        observations.append(
            LendingObservation(
                date=dates[t],
                security_id=security_id,
                price=at(price, t),
                availability=at(availability, t),
                short_interest=at(short_interest, t),
                volume=at(volume, t),
                loan_balance=at(loan_balance, t),
                loan_rate=lr,
                alt_loan_rate=alt,
            )
        )
    return SecuritySeries(security_id, tuple(observations))


def dataset_from_series(*series: SecuritySeries, profiles=None) -> LendingDataset:
    if profiles is None:
        profiles = [make_profile(s.security_id) for s in series]
    return build_dataset(series, profiles)


@pytest.fixture
def tiny_dataset() -> LendingDataset:
    """Three constant-ish securities over 70 trading days."""
    return dataset_from_series(
        series_from_columns("SEC0001", 70, loan_rate=0.05),
        series_from_columns("SEC0002", 70, loan_rate=0.03, price=50.0),
        series_from_columns("SEC0003", 70, loan_rate=0.08, short_interest=4_000_000.0),
    )
