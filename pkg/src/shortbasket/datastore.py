"""Lending dataset records and deterministic CSV interchange.

A dataset is one observations table (one row per security per trading
day) plus one static profile table, joined on ``security_id``. Simulated
and broker-sourced data flow through the same loader so the scoring
pipeline never knows which one it got.

CSV schemas
-----------
observations.csv::

    date,security_id,price,availability,short_interest,volume,loan_balance,loan_rate,alt_loan_rate

profiles.csv::

    security_id,market,buy_rating,beta

Dates are ISO-8601, decimals use ``.``. Floats are written with
``repr()`` so values round-trip exactly and identical datasets always
produce identical bytes. Rows are ordered by (security_id, date).
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import OrderError, SchemaError

OBSERVATIONS_FILENAME = "observations.csv"
PROFILES_FILENAME = "profiles.csv"

OBSERVATION_COLUMNS = (
    "date",
    "security_id",
    "price",
    "availability",
    "short_interest",
    "volume",
    "loan_balance",
    "loan_rate",
    "alt_loan_rate",
)
PROFILE_COLUMNS = ("security_id", "market", "buy_rating", "beta")


@dataclass(frozen=True)
class LendingObservation:
    """One security-day record from a lending desk.

    Shares are stored for quantities (availability, short interest,
    volume); USD views such as SI * price are derived downstream. Rates
    are annualized fractions. The alternate loan rate (charged to end
    borrowers) is never below the sourcing loan rate.
    """

    date: dt.date
    security_id: str
    price: float
    availability: float
    short_interest: float
    volume: float
    loan_balance: float
    loan_rate: float
    alt_loan_rate: float

    def __post_init__(self) -> None:
        if self.price <= 0:
            raise ValueError(f"price must be positive, got {self.price} ({self.security_id} {self.date})")
        for name in ("availability", "short_interest", "volume", "loan_balance", "loan_rate"):
            if getattr(self, name) < 0:
                raise ValueError(
                    f"{name} must be non-negative, got {getattr(self, name)} ({self.security_id} {self.date})"
                )
        if self.alt_loan_rate < self.loan_rate:
            raise ValueError(
                f"alt_loan_rate {self.alt_loan_rate} < loan_rate {self.loan_rate} "
                f"({self.security_id} {self.date})"
            )


@dataclass(frozen=True)
class SecurityProfile:
    """Static attributes used by the screener filters."""

    security_id: str
    market: str
    buy_rating: float
    beta: float

    def __post_init__(self) -> None:
        if not 1.0 <= self.buy_rating <= 5.0:
            raise ValueError(f"buy_rating must be in [1, 5], got {self.buy_rating} ({self.security_id})")


@dataclass(frozen=True)
class SecuritySeries:
    """Gap-free, date-sorted observation history for one security."""

    security_id: str
    observations: tuple[LendingObservation, ...]

    def __post_init__(self) -> None:
        prev: dt.date | None = None
        for obs in self.observations:
            if obs.security_id != self.security_id:
                raise ValueError(
                    f"observation for {obs.security_id} placed in series {self.security_id}"
                )
            if prev is not None and obs.date <= prev:
                raise OrderError(
                    f"dates must be strictly increasing for {self.security_id}: "
                    f"{obs.date} follows {prev}"
                )
            prev = obs.date

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def dates(self) -> list[dt.date]:
        return [obs.date for obs in self.observations]

    def column(self, name: str) -> list[float]:
        """Values of one numeric field across the series, in date order."""
        return [getattr(obs, name) for obs in self.observations]


@dataclass(frozen=True)
class LendingDataset:
    """All series plus profiles; immutable once built, ordered by id."""

    series: tuple[SecuritySeries, ...]
    profiles: tuple[SecurityProfile, ...]

    def __post_init__(self) -> None:
        series_ids = [s.security_id for s in self.series]
        profile_ids = [p.security_id for p in self.profiles]
        if series_ids != sorted(series_ids) or profile_ids != sorted(profile_ids):
            raise ValueError("dataset series and profiles must be sorted by security_id")
        if set(series_ids) != set(profile_ids):
            missing = sorted(set(series_ids) ^ set(profile_ids))
            raise SchemaError(f"series and profiles do not cover the same securities: {missing}")

    @property
    def security_ids(self) -> list[str]:
        return [s.security_id for s in self.series]

    def profile_map(self) -> dict[str, SecurityProfile]:
        return {p.security_id: p for p in self.profiles}

    def get_series(self, security_id: str) -> SecuritySeries:
        for s in self.series:
            if s.security_id == security_id:
                return s
        raise KeyError(security_id)


def build_dataset(
    series: Iterable[SecuritySeries], profiles: Iterable[SecurityProfile]
) -> LendingDataset:
    """Assemble a dataset, sorting both tables by security_id."""
    return LendingDataset(
        series=tuple(sorted(series, key=lambda s: s.security_id)),
        profiles=tuple(sorted(profiles, key=lambda p: p.security_id)),
    )


def _fmt(value: float) -> str:
    # repr() is the shortest exact representation: deterministic bytes
    # and lossless float round-trips.
    return repr(float(value))


def atomic_write_text(path: Path, text: str) -> None:
    """Write the full content or nothing: temp file + atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="")
    os.replace(tmp, path)


def export_csv(dataset: LendingDataset, out_dir: Path | str) -> tuple[Path, Path]:
    """Write observations.csv and profiles.csv under ``out_dir``.

    Row order (security_id, then date) and float formatting are fixed,
    so equal datasets serialize to identical bytes.
    """
    out_dir = Path(out_dir)
    obs_buf = io.StringIO()
    writer = csv.writer(obs_buf, lineterminator="\n")
    writer.writerow(OBSERVATION_COLUMNS)
    for series in dataset.series:
        for obs in series.observations:
            writer.writerow(
                [
                    obs.date.isoformat(),
                    obs.security_id,
                    _fmt(obs.price),
                    _fmt(obs.availability),
                    _fmt(obs.short_interest),
                    _fmt(obs.volume),
                    _fmt(obs.loan_balance),
                    _fmt(obs.loan_rate),
                    _fmt(obs.alt_loan_rate),
                ]
            )

    prof_buf = io.StringIO()
    writer = csv.writer(prof_buf, lineterminator="\n")
    writer.writerow(PROFILE_COLUMNS)
    for prof in dataset.profiles:
        writer.writerow([prof.security_id, prof.market, _fmt(prof.buy_rating), _fmt(prof.beta)])

    obs_path = out_dir / OBSERVATIONS_FILENAME
    prof_path = out_dir / PROFILES_FILENAME
    atomic_write_text(obs_path, obs_buf.getvalue())
    atomic_write_text(prof_path, prof_buf.getvalue())
    return obs_path, prof_path


def _check_header(reader: csv.DictReader, expected: Sequence[str], path: Path) -> None:
    got = tuple(reader.fieldnames or ())
    if got != tuple(expected):
        missing = [c for c in expected if c not in got]
        extra = [c for c in got if c not in expected]
        raise SchemaError(
            f"{path}: header mismatch (missing={missing}, unexpected={extra}, "
            f"expected order {list(expected)})"
        )


def _parse_float(raw: str, column: str, path: Path, line: int) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ValueError(f"{path}: row {line}: column {column!r} is not numeric: {raw!r}") from exc


def ingest_csv(data_dir: Path | str) -> LendingDataset:
    """Load and validate a dataset directory written by :func:`export_csv`.

    Every malformed row is reported with its file line number. No row is
    ever silently dropped: the result holds exactly the rows of the
    input, or an error is raised.
    """
    data_dir = Path(data_dir)
    obs_path = data_dir / OBSERVATIONS_FILENAME
    prof_path = data_dir / PROFILES_FILENAME
    for p in (obs_path, prof_path):
        if not p.exists():
            raise SchemaError(f"missing input file: {p}")

    per_security: dict[str, list[LendingObservation]] = {}
    with open(obs_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader, OBSERVATION_COLUMNS, obs_path)
        for line, row in enumerate(reader, start=2):
            if any(row.get(c) is None for c in OBSERVATION_COLUMNS):
                raise SchemaError(f"{obs_path}: row {line}: wrong number of fields")
            try:
                date = dt.date.fromisoformat(row["date"])
            except ValueError as exc:
                raise ValueError(f"{obs_path}: row {line}: bad date {row['date']!r}") from exc
            values = {c: _parse_float(row[c], c, obs_path, line) for c in OBSERVATION_COLUMNS[2:]}
            try:
                obs = LendingObservation(date=date, security_id=row["security_id"], **values)
            except ValueError as exc:
                raise ValueError(f"{obs_path}: row {line}: {exc}") from None
            per_security.setdefault(obs.security_id, []).append(obs)

    series = []
    for security_id, observations in per_security.items():
        try:
            series.append(SecuritySeries(security_id, tuple(observations)))
        except OrderError as exc:
            raise OrderError(f"{obs_path}: {exc}") from None

    profiles = []
    seen: set[str] = set()
    with open(prof_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader, PROFILE_COLUMNS, prof_path)
        for line, row in enumerate(reader, start=2):
            if any(row.get(c) is None for c in PROFILE_COLUMNS):
                raise SchemaError(f"{prof_path}: row {line}: wrong number of fields")
            if row["security_id"] in seen:
                raise SchemaError(f"{prof_path}: row {line}: duplicate profile for {row['security_id']}")
            seen.add(row["security_id"])
            try:
                profiles.append(
                    SecurityProfile(
                        security_id=row["security_id"],
                        market=row["market"],
                        buy_rating=_parse_float(row["buy_rating"], "buy_rating", prof_path, line),
                        beta=_parse_float(row["beta"], "beta", prof_path, line),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{prof_path}: row {line}: {exc}") from None

    return build_dataset(series, profiles)


def load_profiles(path: Path | str) -> Mapping[str, SecurityProfile]:
    """Read a standalone profiles.csv into an id-keyed mapping."""
    path = Path(path)
    profiles: dict[str, SecurityProfile] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader, PROFILE_COLUMNS, path)
        for line, row in enumerate(reader, start=2):
            profiles[row["security_id"]] = SecurityProfile(
                security_id=row["security_id"],
                market=row["market"],
                buy_rating=_parse_float(row["buy_rating"], "buy_rating", path, line),
                beta=_parse_float(row["beta"], "beta", path, line),
            )
    return profiles
