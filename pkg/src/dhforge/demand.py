"""Annual heat demand completion and hourly load profile synthesis.

Profiles follow the sigmoid standard-load-profile family: a daily
factor h(theta) from the daily mean ambient temperature, a weekday
factor, and hour-of-day factors per temperature band. The shipped
coefficients are plausible defaults meant to be overridden per
project, not measured truth.
"""

from __future__ import annotations

import datetime
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .ingest import BuildingRecord

HOURS_PER_YEAR = 8760
DAYS_PER_YEAR = 365

#: Default specific annual demand per usage type, kWh/(m^2 a).
DEFAULT_SPECIFIC_DEMAND = {
    "residential": 120.0,
    "office": 100.0,
    "commercial": 110.0,
    "industrial": 140.0,
    "other": 110.0,
}


@dataclass(frozen=True)
class HourBand:
    """24 hour-of-day factors applying to days with mean temperature
    at or below ``upper_c`` (and above the previous band's bound)."""

    upper_c: float
    factors: tuple[float, ...]

    def __post_init__(self):
        if len(self.factors) != 24:
            raise ValueError(f"hour band needs 24 factors, got {len(self.factors)}")
        if any(f <= 0.0 for f in self.factors):
            raise ValueError("hour factors must be positive")


@dataclass(frozen=True)
class SlpParams:
    """Sigmoid coefficients plus weekday and hour-of-day shape factors."""

    a: float
    b: float
    c: float
    d: float
    theta0: float = 40.0
    weekday_factors: tuple[float, ...] = (1.0,) * 7  # Monday..Sunday
    hour_bands: tuple[HourBand, ...] = (HourBand(math.inf, (1.0,) * 24),)

    def __post_init__(self):
        if len(self.weekday_factors) != 7:
            raise ValueError("need 7 weekday factors (Monday..Sunday)")
        if any(f <= 0.0 for f in self.weekday_factors):
            raise ValueError("weekday factors must be positive")
        if not self.hour_bands:
            raise ValueError("need at least one hour band")
        uppers = [band.upper_c for band in self.hour_bands]
        if uppers != sorted(uppers) or uppers[-1] != math.inf:
            raise ValueError("hour bands must be sorted with a final +inf band")
        for theta in range(-20, 41):
            h = sigmoid_h(float(theta), self)
            if not (math.isfinite(h) and h > 0.0):
                raise ValueError(f"daily factor not positive at {theta} degC: {h}")

    def band_for(self, theta_day: float) -> HourBand:
        for band in self.hour_bands:
            if theta_day <= band.upper_c:
                return band
        return self.hour_bands[-1]


def sigmoid_h(theta_day: float, p: SlpParams) -> float:
    """Daily demand factor h(theta) = A / (1 + (B / (theta - theta0))^C) + D.

    theta - theta0 is clamped to at most -0.1 degC; the reference
    temperature sits above any daily mean in scope, and the clamp
    removes the pole without affecting realistic inputs.
    """
    delta = min(theta_day - p.theta0, -0.1)
    return p.a / (1.0 + (p.b / delta) ** p.c) + p.d


def _hour_shape(hours: tuple[float, ...]) -> tuple[float, ...]:
    total = sum(hours)
    return tuple(h / total for h in hours)


def _household_hours(morning: float, evening: float) -> tuple[float, ...]:
    base = [0.5, 0.4, 0.4, 0.4, 0.5, 0.8, 1.2, 1.5, 1.4, 1.2, 1.1, 1.0,
            1.0, 1.0, 1.0, 1.1, 1.3, 1.5, 1.6, 1.5, 1.3, 1.1, 0.8, 0.6]
    shaped = list(base)
    for h in (6, 7, 8):
        shaped[h] *= morning
    for h in (17, 18, 19, 20):
        shaped[h] *= evening
    return tuple(shaped)


def _office_hours(day_boost: float) -> tuple[float, ...]:
    base = [0.4, 0.4, 0.4, 0.4, 0.5, 0.9, 1.4, 1.6, 1.6, 1.5, 1.4, 1.3,
            1.3, 1.3, 1.3, 1.2, 1.1, 0.9, 0.7, 0.6, 0.5, 0.5, 0.4, 0.4]
    return tuple(v * (day_boost if 6 <= h <= 17 else 1.0) for h, v in enumerate(base))


def _flat_hours() -> tuple[float, ...]:
    return (1.0,) * 24


DEFAULT_SLP_PARAMS: dict[str, SlpParams] = {
    "residential": SlpParams(
        a=3.1, b=-37.2, c=6.1, d=0.11,
        weekday_factors=(1.0, 1.0, 1.0, 1.0, 1.0, 1.03, 1.03),
        hour_bands=(
            HourBand(0.0, _household_hours(1.3, 1.2)),
            HourBand(15.0, _household_hours(1.15, 1.1)),
            HourBand(math.inf, _household_hours(1.0, 1.0)),
        ),
    ),
    "office": SlpParams(
        a=3.5, b=-35.0, c=6.5, d=0.05,
        weekday_factors=(1.1, 1.1, 1.1, 1.1, 1.1, 0.7, 0.5),
        hour_bands=(
            HourBand(0.0, _office_hours(1.25)),
            HourBand(15.0, _office_hours(1.1)),
            HourBand(math.inf, _office_hours(1.0)),
        ),
    ),
    "commercial": SlpParams(
        a=3.3, b=-36.0, c=6.2, d=0.08,
        weekday_factors=(1.05, 1.05, 1.05, 1.05, 1.05, 1.0, 0.6),
        hour_bands=(
            HourBand(0.0, _office_hours(1.2)),
            HourBand(15.0, _office_hours(1.05)),
            HourBand(math.inf, _office_hours(1.0)),
        ),
    ),
    "industrial": SlpParams(
        a=2.6, b=-34.0, c=5.5, d=0.30,
        weekday_factors=(1.05, 1.05, 1.05, 1.05, 1.05, 0.9, 0.8),
        hour_bands=(HourBand(math.inf, _flat_hours()),),
    ),
    "other": SlpParams(
        a=3.0, b=-36.0, c=6.0, d=0.10,
        weekday_factors=(1.0,) * 7,
        hour_bands=(
            HourBand(0.0, _household_hours(1.2, 1.1)),
            HourBand(math.inf, _household_hours(1.0, 1.0)),
        ),
    ),
}


class WeatherSeries:
    """8760 hourly ambient temperatures in degC."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (HOURS_PER_YEAR,):
            raise ValueError(f"weather series must have {HOURS_PER_YEAR} values, got {arr.shape}")
        if not np.all((arr >= -50.0) & (arr <= 60.0)):
            raise ValueError("weather temperatures outside [-50, 60] degC")
        self.values = arr

    def daily_means(self) -> np.ndarray:
        return self.values.reshape(DAYS_PER_YEAR, 24).mean(axis=1)


@dataclass
class DemandProfile:
    """Hourly heat demand, kWh per hour, summing to the annual demand."""

    values: np.ndarray
    year: int

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (HOURS_PER_YEAR,):
            raise ValueError(f"profile must have {HOURS_PER_YEAR} values, got {arr.shape}")
        if arr.min() < 0.0:
            raise ValueError("profile has negative values")
        self.values = arr

    def annual(self) -> float:
        return float(self.values.sum())


def complete_annual_demand(b: BuildingRecord, specific_demand: dict[str, float]) -> float:
    """Annual demand in kWh/a: the record's own value when present,
    otherwise floor area times the specific demand of its usage type."""
    if b.annual_demand is not None:
        return b.annual_demand
    if b.floor_area is not None:
        if b.usage_type not in specific_demand:
            raise InputError(
                f"building {b.id!r}: no specific demand configured for usage {b.usage_type!r}"
            )
        return b.floor_area * specific_demand[b.usage_type]
    raise InputError(f"building {b.id!r} has neither annual demand nor floor area")


def _weekday_indices(calendar_year: int) -> np.ndarray:
    first = datetime.date(calendar_year, 1, 1).weekday()  # Monday == 0
    return (first + np.arange(DAYS_PER_YEAR)) % 7


def build_profile(
    annual: float, weather: WeatherSeries, p: SlpParams, calendar_year: int
) -> DemandProfile:
    """Distribute an annual demand over 8760 hours.

    Daily weights come from the sigmoid factor times the weekday
    factor; each day spreads over its hours with the temperature
    band's hour factors. A single scale constant maps the raw shape to
    the annual total.
    """
    if annual < 0.0:
        raise ValueError(f"annual demand must be non-negative, got {annual}")
    daily_temps = weather.daily_means()
    h = np.array([sigmoid_h(t, p) for t in daily_temps])
    weekday = np.asarray(p.weekday_factors)[_weekday_indices(calendar_year)]
    hour_factors = np.array([p.band_for(t).factors for t in daily_temps])
    raw = (h * weekday)[:, None] * hour_factors
    flat = raw.ravel()
    values = flat * (annual / flat.sum())
    return DemandProfile(values=values, year=calendar_year)


def nominal_load(profile: DemandProfile) -> float:
    """Design load in kW: the peak hourly demand (kWh over one hour)."""
    return float(profile.values.max())


class BuildingProfiles:
    """Per-building profiles sharing one unit shape per usage type.

    Buildings of the same usage differ only by their annual demand, so
    the 8760-value arrays are materialized lazily from cached unit
    shapes instead of being stored per building. Subscripting by
    building id returns the hourly profile array.
    """

    def __init__(
        self,
        weather: WeatherSeries,
        slp_params: dict[str, SlpParams],
        calendar_year: int,
    ):
        self._weather = weather
        self._slp = slp_params
        self.calendar_year = calendar_year
        self._shapes: dict[str, np.ndarray] = {}
        self._annual: dict[str, float] = {}
        self._usage: dict[str, str] = {}

    def register(self, building_id: str, usage_type: str, annual: float) -> None:
        if usage_type not in self._slp:
            raise InputError(f"no SLP coefficients for usage type {usage_type!r}")
        self._annual[building_id] = annual
        self._usage[building_id] = usage_type

    def unit_shape(self, usage_type: str) -> np.ndarray:
        shape = self._shapes.get(usage_type)
        if shape is None:
            shape = build_profile(1.0, self._weather, self._slp[usage_type], self.calendar_year).values
            self._shapes[usage_type] = shape
        return shape

    def __contains__(self, building_id: str) -> bool:
        return building_id in self._annual

    def __getitem__(self, building_id: str) -> np.ndarray:
        return self._annual[building_id] * self.unit_shape(self._usage[building_id])

    def ids(self) -> list[str]:
        return sorted(self._annual)

    def peak(self, building_id: str) -> float:
        return float(self._annual[building_id] * self.unit_shape(self._usage[building_id]).max())

    def total(self) -> np.ndarray:
        out = np.zeros(HOURS_PER_YEAR)
        for bid in self.ids():
            out += self[bid]
        return out
