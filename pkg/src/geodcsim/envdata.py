"""Exogenous time-series handling: loaders, interpolation, psychrometrics, synthetic data.

Electricity prices arrive as hourly CSV in USD/MWh, grid carbon intensity as hourly
CSV in gCO2eq/kWh, and weather as JSON with arrays under an ``hourly`` key. Series
are validated onto a strict hourly grid at load time (short gaps forward-filled) and
queried with linear interpolation between native points. Queries outside the loaded
window raise instead of extrapolating.

The canonical price unit is USD/MWh throughout; conversion to USD/kWh happens only
where costs or observation features are computed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum

import numpy as np

from .errors import CoverageError, DataError, DataFormatError

HOUR = timedelta(hours=1)

# Longest run of missing native points that gets forward-filled at load time.
MAX_FFILL_GAP = 3

PRICE_TIME_COL = "Datetime (UTC)"
PRICE_VALUE_COL = "Price (USD/MWh)"
CARBON_VALUE_COL = "Carbon Intensity gCO2eq/kWh (direct)"

DEFAULT_REL_HUMIDITY_PCT = 50.0


class SeriesKind(Enum):
    PRICE = "price"                        # USD/MWh
    CARBON_INTENSITY = "carbon_intensity"  # gCO2eq/kWh
    DRY_BULB_TEMP_C = "dry_bulb_temp_c"    # degC
    REL_HUMIDITY_PCT = "rel_humidity_pct"  # percent


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A uniformly spaced, validated time series anchored at a UTC instant.

    Immutable after construction; safe to share read-only across episodes.
    """

    location_code: str
    kind: SeriesKind
    start: datetime
    step: timedelta
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.start.tzinfo is None:
            raise DataError("series start must be timezone-aware UTC")
        if self.step <= timedelta(0):
            raise DataError("series step must be positive")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or len(vals) == 0:
            raise DataError("series must be a non-empty 1-D array")
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise DataError(f"non-finite value at index {bad}")
        if self.kind is SeriesKind.CARBON_INTENSITY and np.any(vals < 0):
            bad = int(np.flatnonzero(vals < 0)[0])
            raise DataError(f"carbon intensity must be >= 0 (index {bad})")
        if self.kind is SeriesKind.REL_HUMIDITY_PCT and (np.any(vals < 0) or np.any(vals > 100)):
            raise DataError("relative humidity must lie in [0, 100]")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    @property
    def end(self) -> datetime:
        return self.start + (len(self.values) - 1) * self.step

    def covers(self, t0: datetime, t1: datetime) -> bool:
        return self.start <= t0 and t1 <= self.end

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.location_code == other.location_code
            and self.kind == other.kind
            and self.start == other.start
            and self.step == other.step
            and np.array_equal(self.values, other.values)
        )


def _parse_utc(text: str, row: int) -> datetime:
    try:
        dt = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    except ValueError as exc:
        raise DataError(f"row {row}: unparsable timestamp {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _grid_from_points(points, location, kind, step=HOUR) -> TimeSeries:
    """Validate (timestamp, value) pairs onto a uniform grid, forward-filling short gaps."""
    times = [p[0] for p in points]
    for i in range(1, len(times)):
        if times[i] == times[i - 1]:
            raise DataError(f"duplicate timestamp {times[i].isoformat()}")
        if times[i] < times[i - 1]:
            raise DataError(
                f"timestamps not increasing at {times[i].isoformat()} (row {i})"
            )
    filled = [points[0][1]]
    for i in range(1, len(points)):
        gap = times[i] - times[i - 1]
        n_steps, rem = divmod(gap, step)
        if rem != timedelta(0):
            raise DataError(
                f"timestamp {times[i].isoformat()} is off the {step} grid"
            )
        missing = n_steps - 1
        if missing > MAX_FFILL_GAP:
            raise DataError(
                f"gap of {missing} missing points before {times[i].isoformat()} "
                f"exceeds the forward-fill limit of {MAX_FFILL_GAP}"
            )
        filled.extend([points[i - 1][1]] * missing)
        filled.append(points[i][1])
    return TimeSeries(location, kind, times[0], step, np.array(filled))


def _load_hourly_csv(path, location, value_col, kind) -> TimeSeries:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or PRICE_TIME_COL not in reader.fieldnames:
            raise DataFormatError(f"{path}: missing column {PRICE_TIME_COL!r}")
        if value_col not in reader.fieldnames:
            raise DataFormatError(f"{path}: missing column {value_col!r}")
        points = []
        for i, row in enumerate(reader, start=1):
            t = _parse_utc(row[PRICE_TIME_COL], i)
            try:
                v = float(row[value_col])
            except (TypeError, ValueError) as exc:
                raise DataError(f"row {i}: unparsable value {row[value_col]!r}") from exc
            points.append((t, v))
    if not points:
        raise DataError(f"{path}: no data rows")
    return _grid_from_points(points, location, kind)


def load_price_csv(path, location: str) -> TimeSeries:
    """Load an hourly electricity-price CSV (USD/MWh). Prices may be negative."""
    return _load_hourly_csv(path, location, PRICE_VALUE_COL, SeriesKind.PRICE)


def load_carbon_csv(path, location: str) -> TimeSeries:
    """Load an hourly grid carbon-intensity CSV (gCO2eq/kWh, nonnegative)."""
    return _load_hourly_csv(path, location, CARBON_VALUE_COL, SeriesKind.CARBON_INTENSITY)


def save_series_csv(series: TimeSeries, path) -> None:
    """Write a price or carbon series back to its documented CSV format."""
    col = {SeriesKind.PRICE: PRICE_VALUE_COL, SeriesKind.CARBON_INTENSITY: CARBON_VALUE_COL}[series.kind]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([PRICE_TIME_COL, col])
        for i, v in enumerate(series.values):
            t = series.start + i * series.step
            writer.writerow([t.strftime("%Y-%m-%d %H:%M:%S+00:00"), repr(float(v))])


def load_weather_json(path, location: str) -> tuple[TimeSeries, TimeSeries]:
    """Load hourly weather JSON: ``hourly.time`` + ``hourly.temperature_2m``.

    ``hourly.relative_humidity_2m`` is optional; a constant 50% series is
    substituted when absent. Returns (dry-bulb degC, relative humidity %).
    """
    with open(path) as fh:
        doc = json.load(fh)
    hourly = doc.get("hourly")
    if not isinstance(hourly, dict):
        raise DataFormatError(f"{path}: missing 'hourly' object")
    times_raw = hourly.get("time")
    temps_raw = hourly.get("temperature_2m")
    if times_raw is None or temps_raw is None:
        raise DataFormatError(f"{path}: 'hourly' must contain 'time' and 'temperature_2m'")
    if len(times_raw) != len(temps_raw):
        raise DataFormatError(
            f"{path}: time ({len(times_raw)}) and temperature_2m ({len(temps_raw)}) lengths differ"
        )
    rh_raw = hourly.get("relative_humidity_2m")
    if rh_raw is not None and len(rh_raw) != len(times_raw):
        raise DataFormatError(
            f"{path}: relative_humidity_2m length {len(rh_raw)} does not match time"
        )
    times = [_parse_utc(t, i) for i, t in enumerate(times_raw, start=1)]
    temp_points = list(zip(times, [float(v) for v in temps_raw]))
    drybulb = _grid_from_points(temp_points, location, SeriesKind.DRY_BULB_TEMP_C)
    if rh_raw is None:
        rh_vals = np.full(len(drybulb), DEFAULT_REL_HUMIDITY_PCT)
        humidity = TimeSeries(location, SeriesKind.REL_HUMIDITY_PCT, drybulb.start, HOUR, rh_vals)
    else:
        rh_points = list(zip(times, [float(v) for v in rh_raw]))
        humidity = _grid_from_points(rh_points, location, SeriesKind.REL_HUMIDITY_PCT)
    return drybulb, humidity


def save_weather_json(drybulb: TimeSeries, humidity: TimeSeries, path) -> None:
    times = [
        (drybulb.start + i * drybulb.step).strftime("%Y-%m-%dT%H:%M")
        for i in range(len(drybulb))
    ]
    doc = {
        "hourly": {
            "time": times,
            "temperature_2m": [float(v) for v in drybulb.values],
            "relative_humidity_2m": [float(v) for v in humidity.values],
        }
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def value_at(series: TimeSeries, t: datetime) -> float:
    """Linear interpolation between bracketing native points; exact at native points."""
    if t < series.start or t > series.end:
        raise CoverageError(
            f"{series.kind.value}@{series.location_code}: {t.isoformat()} outside "
            f"[{series.start.isoformat()}, {series.end.isoformat()}]"
        )
    offset = (t - series.start) / series.step
    idx = int(offset)
    frac = offset - idx
    if frac == 0.0 or idx >= len(series.values) - 1:
        return float(series.values[min(idx, len(series.values) - 1)])
    lo = float(series.values[idx])
    hi = float(series.values[idx + 1])
    return lo + (hi - lo) * frac


def _saturation_vapor_pressure_pa(t_c: float) -> float:
    # Magnus-style fit over liquid water
    return 610.94 * math.exp(17.625 * t_c / (t_c + 243.04))


def _humidity_ratio(vapor_pressure_pa: float, pressure_pa: float = 101325.0) -> float:
    return 0.622 * vapor_pressure_pa / (pressure_pa - vapor_pressure_pa)


def wet_bulb(t_drybulb_c: float, rh_pct: float) -> float:
    """Thermodynamic wet-bulb temperature (degC) at sea-level pressure.

    Solves the adiabatic-saturation humidity-ratio balance by bisection, so the
    result is always <= the dry-bulb temperature, equals it at saturation, and
    increases monotonically with relative humidity.
    """
    if not 0.0 <= rh_pct <= 100.0:
        raise ValueError(f"relative humidity {rh_pct} outside [0, 100]")
    if not math.isfinite(t_drybulb_c):
        raise ValueError("dry-bulb temperature must be finite")
    t = float(t_drybulb_c)
    w_actual = _humidity_ratio(rh_pct / 100.0 * _saturation_vapor_pressure_pa(t))

    def residual(twb: float) -> float:
        ws = _humidity_ratio(_saturation_vapor_pressure_pa(twb))
        num = (2501.0 - 2.326 * twb) * ws - 1.006 * (t - twb)
        den = 2501.0 + 1.86 * t - 4.186 * twb
        return num / den - w_actual

    hi = t
    if residual(hi) <= 0.0:
        return hi
    lo = t - 60.0
    while residual(lo) > 0.0:
        lo -= 60.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def synth_series(
    kind: SeriesKind,
    base: float,
    daily_amplitude: float,
    noise_sd: float,
    start: datetime,
    hours: int,
    seed: int,
    location: str = "SYN",
) -> TimeSeries:
    """Seeded synthetic hourly series: daily sinusoid around ``base`` plus Gaussian noise.

    Deterministic for a given seed. Carbon intensity is clipped at 0 and relative
    humidity at [0, 100] so the generated series always satisfies its invariants.
    """
    if daily_amplitude < 0 or noise_sd < 0:
        raise ValueError("daily_amplitude and noise_sd must be >= 0")
    if hours < 1:
        raise ValueError("hours must be >= 1")
    if kind is SeriesKind.CARBON_INTENSITY and base - daily_amplitude < 0:
        raise ValueError("carbon intensity requires base - daily_amplitude >= 0")
    if start.tzinfo is None:
        raise ValueError("start must be timezone-aware UTC")
    if start.minute or start.second or start.microsecond:
        raise ValueError("start must be hour-aligned")
    hour0 = start.hour
    idx = np.arange(hours, dtype=np.float64)
    vals = base + daily_amplitude * np.sin(2.0 * np.pi * ((hour0 + idx) % 24.0) / 24.0)
    if noise_sd > 0:
        rng = np.random.default_rng(seed)
        vals = vals + rng.normal(0.0, noise_sd, size=hours)
    if kind is SeriesKind.CARBON_INTENSITY:
        vals = np.maximum(vals, 0.0)
    elif kind is SeriesKind.REL_HUMIDITY_PCT:
        vals = np.clip(vals, 0.0, 100.0)
    return TimeSeries(location, kind, start, HOUR, vals)
