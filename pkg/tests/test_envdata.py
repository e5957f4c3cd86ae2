from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from geodcsim.envdata import (
    HOUR,
    SeriesKind,
    TimeSeries,
    load_carbon_csv,
    load_price_csv,
    load_weather_json,
    save_series_csv,
    save_weather_json,
    synth_series,
    value_at,
    wet_bulb,
)
from geodcsim.errors import CoverageError, DataError, DataFormatError

T0 = datetime(2024, 1, 1, 0, 0, tzinfo=timezone.utc)


def write_price_csv(path, rows, value_col="Price (USD/MWh)"):
    lines = [f"Datetime (UTC),{value_col}"]
    lines += [f"{t},{v}" for t, v in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestPriceCsv:
    def test_two_row_identity(self, tmp_path):
        p = write_price_csv(tmp_path / "p.csv", [
            ("2024-01-01 00:00:00+00:00", 50.0),
            ("2024-01-01 01:00:00+00:00", 70.0),
        ])
        series = load_price_csv(p, "US-CAL-CISO")
        assert len(series) == 2
        assert list(series.values) == [50.0, 70.0]
        assert series.kind is SeriesKind.PRICE
        assert series.start == T0

    def test_duplicate_timestamp_names_it(self, tmp_path):
        p = write_price_csv(tmp_path / "p.csv", [
            ("2024-01-01 00:00:00+00:00", 50.0),
            ("2024-01-01 00:00:00+00:00", 60.0),
        ])
        with pytest.raises(DataError, match="2024-01-01T00:00:00"):
            load_price_csv(p, "X")

    def test_gap_forward_filled(self, tmp_path):
        # hour 01 missing: filled from hour 00
        p = write_price_csv(tmp_path / "p.csv", [
            ("2024-01-01 00:00:00+00:00", 50.0),
            ("2024-01-01 02:00:00+00:00", 70.0),
        ])
        series = load_price_csv(p, "X")
        assert list(series.values) == [50.0, 50.0, 70.0]

    def test_long_gap_rejected(self, tmp_path):
        p = write_price_csv(tmp_path / "p.csv", [
            ("2024-01-01 00:00:00+00:00", 50.0),
            ("2024-01-01 05:00:00+00:00", 70.0),  # 4 missing points > limit of 3
        ])
        with pytest.raises(DataError, match="forward-fill"):
            load_price_csv(p, "X")

    def test_missing_column(self, tmp_path):
        p = tmp_path / "p.csv"
        p.write_text("Datetime (UTC),Price\n2024-01-01 00:00:00+00:00,50\n")
        with pytest.raises(DataFormatError):
            load_price_csv(p, "X")

    def test_non_monotone(self, tmp_path):
        p = write_price_csv(tmp_path / "p.csv", [
            ("2024-01-01 01:00:00+00:00", 50.0),
            ("2024-01-01 00:00:00+00:00", 70.0),
        ])
        with pytest.raises(DataError, match="not increasing"):
            load_price_csv(p, "X")

    def test_unparsable_row_cites_index(self, tmp_path):
        p = write_price_csv(tmp_path / "p.csv", [
            ("2024-01-01 00:00:00+00:00", 50.0),
            ("2024-01-01 01:00:00+00:00", "oops"),
        ])
        with pytest.raises(DataError, match="row 2"):
            load_price_csv(p, "X")

    def test_negative_price_allowed(self, tmp_path):
        p = write_price_csv(tmp_path / "p.csv", [
            ("2024-01-01 00:00:00+00:00", -12.5),
            ("2024-01-01 01:00:00+00:00", 70.0),
        ])
        series = load_price_csv(p, "X")
        assert series.values[0] == -12.5

    def test_round_trip(self, tmp_path):
        p = write_price_csv(tmp_path / "p.csv", [
            ("2024-01-01 00:00:00+00:00", 50.25),
            ("2024-01-01 01:00:00+00:00", 70.5),
            ("2024-01-01 02:00:00+00:00", -3.125),
        ])
        series = load_price_csv(p, "X")
        out = tmp_path / "roundtrip.csv"
        save_series_csv(series, out)
        assert load_price_csv(out, "X") == series


class TestCarbonCsv:
    def test_constant_file(self, tmp_path):
        rows = [(f"2024-01-01 {h:02d}:00:00+00:00", 100.0) for h in range(5)]
        p = write_price_csv(tmp_path / "c.csv", rows, "Carbon Intensity gCO2eq/kWh (direct)")
        series = load_carbon_csv(p, "X")
        assert np.all(series.values == 100.0)

    def test_negative_ci_rejected(self, tmp_path):
        p = write_price_csv(tmp_path / "c.csv", [
            ("2024-01-01 00:00:00+00:00", 100.0),
            ("2024-01-01 01:00:00+00:00", -1.0),
        ], "Carbon Intensity gCO2eq/kWh (direct)")
        with pytest.raises(DataError, match=">= 0"):
            load_carbon_csv(p, "X")

    def test_full_year_length(self, tmp_path):
        start = T0
        rows = [
            ((start + i * HOUR).strftime("%Y-%m-%d %H:%M:%S+00:00"), 80.0 + (i % 24))
            for i in range(8760)
        ]
        p = write_price_csv(tmp_path / "c.csv", rows, "Carbon Intensity gCO2eq/kWh (direct)")
        series = load_carbon_csv(p, "X")
        assert len(series) == 8760


class TestWeatherJson:
    def _doc(self, n, humidity=True):
        times = [(T0 + i * HOUR).strftime("%Y-%m-%dT%H:%M") for i in range(n)]
        doc = {"hourly": {"time": times, "temperature_2m": [15.0 + i for i in range(n)]}}
        if humidity:
            doc["hourly"]["relative_humidity_2m"] = [40.0 + i for i in range(n)]
        return doc

    def test_aligned_arrays(self, tmp_path):
        import json
        p = tmp_path / "w.json"
        p.write_text(json.dumps(self._doc(24)))
        drybulb, humidity = load_weather_json(p, "X")
        assert len(drybulb) == 24 and len(humidity) == 24

    def test_missing_humidity_defaults_to_50(self, tmp_path):
        import json
        p = tmp_path / "w.json"
        p.write_text(json.dumps(self._doc(6, humidity=False)))
        _, humidity = load_weather_json(p, "X")
        assert np.all(humidity.values == 50.0)

    def test_length_mismatch(self, tmp_path):
        import json
        doc = self._doc(6)
        doc["hourly"]["time"] = doc["hourly"]["time"][:-1]
        p = tmp_path / "w.json"
        p.write_text(json.dumps(doc))
        with pytest.raises(DataFormatError):
            load_weather_json(p, "X")

    def test_round_trip(self, tmp_path):
        import json
        p = tmp_path / "w.json"
        p.write_text(json.dumps(self._doc(12)))
        drybulb, humidity = load_weather_json(p, "X")
        out = tmp_path / "w2.json"
        save_weather_json(drybulb, humidity, out)
        d2, h2 = load_weather_json(out, "X")
        assert d2 == drybulb and h2 == humidity


class TestValueAt:
    def _series(self, values=(50.0, 70.0)):
        return TimeSeries("X", SeriesKind.PRICE, T0, HOUR, np.array(values))

    def test_quarter_hour_interpolation(self):
        assert value_at(self._series(), T0 + timedelta(minutes=15)) == 55.0

    def test_exact_native_point(self):
        s = self._series((50.0, 70.0, 30.0))
        assert value_at(s, T0 + HOUR) == 70.0

    def test_past_end_raises(self):
        with pytest.raises(CoverageError):
            value_at(self._series(), T0 + HOUR + timedelta(seconds=1))

    def test_before_start_raises(self):
        with pytest.raises(CoverageError):
            value_at(self._series(), T0 - timedelta(seconds=1))

    def test_bounded_by_neighbors(self):
        rng = np.random.default_rng(3)
        s = TimeSeries("X", SeriesKind.PRICE, T0, HOUR, rng.normal(50, 30, size=48))
        for _ in range(500):
            t = T0 + timedelta(seconds=float(rng.uniform(0, 47 * 3600)))
            v = value_at(s, t)
            i = int((t - T0) / HOUR)
            lo = min(s.values[i], s.values[min(i + 1, 47)])
            hi = max(s.values[i], s.values[min(i + 1, 47)])
            assert lo - 1e-12 <= v <= hi + 1e-12


class TestWetBulb:
    def test_saturation_equals_drybulb(self):
        assert wet_bulb(20.0, 100.0) == pytest.approx(20.0, abs=0.5)

    def test_table_oracle_cases(self):
        # psychrometric chart values at sea level
        assert wet_bulb(20.0, 50.0) == pytest.approx(13.7, abs=1.0)
        assert 10.0 < wet_bulb(20.0, 50.0) < 20.0
        assert wet_bulb(25.0, 50.0) == pytest.approx(17.9, abs=1.0)
        assert wet_bulb(30.0, 70.0) == pytest.approx(25.5, abs=1.0)

    def test_very_dry_air(self):
        assert wet_bulb(30.0, 0.01) < 15.0

    def test_never_exceeds_drybulb(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            t = float(rng.uniform(-10, 45))
            rh = float(rng.uniform(0, 100))
            assert wet_bulb(t, rh) <= t + 1e-9

    def test_monotone_in_humidity(self):
        for t in (-5.0, 0.0, 10.0, 25.0, 40.0):
            values = [wet_bulb(t, rh) for rh in np.linspace(0, 100, 41)]
            assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_rh_out_of_range(self):
        with pytest.raises(ValueError):
            wet_bulb(20.0, 101.0)
        with pytest.raises(ValueError):
            wet_bulb(20.0, -0.5)


class TestSynthSeries:
    def test_constant_when_flat(self):
        s = synth_series(SeriesKind.PRICE, 42.0, 0.0, 0.0, T0, 48, seed=1)
        assert np.all(s.values == 42.0)

    def test_seed_reproducible(self):
        a = synth_series(SeriesKind.PRICE, 80.0, 20.0, 5.0, T0, 100, seed=9)
        b = synth_series(SeriesKind.PRICE, 80.0, 20.0, 5.0, T0, 100, seed=9)
        assert np.array_equal(a.values, b.values)

    def test_amplitude_bounds_without_noise(self):
        s = synth_series(SeriesKind.PRICE, 100.0, 10.0, 0.0, T0, 240, seed=0)
        assert s.values.min() >= 90.0 - 1e-9
        assert s.values.max() <= 110.0 + 1e-9

    def test_carbon_requires_nonnegative_base(self):
        with pytest.raises(ValueError):
            synth_series(SeriesKind.CARBON_INTENSITY, 50.0, 80.0, 0.0, T0, 24, seed=0)

    def test_carbon_noise_clipped_at_zero(self):
        s = synth_series(SeriesKind.CARBON_INTENSITY, 5.0, 0.0, 50.0, T0, 500, seed=2)
        assert s.values.min() >= 0.0

    def test_negative_params_rejected(self):
        with pytest.raises(ValueError):
            synth_series(SeriesKind.PRICE, 10.0, -1.0, 0.0, T0, 24, seed=0)
        with pytest.raises(ValueError):
            synth_series(SeriesKind.PRICE, 10.0, 0.0, -1.0, T0, 24, seed=0)
