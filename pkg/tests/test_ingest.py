import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from solarcast.errors import ConfigError, ParseError, StructuralError
from solarcast.geometry import SiteLocation
from solarcast.ingest import (
    HourlySeries,
    Quality,
    clean_clearness,
    clean_irradiance,
    from_arrays,
    hourly_range,
    impute_gaps,
    ingest_pipeline,
    parse_generic_csv,
    parse_tmy3,
    read_canonical,
    write_canonical,
)

SITE = SiteLocation(latitude=33.45, longitude=-112.07, utc_offset=-7.0)


def make_series(irr, cc=None, start="2013-06-01T01:00:00"):
    n = len(irr)
    cc = np.zeros(n) if cc is None else np.asarray(cc, dtype=float)
    return from_arrays(SITE, hourly_range(np.datetime64(start), n), np.asarray(irr, dtype=float), cc)


def tmy3_text(n_rows=8760, ghi=None, cloud_tenths=None, header=None):
    header = header or '724666,"TEST STATION",AZ,-7.0,33.45,-112.07,339'
    names = (
        ["Date (MM/DD/YYYY)", "Time (HH:MM)", "ETR (W/m^2)", "ETRN (W/m^2)",
         "GHI (W/m^2)", "GHI source", "GHI uncert (%)"]
        + [f"col{i}" for i in range(18)]
        + ["TotCld (tenths)", "TotCld source", "TotCld uncert (code)"]
    )
    lines = [header, ",".join(names)]
    for i in range(n_rows):
        g = "500" if ghi is None else str(ghi(i))
        c = "7" if cloud_tenths is None else str(cloud_tenths(i))
        day = i // 24 + 1
        row = [f"01/{min(day, 28):02d}/1988", f"{(i % 24) + 1:02d}:00", "0", "0", g, "1", "5"]
        row += ["0"] * 18 + [c, "A", "7"]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


class TestParseTmy3:
    def test_well_formed_file(self):
        series = parse_tmy3(io.StringIO(tmy3_text()))
        assert len(series) == 8760
        assert series.site == SITE

    def test_sky_cover_tenths_to_fraction(self):
        series = parse_tmy3(io.StringIO(tmy3_text(cloud_tenths=lambda i: 7)))
        assert series.cloud_cover[0] == pytest.approx(0.7)

    def test_missing_sentinel(self):
        series = parse_tmy3(io.StringIO(tmy3_text(ghi=lambda i: -9900 if i == 5 else 400)))
        assert np.isnan(series.irradiance[5])
        assert np.isfinite(series.irradiance[6])

    def test_unparseable_cell_marked_missing(self):
        series = parse_tmy3(io.StringIO(tmy3_text(ghi=lambda i: "oops" if i == 2 else 400)))
        assert np.isnan(series.irradiance[2])

    def test_wrong_row_count(self):
        with pytest.raises(StructuralError):
            parse_tmy3(io.StringIO(tmy3_text(n_rows=100)))

    def test_malformed_header_cites_line(self):
        with pytest.raises(ParseError) as err:
            parse_tmy3(io.StringIO(tmy3_text(header="junk,header")))
        assert err.value.line == 1

    def test_leap_nominal_year_rejected(self):
        with pytest.raises(ConfigError):
            parse_tmy3(io.StringIO(tmy3_text()), nominal_year=2012)


class TestParseGenericCsv:
    COLUMN_MAP = {"timestamp": "ts", "irradiance": "irr", "cloud_cover": "cld"}

    def test_oktas(self):
        text = "ts,irr,cld\n2013-01-01T01:00:00,100,4\n"
        series = parse_generic_csv(io.StringIO(text), self.COLUMN_MAP, SITE, cloud_cover_unit="oktas")
        assert series.cloud_cover[0] == 0.5

    def test_fraction_identity(self):
        text = "ts,irr,cld\n2013-01-01T01:00:00,100,0.3\n"
        series = parse_generic_csv(io.StringIO(text), self.COLUMN_MAP, SITE)
        assert series.cloud_cover[0] == 0.3

    def test_out_of_order_rows_sorted(self):
        shuffled = "ts,irr,cld\n2013-01-01T03:00:00,3,0\n2013-01-01T01:00:00,1,0\n2013-01-01T02:00:00,2,0\n"
        ordered = "ts,irr,cld\n2013-01-01T01:00:00,1,0\n2013-01-01T02:00:00,2,0\n2013-01-01T03:00:00,3,0\n"
        a = parse_generic_csv(io.StringIO(shuffled), self.COLUMN_MAP, SITE)
        b = parse_generic_csv(io.StringIO(ordered), self.COLUMN_MAP, SITE)
        assert np.array_equal(a.irradiance, b.irradiance)
        assert np.array_equal(a.timestamps, b.timestamps)

    def test_missing_mapped_column(self):
        text = "ts,irr\n2013-01-01T01:00:00,100\n"
        with pytest.raises(ConfigError):
            parse_generic_csv(io.StringIO(text), self.COLUMN_MAP, SITE)

    def test_conflicting_duplicates_listed(self):
        text = (
            "ts,irr,cld\n2013-01-01T01:00:00,100,0\n2013-01-01T01:00:00,200,0\n"
        )
        with pytest.raises(StructuralError) as err:
            parse_generic_csv(io.StringIO(text), self.COLUMN_MAP, SITE)
        assert "2013-01-01T01:00:00" in str(err.value)

    def test_absent_hours_become_missing(self):
        text = "ts,irr,cld\n2013-01-01T01:00:00,100,0\n2013-01-01T04:00:00,400,0\n"
        series = parse_generic_csv(io.StringIO(text), self.COLUMN_MAP, SITE)
        assert len(series) == 4
        assert np.isnan(series.irradiance[1]) and np.isnan(series.irradiance[2])


class TestCleaning:
    def test_low_values_zeroed(self):
        series = clean_irradiance(make_series([5.0, 9.99]))
        assert list(series.irradiance) == [0.0, 0.0]

    def test_high_values_capped(self):
        series = clean_irradiance(make_series([1100.0]))
        assert series.irradiance[0] == 1050.0

    def test_in_range_identity(self):
        series = clean_irradiance(make_series([600.0, 10.0]))
        assert list(series.irradiance) == [600.0, 10.0]

    def test_missing_preserved(self):
        series = clean_irradiance(make_series([np.nan, 20.0]))
        assert np.isnan(series.irradiance[0])

    def test_clearness_rules(self):
        out = clean_clearness([-0.02, 0.9, 0.5])
        assert list(out) == [0.0, 0.85, 0.5]

    @given(st.lists(st.floats(-200, 2000, allow_nan=False), min_size=1, max_size=50))
    def test_irradiance_cleaning_idempotent(self, values):
        once = clean_irradiance(make_series(values))
        twice = clean_irradiance(once)
        assert np.array_equal(once.irradiance, twice.irradiance)
        assert np.all((once.irradiance >= 0) & (once.irradiance <= 1050))

    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=50))
    def test_clearness_cleaning_idempotent(self, values):
        once = clean_clearness(values)
        assert np.array_equal(once, clean_clearness(once))
        assert np.all((once >= 0) & (once <= 0.85))


class TestImputeGaps:
    def test_single_gap_neighbor_mean(self):
        series = impute_gaps(make_series([400.0, np.nan, 500.0]))
        assert series.irradiance[1] == 450.0
        assert series.record(1).quality is Quality.IMPUTED

    def test_short_gap_linear_interpolation(self):
        series = impute_gaps(make_series([100.0, np.nan, np.nan, np.nan, 500.0]))
        assert np.allclose(series.irradiance, [100.0, 200.0, 300.0, 400.0, 500.0])

    def test_long_gap_left_missing(self):
        values = [300.0, np.nan, np.nan, np.nan, np.nan, 500.0]
        series = impute_gaps(make_series(values))
        assert np.isnan(series.irradiance[1:5]).all()
        assert all(series.record(i).quality is Quality.INVALID for i in range(1, 5))
        spans = [g for g in series.gap_report if g.channel == "irradiance"]
        assert spans[0].length == 4 and spans[0].action == "unfilled"

    def test_boundary_gap_left_missing(self):
        series = impute_gaps(make_series([np.nan, 200.0, 300.0]))
        assert np.isnan(series.irradiance[0])
        assert series.gap_report[0].action == "unfilled"

    def test_no_gaps_identity(self):
        series = impute_gaps(make_series([1.0, 2.0, 3.0]))
        assert series.gap_report == []
        assert np.array_equal(series.irradiance, [1.0, 2.0, 3.0])

    def test_observed_values_never_altered(self):
        values = [100.0, np.nan, 300.0, 400.0, np.nan, np.nan, 700.0]
        before = make_series(values)
        after = impute_gaps(before)
        observed = ~np.isnan(np.asarray(values))
        assert np.array_equal(after.irradiance[observed], np.asarray(values)[observed])

    def test_cloud_cover_gaps_also_filled(self):
        series = impute_gaps(make_series([1.0, 2.0, 3.0], cc=[0.2, np.nan, 0.4]))
        assert series.cloud_cover[1] == pytest.approx(0.3)


class TestSeriesStructure:
    def test_duplicate_timestamps_rejected(self):
        ts = np.array(["2013-01-01T01:00:00", "2013-01-01T01:00:00"], dtype="datetime64[s]")
        with pytest.raises(StructuralError):
            HourlySeries(SITE, ts, np.zeros(2), np.zeros(2), np.zeros(2, dtype=np.uint8))

    def test_non_hourly_spacing_rejected(self):
        ts = np.array(["2013-01-01T01:00:00", "2013-01-01T03:00:00"], dtype="datetime64[s]")
        with pytest.raises(StructuralError):
            HourlySeries(SITE, ts, np.zeros(2), np.zeros(2), np.zeros(2, dtype=np.uint8))

    def test_hour_month_year_helpers(self):
        series = make_series(np.zeros(48), start="2012-12-31T01:00:00")
        assert series.hour_of_day()[0] == 1
        assert series.hour_of_day()[23] == 24
        assert series.month()[0] == 12 and series.month()[-1] == 1
        assert series.year()[0] == 2012 and series.year()[-1] == 2013


class TestCanonicalRoundTrip:
    def test_write_read_write_identical(self):
        raw = make_series([5.0, np.nan, 1100.0, 600.0], cc=[0.1, 0.2, np.nan, 0.4])
        series = ingest_pipeline(raw)
        buf = io.StringIO()
        write_canonical(series, buf)
        text = buf.getvalue()
        again = read_canonical(io.StringIO(text))
        buf2 = io.StringIO()
        write_canonical(again, buf2)
        assert buf2.getvalue() == text
        assert np.array_equal(series.quality, again.quality)
        assert np.array_equal(np.isnan(series.irradiance), np.isnan(again.irradiance))
        finite = ~np.isnan(series.irradiance)
        assert np.array_equal(series.irradiance[finite], again.irradiance[finite])

    def test_header_is_exact(self):
        buf = io.StringIO()
        write_canonical(make_series([1.0]), buf)
        lines = buf.getvalue().splitlines()
        data_lines = [l for l in lines if not l.startswith("#")]
        assert data_lines[0] == "timestamp,irradiance_wm2,cloud_cover_frac,quality"

    def test_wrong_header_rejected(self):
        with pytest.raises(ParseError):
            read_canonical(io.StringIO("timestamp,foo\n"), site=SITE)
