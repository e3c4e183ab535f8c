"""Hourly weather ingestion: TMY3 and generic CSV parsing, cleaning, gap imputation.

All series share one internal convention: a strict 1-hour timestamp grid where
each record covers the hour *ending* at its timestamp, irradiance in W/m^2,
cloud cover as a fraction in [0, 1], and NaN for missing values.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError, StructuralError
from .geometry import (
    K_MAX,
    SiteLocation,
    clearness_index,
    day_night_flag,
    extraterrestrial_horizontal,
)

log = logging.getLogger(__name__)

IRRADIANCE_MAX = 1050.0  # W/m^2 feasible ceiling
IRRADIANCE_FLOOR = 10.0  # W/m^2; below this readings are treated as zero
MAX_IMPUTE_GAP = 3  # hours; longer gaps stay missing
TMY3_SENTINEL = -9900.0
TMY3_ROWS = 8760

CANONICAL_HEADER = "timestamp,irradiance_wm2,cloud_cover_frac,quality"


class Quality(Enum):
    OBSERVED = "observed"
    IMPUTED = "imputed"
    INVALID = "invalid"


_QUALITY_CODE = {Quality.OBSERVED: 0, Quality.IMPUTED: 1, Quality.INVALID: 2}
_QUALITY_FROM_CODE = {v: k for k, v in _QUALITY_CODE.items()}


@dataclass(frozen=True)
class HourlyRecord:
    """One hour of data; irradiance/cloud_cover are None when missing."""

    timestamp: np.datetime64
    irradiance: float | None
    cloud_cover: float | None
    quality: Quality


@dataclass(frozen=True)
class GapSpan:
    """A run of missing values in one channel and what was done about it."""

    channel: str  # "irradiance" | "cloud_cover"
    start: np.datetime64
    length: int
    action: str  # "imputed" | "unfilled"


@dataclass
class HourlySeries:
    """Validated hourly series on a strict 1-hour grid.

    Arrays are owned by the series and treated as read-only; cleaning and
    imputation return new instances.
    """

    site: SiteLocation
    timestamps: np.ndarray  # datetime64[s], hour-ending
    irradiance: np.ndarray  # float64, NaN = missing
    cloud_cover: np.ndarray  # float64 fraction, NaN = missing
    quality: np.ndarray  # uint8 codes, see Quality
    gap_report: list[GapSpan] = field(default_factory=list)

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype="datetime64[s]")
        self.irradiance = np.asarray(self.irradiance, dtype=np.float64)
        self.cloud_cover = np.asarray(self.cloud_cover, dtype=np.float64)
        self.quality = np.asarray(self.quality, dtype=np.uint8)
        n = len(self.timestamps)
        if not (len(self.irradiance) == len(self.cloud_cover) == len(self.quality) == n):
            raise StructuralError("channel arrays differ in length")
        if n > 1:
            steps = np.diff(self.timestamps).astype("timedelta64[s]").astype(np.int64)
            if np.any(steps == 0):
                dupes = self.timestamps[1:][steps == 0]
                raise StructuralError(f"duplicate timestamps: {', '.join(str(t) for t in dupes[:5])}")
            if np.any(steps != 3600):
                bad = self.timestamps[1:][steps != 3600][0]
                raise StructuralError(f"non-hourly spacing at {bad}")

    def __len__(self) -> int:
        return len(self.timestamps)

    def record(self, i: int) -> HourlyRecord:
        irr = self.irradiance[i]
        cc = self.cloud_cover[i]
        return HourlyRecord(
            timestamp=self.timestamps[i],
            irradiance=None if np.isnan(irr) else float(irr),
            cloud_cover=None if np.isnan(cc) else float(cc),
            quality=_QUALITY_FROM_CODE[int(self.quality[i])],
        )

    # -- derived per-hour attributes -------------------------------------------------

    def extraterrestrial(self) -> np.ndarray:
        return extraterrestrial_horizontal(self.site, self.timestamps)

    def daytime(self) -> np.ndarray:
        return day_night_flag(self.extraterrestrial())

    def clearness(self) -> np.ndarray:
        return clearness_index(self.irradiance, self.extraterrestrial())

    def _midpoints(self) -> np.ndarray:
        return self.timestamps - np.timedelta64(1800, "s")

    def hour_of_day(self) -> np.ndarray:
        """Hour-ending index 1..24 (midnight-ending records map to 24)."""
        mid = self._midpoints()
        hours = ((mid - mid.astype("datetime64[D]")).astype("timedelta64[s]").astype(np.int64)) // 3600
        return hours.astype(np.int64) + 1

    def month(self) -> np.ndarray:
        """Calendar month 1..12 of the covered hour (by its midpoint)."""
        mid = self._midpoints()
        return mid.astype("datetime64[M]").astype(np.int64) % 12 + 1

    def year(self) -> np.ndarray:
        mid = self._midpoints()
        return mid.astype("datetime64[Y]").astype(np.int64) + 1970

    def day_of_month(self) -> np.ndarray:
        mid = self._midpoints()
        return (mid.astype("datetime64[D]") - mid.astype("datetime64[M]")).astype(np.int64) + 1


def from_arrays(site, timestamps, irradiance, cloud_cover, quality=None) -> HourlySeries:
    """Assemble a series marking every record observed unless told otherwise."""
    n = len(timestamps)
    if quality is None:
        quality = np.zeros(n, dtype=np.uint8)
    return HourlySeries(site, timestamps, irradiance, cloud_cover, quality)


def hourly_range(start: np.datetime64, n_hours: int) -> np.ndarray:
    start = np.datetime64(start, "s")
    return start + np.arange(n_hours) * np.timedelta64(3600, "s")


# -- parsing --------------------------------------------------------------------------


def _open_text(file):
    if isinstance(file, (str, Path)):
        return open(file, "r", newline=""), True
    if isinstance(file, (bytes, bytearray)):
        return io.StringIO(file.decode("utf-8")), True
    if isinstance(file, io.TextIOBase):
        return file, False
    # binary stream
    return io.TextIOWrapper(file, encoding="utf-8"), False


def _parse_cell(raw: str, line_no: int, column: str) -> float:
    """Numeric cell -> value, with NaN for blanks/sentinels/garbage (logged)."""
    raw = raw.strip()
    if not raw:
        return np.nan
    try:
        value = float(raw)
    except ValueError:
        log.warning("line %d: unparseable %s cell %r; marked missing", line_no, column, raw)
        return np.nan
    if value == TMY3_SENTINEL:
        return np.nan
    return value


def parse_tmy3(file, nominal_year: int = 2005) -> HourlySeries:
    """Parse an NREL TMY3 CSV into an HourlySeries.

    Extracts global horizontal irradiance and total sky cover (tenths -> fraction)
    and reads the station's latitude/longitude/UTC offset from the first line.
    TMY3 months are stitched from different source years, so row order defines the
    hour grid, rebased onto ``nominal_year`` (must not be a leap year).
    """
    if nominal_year % 4 == 0 and (nominal_year % 100 != 0 or nominal_year % 400 == 0):
        raise ConfigError(f"nominal_year {nominal_year} is a leap year; TMY3 has {TMY3_ROWS} rows")
    handle, owned = _open_text(file)
    try:
        reader = csv.reader(handle)
        try:
            station = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        if len(station) < 6:
            raise ParseError(f"station header has {len(station)} fields, expected >= 6", line=1)
        try:
            utc_offset = float(station[3])
            latitude = float(station[4])
            longitude = float(station[5])
        except ValueError as exc:
            raise ParseError(f"bad station header field: {exc}", line=1) from None
        site = SiteLocation(latitude=latitude, longitude=longitude, utc_offset=utc_offset)

        try:
            columns = next(reader)
        except StopIteration:
            raise ParseError("missing column header", line=2) from None
        names = [c.strip() for c in columns]
        try:
            ghi_col = names.index("GHI (W/m^2)")
            cld_col = names.index("TotCld (tenths)")
        except ValueError as exc:
            raise ParseError(f"column header missing required column: {exc}", line=2) from None

        irr, cld = [], []
        for line_no, row in enumerate(reader, start=3):
            if not row:
                continue
            if len(row) <= max(ghi_col, cld_col):
                raise ParseError(f"row has {len(row)} fields", line=line_no)
            irr.append(_parse_cell(row[ghi_col], line_no, "GHI"))
            tenths = _parse_cell(row[cld_col], line_no, "TotCld")
            cld.append(tenths / 10.0 if not np.isnan(tenths) else np.nan)
    finally:
        if owned:
            handle.close()

    if len(irr) != TMY3_ROWS:
        raise StructuralError(f"expected {TMY3_ROWS} data rows, found {len(irr)}")
    timestamps = hourly_range(np.datetime64(f"{nominal_year}-01-01T01:00:00"), TMY3_ROWS)
    return from_arrays(site, timestamps, np.array(irr), np.array(cld))


_CC_DIVISOR = {"fraction": 1.0, "tenths": 10.0, "oktas": 8.0}


def parse_generic_csv(file, column_map: dict, site: SiteLocation, cloud_cover_unit: str = "fraction") -> HourlySeries:
    """Parse an arbitrary hourly CSV given a column mapping.

    ``column_map`` names the ``timestamp``, ``irradiance`` and ``cloud_cover``
    columns.  Rows are sorted by timestamp; hours absent between the first and
    last row become missing records.  Identical duplicate rows are dropped;
    conflicting duplicates are a structural error.
    """
    for role in ("timestamp", "irradiance", "cloud_cover"):
        if role not in column_map:
            raise ConfigError(f"column_map missing role {role!r}")
    if cloud_cover_unit not in _CC_DIVISOR:
        raise ConfigError(f"unknown cloud_cover_unit {cloud_cover_unit!r}; expected fraction|tenths|oktas")
    divisor = _CC_DIVISOR[cloud_cover_unit]

    handle, owned = _open_text(file)
    try:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ParseError("empty file", line=1)
        for role, name in column_map.items():
            if name not in reader.fieldnames:
                raise ConfigError(f"mapped column {name!r} ({role}) not in file columns {reader.fieldnames}")

        rows = {}
        conflicts = []
        for line_no, row in enumerate(reader, start=2):
            raw_ts = (row[column_map["timestamp"]] or "").strip()
            try:
                ts = np.datetime64(raw_ts, "s")
            except ValueError:
                raise ParseError(f"bad timestamp {raw_ts!r}", line=line_no) from None
            irr = _parse_cell(row[column_map["irradiance"]] or "", line_no, "irradiance")
            cc = _parse_cell(row[column_map["cloud_cover"]] or "", line_no, "cloud_cover")
            if not np.isnan(cc):
                cc = cc / divisor
            value = (irr, cc)
            if ts in rows:
                prev = rows[ts]
                same = all(
                    (np.isnan(a) and np.isnan(b)) or a == b for a, b in zip(prev, value)
                )
                if not same:
                    conflicts.append(str(ts))
                continue
            rows[ts] = value
    finally:
        if owned:
            handle.close()

    if conflicts:
        raise StructuralError(f"conflicting duplicate timestamps: {', '.join(sorted(set(conflicts))[:10])}")
    if not rows:
        raise StructuralError("no data rows")

    keys = np.array(sorted(rows.keys()), dtype="datetime64[s]")
    n_hours = int((keys[-1] - keys[0]).astype("timedelta64[s]").astype(np.int64)) // 3600 + 1
    timestamps = hourly_range(keys[0], n_hours)
    irr = np.full(n_hours, np.nan)
    cc = np.full(n_hours, np.nan)
    offsets = ((keys - keys[0]).astype("timedelta64[s]").astype(np.int64)) // 3600
    for ts, off in zip(keys, offsets):
        sec = int((ts - keys[0]).astype("timedelta64[s]").astype(np.int64))
        if sec % 3600 != 0:
            raise StructuralError(f"timestamp {ts} not on the hourly grid of {keys[0]}")
        irr[off], cc[off] = rows[ts]
    return from_arrays(site, timestamps, irr, cc)


# -- cleaning -------------------------------------------------------------------------


def clean_irradiance(series: HourlySeries) -> HourlySeries:
    """Clip irradiance to its feasible range: below 10 W/m^2 -> 0, above 1050 -> 1050."""
    irr = series.irradiance.copy()
    present = ~np.isnan(irr)
    irr[present & (irr < IRRADIANCE_FLOOR)] = 0.0
    irr[present & (irr > IRRADIANCE_MAX)] = IRRADIANCE_MAX
    return replace(series, irradiance=irr)


def clean_cloud_cover(series: HourlySeries) -> HourlySeries:
    """Clip cloud cover fractions to [0, 1]."""
    cc = np.clip(series.cloud_cover, 0.0, 1.0)
    return replace(series, cloud_cover=cc)


def clean_clearness(k_values) -> np.ndarray:
    """Clip clearness indices to the feasible range [0, 0.85]."""
    return np.clip(np.asarray(k_values, dtype=np.float64), 0.0, K_MAX)


def _missing_runs(values: np.ndarray):
    """Yield (start, length) for each maximal run of NaN."""
    isnan = np.isnan(values)
    i, n = 0, len(values)
    while i < n:
        if isnan[i]:
            j = i
            while j < n and isnan[j]:
                j += 1
            yield i, j - i
            i = j
        else:
            i += 1


def impute_gaps(series: HourlySeries) -> HourlySeries:
    """Fill short gaps per channel; long or boundary gaps stay missing.

    Length-1 gaps take the mean of the adjacent values, lengths 2..3 are
    linearly interpolated; anything longer (or missing a neighbor) is left
    as-is, flagged invalid, and recorded in the gap report.
    """
    irr = series.irradiance.copy()
    cc = series.cloud_cover.copy()
    quality = series.quality.copy()
    report = list(series.gap_report)
    n = len(series)

    for channel, values in (("irradiance", irr), ("cloud_cover", cc)):
        for start, length in _missing_runs(values):
            end = start + length  # one past
            has_left = start > 0
            has_right = end < n
            if has_left and has_right and length <= MAX_IMPUTE_GAP:
                left, right = values[start - 1], values[end]
                if length == 1:
                    values[start] = 0.5 * (left + right)
                else:
                    values[start:end] = left + (right - left) * np.arange(1, length + 1) / (length + 1)
                for i in range(start, end):
                    if quality[i] < _QUALITY_CODE[Quality.IMPUTED]:
                        quality[i] = _QUALITY_CODE[Quality.IMPUTED]
                report.append(GapSpan(channel, series.timestamps[start], length, "imputed"))
            else:
                quality[start:end] = _QUALITY_CODE[Quality.INVALID]
                report.append(GapSpan(channel, series.timestamps[start], length, "unfilled"))

    return HourlySeries(series.site, series.timestamps, irr, cc, quality, report)


def ingest_pipeline(raw: HourlySeries) -> HourlySeries:
    """Standard cleaning order: clip irradiance and cloud cover, then impute gaps."""
    return impute_gaps(clean_cloud_cover(clean_irradiance(raw)))


# -- canonical CSV --------------------------------------------------------------------


def _format_value(v: float) -> str:
    return "" if np.isnan(v) else repr(float(v))


def write_canonical(series: HourlySeries, file) -> None:
    """Write the canonical CSV (site metadata comments, exact header, ISO timestamps)."""
    handle, owned = (open(file, "w", newline=""), True) if isinstance(file, (str, Path)) else (file, False)
    try:
        handle.write(f"# site_latitude = {series.site.latitude!r}\n")
        handle.write(f"# site_longitude = {series.site.longitude!r}\n")
        handle.write(f"# site_utc_offset = {series.site.utc_offset!r}\n")
        handle.write(CANONICAL_HEADER + "\n")
        for i in range(len(series)):
            handle.write(
                f"{series.timestamps[i]},{_format_value(series.irradiance[i])},"
                f"{_format_value(series.cloud_cover[i])},{_QUALITY_FROM_CODE[int(series.quality[i])].value}\n"
            )
    finally:
        if owned:
            handle.close()


def read_canonical(file, site: SiteLocation | None = None) -> HourlySeries:
    """Read the canonical CSV; site comes from the comment block unless given."""
    handle, owned = _open_text(file)
    try:
        meta = {}
        line_no = 0
        for line in handle:
            line_no += 1
            line = line.rstrip("\n")
            if line.startswith("#"):
                if "=" in line:
                    key, _, value = line.lstrip("# ").partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if line != CANONICAL_HEADER:
                raise ParseError(f"expected canonical header {CANONICAL_HEADER!r}, got {line!r}", line=line_no)
            break
        else:
            raise ParseError("missing canonical header", line=line_no or 1)

        if site is None:
            try:
                site = SiteLocation(
                    latitude=float(meta["site_latitude"]),
                    longitude=float(meta["site_longitude"]),
                    utc_offset=float(meta["site_utc_offset"]),
                )
            except KeyError as exc:
                raise ParseError(f"no site metadata ({exc}) and no site argument", line=line_no) from None

        timestamps, irr, cc, quality = [], [], [], []
        quality_codes = {q.value: code for q, code in _QUALITY_CODE.items()}
        for line in handle:
            line_no += 1
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ParseError(f"expected 4 fields, got {len(parts)}", line=line_no)
            try:
                timestamps.append(np.datetime64(parts[0], "s"))
            except ValueError:
                raise ParseError(f"bad timestamp {parts[0]!r}", line=line_no) from None
            irr.append(float(parts[1]) if parts[1] else np.nan)
            cc.append(float(parts[2]) if parts[2] else np.nan)
            if parts[3] not in quality_codes:
                raise ParseError(f"bad quality {parts[3]!r}", line=line_no)
            quality.append(quality_codes[parts[3]])
    finally:
        if owned:
            handle.close()

    if not timestamps:
        raise StructuralError("canonical file has no data rows")
    return HourlySeries(
        site,
        np.array(timestamps, dtype="datetime64[s]"),
        np.array(irr),
        np.array(cc),
        np.array(quality, dtype=np.uint8),
    )
