"""Solar geometry: extraterrestrial horizontal irradiance, clearness index, day/night flag.

Closed-form equations only (Spencer eccentricity and equation-of-time series,
Cooper declination), no ephemeris dependency.  Hourly records are averages over
the hour ending at their timestamp, so all geometry is evaluated at the hour
midpoint (timestamp minus 30 minutes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SOLAR_CONSTANT = 1367.0  # W/m^2
DAYLIGHT_THRESHOLD = 1.0  # W/m^2; below this an hour counts as night
K_MAX = 0.85  # clearness index cap after cleaning


@dataclass(frozen=True)
class SiteLocation:
    """Geographic site; longitude east-positive, utc_offset in hours."""

    latitude: float
    longitude: float
    utc_offset: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")
        if not -12.0 <= self.utc_offset <= 14.0:
            raise ValueError(f"utc_offset {self.utc_offset} outside [-12, 14]")


def _as_datetime64(timestamps) -> np.ndarray:
    return np.asarray(timestamps, dtype="datetime64[s]")


def day_of_year_and_hour(timestamps) -> tuple[np.ndarray, np.ndarray]:
    """Split timestamps into day-of-year (1-based) and decimal hour of day."""
    ts = _as_datetime64(timestamps)
    days = ts.astype("datetime64[D]")
    doy = (days - days.astype("datetime64[Y]")).astype(np.int64) + 1
    hour = (ts - days).astype("timedelta64[s]").astype(np.float64) / 3600.0
    return doy, hour


def day_angle(doy: np.ndarray) -> np.ndarray:
    """Fractional-year angle in radians for day-of-year ``doy``."""
    return 2.0 * np.pi * (np.asarray(doy, dtype=np.float64) - 1.0) / 365.0


def eccentricity_correction(doy) -> np.ndarray:
    """Earth-sun distance correction factor (Spencer Fourier series)."""
    g = day_angle(doy)
    return (
        1.000110
        + 0.034221 * np.cos(g)
        + 0.001280 * np.sin(g)
        + 0.000719 * np.cos(2.0 * g)
        + 0.000077 * np.sin(2.0 * g)
    )


def declination(doy) -> np.ndarray:
    """Solar declination in radians (Cooper's formula)."""
    d = np.asarray(doy, dtype=np.float64)
    return np.radians(23.45) * np.sin(2.0 * np.pi * (284.0 + d) / 365.0)


def equation_of_time(doy) -> np.ndarray:
    """Equation of time in minutes (Spencer series)."""
    g = day_angle(doy)
    return 229.18 * (
        0.000075
        + 0.001868 * np.cos(g)
        - 0.032077 * np.sin(g)
        - 0.014615 * np.cos(2.0 * g)
        - 0.040890 * np.sin(2.0 * g)
    )


def cos_zenith(site: SiteLocation, doy, clock_hour) -> np.ndarray:
    """Cosine of the solar zenith angle at local-standard decimal ``clock_hour``."""
    d = np.asarray(doy, dtype=np.float64)
    h = np.asarray(clock_hour, dtype=np.float64)
    # local standard time -> apparent solar time (longitude + equation of time)
    standard_meridian = 15.0 * site.utc_offset
    solar_hour = h + (4.0 * (site.longitude - standard_meridian) + equation_of_time(d)) / 60.0
    hour_angle = np.radians(15.0 * (solar_hour - 12.0))
    lat = np.radians(site.latitude)
    dec = declination(d)
    return np.sin(lat) * np.sin(dec) + np.cos(lat) * np.cos(dec) * np.cos(hour_angle)


def extraterrestrial_horizontal(site: SiteLocation, timestamps) -> np.ndarray | float:
    """Extraterrestrial horizontal irradiance (W/m^2) for hour-ending timestamps.

    Evaluated at the hour midpoint; clamped to 0 when the sun is below the
    horizon.  Accepts a scalar datetime / datetime64 or an array.
    """
    ts = _as_datetime64(timestamps)
    scalar = ts.ndim == 0
    mid = np.atleast_1d(ts) - np.timedelta64(1800, "s")
    doy, hour = day_of_year_and_hour(mid)
    i0 = SOLAR_CONSTANT * eccentricity_correction(doy) * np.maximum(0.0, cos_zenith(site, doy, hour))
    return float(i0[0]) if scalar else i0


def clearness_index(i, i0) -> np.ndarray | float:
    """Ratio of measured to extraterrestrial horizontal irradiance, clipped to [0, K_MAX].

    Night hours (i0 at or below DAYLIGHT_THRESHOLD) map to 0 by convention.
    """
    i_arr = np.asarray(i, dtype=np.float64)
    i0_arr = np.asarray(i0, dtype=np.float64)
    scalar = i_arr.ndim == 0 and i0_arr.ndim == 0
    i_arr, i0_arr = np.atleast_1d(i_arr), np.atleast_1d(i0_arr)
    day = i0_arr > DAYLIGHT_THRESHOLD
    k = np.zeros(np.broadcast(i_arr, i0_arr).shape)
    ratio = np.divide(i_arr, i0_arr, out=np.zeros_like(k), where=day)
    k[day] = np.clip(ratio, 0.0, K_MAX)[day]
    # missing irradiance stays missing rather than silently becoming 0
    k = np.where(day & np.isnan(np.broadcast_to(i_arr, k.shape)), np.nan, k)
    return float(k[0]) if scalar else k


def irradiance_from_clearness(k, i0) -> np.ndarray | float:
    """Invert the clearness index: I = k * I0."""
    return np.asarray(k, dtype=np.float64) * np.asarray(i0, dtype=np.float64)


def day_night_flag(i0) -> np.ndarray | bool:
    """True for daytime hours, i.e. extraterrestrial irradiance above the threshold."""
    flag = np.asarray(i0, dtype=np.float64) > DAYLIGHT_THRESHOLD
    return bool(flag) if flag.ndim == 0 else flag


@dataclass(frozen=True)
class ClearnessSample:
    """One hour's clearness index with its denominator and day/night state."""

    k: float
    i0: float
    daytime: bool

    def __post_init__(self):
        if not 0.0 <= self.k <= K_MAX:
            raise ValueError(f"k {self.k} outside [0, {K_MAX}]")
        if self.i0 < 0.0:
            raise ValueError(f"i0 {self.i0} negative")
        if not self.daytime and self.k != 0.0:
            raise ValueError("night hours carry k = 0 by convention")


def clearness_sample(i: float, i0: float) -> ClearnessSample:
    """Bundle a measurement into a validated ClearnessSample."""
    return ClearnessSample(
        k=float(clearness_index(i, i0)),
        i0=float(i0),
        daytime=day_night_flag(i0),
    )
