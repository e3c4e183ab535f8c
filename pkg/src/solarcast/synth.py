"""Deterministic synthetic benchmark series.

Clear-sky envelope is 0.75 x extraterrestrial horizontal irradiance; cloud
cover follows a seeded bounded random walk with a seasonal bias (cloudier
winters); irradiance is the envelope attenuated by cloud cover plus Gaussian
noise, run through the standard cleaning pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SiteLocation, extraterrestrial_horizontal
from .ingest import HourlySeries, from_arrays, hourly_range, ingest_pipeline

PHOENIX = SiteLocation(latitude=33.45, longitude=-112.07, utc_offset=-7.0)


@dataclass(frozen=True)
class SynthConfig:
    site: SiteLocation = PHOENIX
    year: int = 2013
    n_hours: int = 8760
    seed: int = 42
    envelope_factor: float = 0.75
    cloud_attenuation: float = 0.75
    cloud_base: float = 0.4
    cloud_seasonal_amplitude: float = 0.2
    cloud_sigma: float = 0.08  # hourly walk volatility
    cloud_pull: float = 0.02  # mean reversion toward the seasonal level
    noise_sigma: float = 20.0  # W/m^2


def clear_sky_envelope(config: SynthConfig, timestamps) -> np.ndarray:
    return config.envelope_factor * extraterrestrial_horizontal(config.site, timestamps)


def cloud_walk(config: SynthConfig, timestamps, rng: np.random.Generator) -> np.ndarray:
    """Bounded random walk on [0, 1] pulled toward a seasonal mean level."""
    mid = np.asarray(timestamps, dtype="datetime64[s]") - np.timedelta64(1800, "s")
    days = mid.astype("datetime64[D]")
    doy = (days - days.astype("datetime64[Y]")).astype(np.int64) + 1
    # cloudier around the turn of the year, clearer mid-year
    seasonal = config.cloud_base + config.cloud_seasonal_amplitude * np.cos(2.0 * np.pi * doy / 365.0)
    seasonal = np.clip(seasonal, 0.0, 1.0)

    n = len(mid)
    steps = rng.normal(0.0, config.cloud_sigma, size=n)
    cc = np.empty(n)
    level = seasonal[0]
    for t in range(n):
        level = level + steps[t] + config.cloud_pull * (seasonal[t] - level)
        level = min(max(level, 0.0), 1.0)
        cc[t] = level
    return cc


def generate(config: SynthConfig) -> HourlySeries:
    """Build the synthetic series and run it through the ingest cleaning pipeline."""
    rng = np.random.default_rng(config.seed)
    timestamps = hourly_range(np.datetime64(f"{config.year}-01-01T01:00:00"), config.n_hours)
    envelope = clear_sky_envelope(config, timestamps)
    cc = cloud_walk(config, timestamps, rng)
    noise = rng.normal(0.0, config.noise_sigma, size=config.n_hours) if config.noise_sigma > 0 else 0.0
    irradiance = envelope * (1.0 - config.cloud_attenuation * cc) + noise
    raw = from_arrays(config.site, timestamps, irradiance, cc)
    return ingest_pipeline(raw)
