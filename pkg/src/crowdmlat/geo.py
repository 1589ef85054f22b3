"""WGS84 geodetic <-> ECEF conversions and small geometric primitives.

All functions are pure; positions are degrees/meters (geodetic) or meters
(ECEF). The iterative geodetic inverse converges to < 1e-12 rad, comfortably
inside the 1e-6 m round-trip contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidCoordinateError

# WGS84 ellipsoid
WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_B = WGS84_A * (1.0 - WGS84_F)
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)  # first eccentricity squared

SPEED_OF_LIGHT = 299792458.0

_MIN_ALTITUDE = -1000.0
_MAX_ALTITUDE = 100000.0
_MIN_ECEF_NORM = 6.2e6
_MAX_ECEF_NORM = 6.6e6


@dataclass(frozen=True)
class GeodeticPosition:
    """Latitude/longitude in degrees, altitude in meters above the ellipsoid."""

    latitude: float
    longitude: float
    altitude: float = 0.0

    def __post_init__(self):
        if not (-90.0 <= self.latitude <= 90.0):
            raise InvalidCoordinateError(f"latitude {self.latitude} outside [-90, 90]")
        if not (-180.0 <= self.longitude < 180.0):
            raise InvalidCoordinateError(
                f"longitude {self.longitude} outside [-180, 180)"
            )
        if not (
            math.isfinite(self.altitude)
            and _MIN_ALTITUDE < self.altitude < _MAX_ALTITUDE
        ):
            raise InvalidCoordinateError(
                f"altitude {self.altitude} outside ({_MIN_ALTITUDE}, {_MAX_ALTITUDE})"
            )


@dataclass(frozen=True)
class EcefPosition:
    """Earth-centered Earth-fixed Cartesian position in meters."""

    x: float
    y: float
    z: float

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, a) -> "EcefPosition":
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


def normalize_longitude(lon_deg: float) -> float:
    """Wrap a longitude into [-180, 180)."""
    return (lon_deg + 180.0) % 360.0 - 180.0


def geodetic_to_ecef(p: GeodeticPosition) -> EcefPosition:
    """Convert a WGS84 geodetic position to ECEF meters."""
    lat = math.radians(p.latitude)
    lon = math.radians(p.longitude)
    sin_lat, cos_lat = math.sin(lat), math.cos(lat)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    x = (n + p.altitude) * cos_lat * math.cos(lon)
    y = (n + p.altitude) * cos_lat * math.sin(lon)
    z = (n * (1.0 - WGS84_E2) + p.altitude) * sin_lat
    return EcefPosition(x, y, z)


def geodetic_to_ecef_arrays(lat_deg, lon_deg, alt_m) -> np.ndarray:
    """Vectorized geodetic -> ECEF. Returns an (n, 3) array.

    Inputs are not range-validated; use GeodeticPosition for checked scalars.
    """
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    alt = np.asarray(alt_m, dtype=float)
    sin_lat, cos_lat = np.sin(lat), np.cos(lat)
    n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * sin_lat**2)
    x = (n + alt) * cos_lat * np.cos(lon)
    y = (n + alt) * cos_lat * np.sin(lon)
    z = (n * (1.0 - WGS84_E2) + alt) * sin_lat
    return np.stack([x, y, z], axis=-1)


def ecef_to_geodetic(p: EcefPosition) -> GeodeticPosition:
    """Convert ECEF meters to WGS84 geodetic degrees/meters.

    Raises InvalidCoordinateError for vectors outside the near-Earth shell
    (norm in [6.2e6, 6.6e6] m), which also rejects the geocenter singularity.
    """
    r = p.norm()
    if not (_MIN_ECEF_NORM <= r <= _MAX_ECEF_NORM):
        raise InvalidCoordinateError(
            f"ECEF norm {r:.3e} m outside near-Earth range "
            f"[{_MIN_ECEF_NORM:.1e}, {_MAX_ECEF_NORM:.1e}]"
        )
    lat, lon, alt = _ecef_to_geodetic_scalar(p.x, p.y, p.z)
    return GeodeticPosition(lat, lon, alt)


def _ecef_to_geodetic_scalar(x: float, y: float, z: float):
    hyp = math.hypot(x, y)
    if hyp < 1e-9:
        # polar axis: longitude undefined, use 0
        lat = 90.0 if z >= 0 else -90.0
        return lat, 0.0, abs(z) - WGS84_B
    lon = math.degrees(math.atan2(y, x))
    if lon >= 180.0:
        lon -= 360.0
    lat = math.atan2(z, hyp * (1.0 - WGS84_E2))
    # fixed-point iteration on latitude; quadratic in practice, the 1e-13 rad
    # stop is ~1 um of ground distance
    for _ in range(20):
        sin_lat = math.sin(lat)
        n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
        alt = hyp / math.cos(lat) - n
        new_lat = math.atan2(z, hyp * (1.0 - WGS84_E2 * n / (n + alt)))
        if abs(new_lat - lat) < 1e-13:
            lat = new_lat
            break
        lat = new_lat
    sin_lat = math.sin(lat)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    if abs(lat) < math.radians(89.0):
        alt = hyp / math.cos(lat) - n
    else:
        alt = z / sin_lat - n * (1.0 - WGS84_E2)
    return math.degrees(lat), lon, alt


def ecef_to_geodetic_arrays(xyz) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ECEF -> geodetic. Returns (lat_deg, lon_deg, alt_m) arrays."""
    xyz = np.asarray(xyz, dtype=float)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    hyp = np.hypot(x, y)
    lon = np.degrees(np.arctan2(y, x))
    lon = np.where(lon >= 180.0, lon - 360.0, lon)
    lat = np.arctan2(z, hyp * (1.0 - WGS84_E2))
    for _ in range(8):
        sin_lat = np.sin(lat)
        n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * sin_lat**2)
        alt = hyp / np.cos(lat) - n
        lat = np.arctan2(z, hyp * (1.0 - WGS84_E2 * n / (n + alt)))
    sin_lat = np.sin(lat)
    n = WGS84_A / np.sqrt(1.0 - WGS84_E2 * sin_lat**2)
    alt = hyp / np.cos(lat) - n
    return np.degrees(lat), lon, alt


def weighted_barycenter(
    points: Sequence[EcefPosition], weights: Sequence[float]
) -> EcefPosition:
    """Component-wise weighted mean of ECEF points.

    Weights must be non-negative with a positive sum.
    """
    if len(points) == 0:
        raise ValueError("weighted_barycenter needs at least one point")
    if len(points) != len(weights):
        raise ValueError("points and weights must have equal length")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must not all be zero")
    arr = np.array([[p.x, p.y, p.z] for p in points])
    mean = (arr * w[:, None]).sum(axis=0) / total
    return EcefPosition.from_array(mean)


def distance(a: EcefPosition, b: EcefPosition) -> float:
    """Euclidean distance in meters between two ECEF points."""
    return math.dist((a.x, a.y, a.z), (b.x, b.y, b.z))


# Local ellipsoid radii, used for small-distance ground metrics.
def _local_radii(lat_deg: float) -> tuple[float, float]:
    sin_lat = math.sin(math.radians(lat_deg))
    denom = 1.0 - WGS84_E2 * sin_lat * sin_lat
    meridian = WGS84_A * (1.0 - WGS84_E2) / denom**1.5
    prime_vertical = WGS84_A / math.sqrt(denom)
    return meridian, prime_vertical


def ground_distance(
    lat1: float, lon1: float, lat2: float, lon2: float
) -> float:
    """Horizontal WGS84 distance in meters, accurate for small separations.

    Uses the local meridian/prime-vertical radii at the mean latitude; the
    error stays below ~0.5% out to a few hundred km, far tighter than any
    localization error this toolkit scores.
    """
    mean_lat = 0.5 * (lat1 + lat2)
    m, n = _local_radii(mean_lat)
    dlat = math.radians(lat2 - lat1)
    dlon = math.radians(normalize_longitude(lon2 - lon1))
    cos_lat = math.cos(math.radians(mean_lat))
    return math.hypot(dlat * m, dlon * n * cos_lat)


def ground_distance_arrays(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Vectorized ground_distance."""
    lat1 = np.asarray(lat1, dtype=float)
    lat2 = np.asarray(lat2, dtype=float)
    mean_lat = np.radians(0.5 * (lat1 + lat2))
    sin_lat = np.sin(mean_lat)
    denom = 1.0 - WGS84_E2 * sin_lat**2
    m = WGS84_A * (1.0 - WGS84_E2) / denom**1.5
    n = WGS84_A / np.sqrt(denom)
    dlat = np.radians(lat2 - lat1)
    dlon = np.radians((np.asarray(lon2) - np.asarray(lon1) + 180.0) % 360.0 - 180.0)
    return np.hypot(dlat * m, dlon * n * np.cos(mean_lat))
