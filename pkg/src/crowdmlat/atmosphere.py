"""Altitude-dependent signal-velocity model.

Radio waves in the troposphere travel slightly below the vacuum speed of
light; the refractive index decays exponentially with altitude,
n(h) = 1 + a0 * exp(-b * h). The path-averaged velocity between two endpoint
altitudes has a closed form used throughout the solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geo import SPEED_OF_LIGHT


@dataclass(frozen=True)
class AtmosphereModel:
    """Refractivity amplitude a0 (dimensionless) and decay constant b (1/m).

    a0 = 0 is the vacuum limit; both parameters are capped at 1e-2, far above
    any physical troposphere.
    """

    a0: float = 1e-3
    b: float = 1e-3

    def __post_init__(self):
        if not (math.isfinite(self.a0) and 0.0 <= self.a0 <= 1e-2):
            raise ValueError(f"a0 {self.a0} outside [0, 1e-2]")
        if not (math.isfinite(self.b) and 0.0 < self.b <= 1e-2):
            raise ValueError(f"b {self.b} outside (0, 1e-2]")


def refractive_index(model: AtmosphereModel, h: float) -> float:
    """n(h) = 1 + a0 * exp(-b * h); > 1 for a0 > 0, decreasing in h."""
    return 1.0 + model.a0 * math.exp(-model.b * h)


def _mean_decay_factor(b: float, h1, h2):
    """Average of exp(-b*h) over the altitude interval [h1, h2].

    Equals (exp(-b*h1) - exp(-b*h2)) / (b*(h2 - h1)), continuously extended
    to exp(-b*h1) when h2 -> h1. Symmetric in (h1, h2). Vectorized.
    """
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    dh = h2 - h1
    u = b * dh
    # (1 - exp(-u))/u via expm1 for stability; series limit at u ~ 0
    small = np.abs(u) < 1e-12
    safe_u = np.where(small, 1.0, u)
    factor = np.where(small, 1.0 - u / 2.0, -np.expm1(-safe_u) / safe_u)
    return np.exp(-b * h1) * factor


def mean_refractivity(model: AtmosphereModel, h1, h2):
    """Path-mean of (n(h) - 1) between endpoint altitudes, i.e. a0 * G where
    G is the mean decay factor. Vectorized."""
    return model.a0 * _mean_decay_factor(model.b, h1, h2)


def effective_velocity(model: AtmosphereModel, h1: float, h2: float) -> float:
    """Average signal velocity (m/s) along a path between altitudes h1, h2.

    Symmetric in its altitude arguments; equals c/n(h) when h1 == h2 and
    exactly c in the vacuum limit a0 = 0.
    """
    return SPEED_OF_LIGHT / (1.0 + float(mean_refractivity(model, h1, h2)))


def inverse_velocity_arrays(model: AtmosphereModel, h1, h2) -> np.ndarray:
    """Vectorized 1/v_hat in s/m; multiply by path length for the delay."""
    return (1.0 + mean_refractivity(model, h1, h2)) / SPEED_OF_LIGHT


def d_mean_decay_factor_db(b: float, h1, h2):
    """Derivative of _mean_decay_factor with respect to b. Vectorized.

    Needed by the joint network fit, which optimizes b. Stable at small
    b*(h2-h1) via a series expansion.
    """
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    dh = h2 - h1
    u = b * dh
    e1 = np.exp(-b * h1)
    small = np.abs(u) < 1e-8
    safe_u = np.where(small, 1.0, u)
    # d/db [e^{-b h1} f(u)] with f(u) = (1 - e^{-u})/u:
    #   = -h1 e^{-b h1} f(u) + e^{-b h1} f'(u) dh
    f = np.where(small, 1.0 - u / 2.0 + u * u / 6.0, -np.expm1(-safe_u) / safe_u)
    fprime = np.where(
        small,
        -0.5 + u / 3.0,
        (safe_u * np.exp(-safe_u) + np.expm1(-safe_u)) / safe_u**2,
    )
    return e1 * (fprime * dh - h1 * f)
