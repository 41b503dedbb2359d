"""Exterior Schwarzschild geometry and its near-horizon Rindler form."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CoordinateSingularity, HorizonLabError
from .evaporation import EvaporationLaw
from .foundation import C, SI


@dataclass(frozen=True)
class SpacetimeParams:
    """Initial Schwarzschild radius ``R0`` and evaporation constant ``k``.

    ``k = 0`` is the eternal black hole.
    """

    R0: float
    k: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.R0) and self.R0 > 0):
            raise ValueError(f"R0 must be positive, got {self.R0!r}")
        if not (np.isfinite(self.k) and self.k >= 0):
            raise ValueError(f"k must be non-negative, got {self.k!r}")

    @property
    def M(self) -> float:
        # geometric mass, R = 2GM/c^2 with G = c = 1
        return self.R0 / 2.0

    @property
    def eternal(self) -> bool:
        return self.k == 0.0

    @cached_property
    def law(self) -> EvaporationLaw:
        return EvaporationLaw(self.R0, self.k)


@dataclass(frozen=True)
class MetricComponents:
    g_tt: float
    g_rr: float
    g_thth: float
    g_phph: float
    f: float


def schwarzschild_radius(M, units: str = "geometric"):
    """R = 2GM/c^2.  ``units="si"`` takes kilograms and returns metres."""
    if np.any(np.asarray(M) < 0):
        raise HorizonLabError("mass must be non-negative")
    if units == "geometric":
        return 2.0 * M
    if units == "si":
        return 2.0 * SI.G * M / SI.c**2
    raise HorizonLabError(f"unknown unit system {units!r}")


def lapse(r, R):
    """f = 1 - R/r, written as (r - R)/r to keep precision close to the horizon."""
    return (r - R) / r


def metric_components(r, R) -> MetricComponents:
    """Schwarzschild components on the equatorial plane (theta = pi/2)."""
    if not r > R:
        raise CoordinateSingularity(f"r={r!r} is not outside the horizon R={R!r}")
    f = lapse(r, R)
    return MetricComponents(g_tt=f * C**2, g_rr=-1.0 / f, g_thth=-(r * r), g_phph=-(r * r), f=f)


def near_horizon_chi(delta_r, R):
    """Proper distance from the horizon to leading order, 2 sqrt(R dr)."""
    if np.any(np.asarray(delta_r) < 0):
        raise HorizonLabError("delta_r must be non-negative")
    return 2.0 * np.sqrt(R * delta_r)


def _distance_from_horizon(r, R):
    # closed-form integral of sqrt(r/(r-R)) from R to r
    d = r - R
    return np.sqrt(r * d) + R * np.arcsinh(np.sqrt(d / R))


def proper_distance_exact(r1, r2, R):
    """Radial proper distance between areal radii ``r1 <= r2`` outside ``R``."""
    if not (R < r1 <= r2):
        raise CoordinateSingularity(f"need R < r1 <= r2, got R={R!r}, r1={r1!r}, r2={r2!r}")
    return _distance_from_horizon(r2, R) - _distance_from_horizon(r1, R)


def near_horizon_metric(chi, R) -> MetricComponents:
    """Rindler-form metric near the horizon: g_tt = chi^2 c^2 / 4R^2, g_chichi = -1.

    Evaluated as (a chi / c)^2 c^2 with a = c^2 / 2R, the same expression the
    Rindler frame uses, so the two agree bit for bit.
    """
    if not chi > 0:
        raise HorizonLabError("chi must be positive")
    a = effective_acceleration(R)
    g_tt = (a * chi / C) ** 2 * C**2
    return MetricComponents(g_tt=g_tt, g_rr=-1.0, g_thth=-1.0, g_phph=-1.0, f=g_tt / C**2)


def effective_acceleration(R):
    """Acceleration of the Rindler frame matching the near-horizon metric, c^2/2R."""
    if not R > 0:
        raise HorizonLabError("R must be positive")
    return C**2 / (2.0 * R)
