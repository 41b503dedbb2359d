"""Unit conventions, spacetime events and flat-space causal structure.

Everything inside the package runs in geometric units (c = G = 1) with the
metre as the length unit: times are stored as c*t, masses as G*M/c^2 and
accelerations as a/c^2.  SI values only appear at the I/O boundary through
:func:`convert_units`.

Sign convention is (+, -, -, -).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants as _sc

from .errors import HorizonLabError

# speed of light in geometric units; kept symbolic in formulas
C = 1.0


@dataclass(frozen=True)
class Constants:
    c: float = _sc.c  # m / s
    G: float = _sc.G  # m^3 / (kg s^2)


SI = Constants()

TIMELIKE_FUTURE = "timelike-future"
TIMELIKE_PAST = "timelike-past"
LIGHTLIKE = "lightlike"
SPACELIKE = "spacelike"
ZERO = "zero"

# |ds2| below this fraction of the summed squared separations counts as null
NULL_RTOL = 8 * 2.0**-52


@dataclass(frozen=True)
class MinkowskiEvent:
    ct: float
    x: float
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("ct", "x", "y", "z"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"non-finite {name}={v!r}")


@dataclass(frozen=True)
class Interval:
    ds2: float
    causal_class: str


def interval_minkowski(a: MinkowskiEvent, b: MinkowskiEvent) -> Interval:
    """Squared interval from ``a`` to ``b`` and its causal class.

    The class is ``lightlike`` when ``ds2`` vanishes to rounding, i.e.
    ``|ds2| <= NULL_RTOL * (dct^2 + dx^2 + dy^2 + dz^2)``.
    """
    dct = b.ct - a.ct
    dx = b.x - a.x
    dy = b.y - a.y
    dz = b.z - a.z
    t2 = dct * dct
    s2 = dx * dx + dy * dy + dz * dz
    ds2 = t2 - s2
    if t2 == 0.0 and s2 == 0.0:
        return Interval(0.0, ZERO)
    if abs(ds2) <= NULL_RTOL * (t2 + s2):
        return Interval(ds2, LIGHTLIKE)
    if ds2 > 0:
        return Interval(ds2, TIMELIKE_FUTURE if dct > 0 else TIMELIKE_PAST)
    return Interval(ds2, SPACELIKE)


def causal_reachable(src: MinkowskiEvent, dst: MinkowskiEvent) -> bool:
    """True if a signal no faster than light can travel from ``src`` to ``dst``."""
    iv = interval_minkowski(src, dst)
    if iv.causal_class == TIMELIKE_FUTURE:
        return True
    return iv.causal_class == LIGHTLIKE and dst.ct > src.ct


def _si_factor(dimension: str, consts: Constants) -> float:
    # multiply an SI value by this to get geometric units
    if dimension == "length":
        return 1.0
    if dimension == "time":
        return consts.c
    if dimension == "mass":
        return consts.G / consts.c**2
    if dimension == "acceleration":
        return 1.0 / consts.c**2
    raise HorizonLabError(f"unknown dimension {dimension!r}")


def convert_units(value, dimension: str, direction: str = "to_geometric", consts: Constants = SI):
    """Convert between SI and geometric (c = G = 1, metre-based) units.

    Parameters
    ----------
    value : float or ndarray
    dimension : {"length", "time", "mass", "acceleration"}
    direction : {"to_geometric", "to_si"}
    """
    factor = _si_factor(dimension, consts)
    if direction == "to_geometric":
        return value * factor
    if direction == "to_si":
        return value / factor
    raise HorizonLabError(f"unknown direction {direction!r}")
