"""Uniformly accelerated observer (Rob) in flat spacetime.

Rob hovers at fixed proper distance c^2/a from his horizon.  Alice leaves him
at tau = 0 on the inertial worldline x = c^2/a.  Only the right wedge
x > |ct| is charted.

The coordinate-level helpers (``to_rindler_coords`` / ``to_minkowski_coords``)
accept numpy arrays; the event-level functions wrap them for single events.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHorizon, OutsideWedge
from .foundation import C, MinkowskiEvent


@dataclass(frozen=True)
class RindlerFrame:
    a: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"acceleration must be positive and finite, got {self.a!r}")

    @property
    def rob_distance(self) -> float:
        return C**2 / self.a


@dataclass(frozen=True)
class RindlerEvent:
    tau: float
    chi: float
    y: float = 0.0
    z: float = 0.0


def to_rindler_coords(ct, x, a):
    """Map (ct, x) inside the right wedge to (tau, chi).

    ``tau = (c/a) atanh(ct/x)`` is evaluated as ``0.5 log1p(2|ct|/(x-|ct|))``
    with the sign of ct restored, which keeps full relative precision both
    near ct = 0 and near either horizon branch.  Raises :class:`OutsideWedge`
    unless ``x > |ct|`` everywhere.
    """
    ct = np.asarray(ct, dtype=float)
    x = np.asarray(x, dtype=float)
    if not np.all(x > np.abs(ct)):
        raise OutsideWedge("event not strictly inside the right Rindler wedge (need x > |ct|)")
    act = np.abs(ct)
    near = x - act  # exact when the event hugs the horizon
    tau = np.sign(ct) * (C / a) * 0.5 * np.log1p(2.0 * act / near)
    chi = np.sqrt(near * (x + act))
    return tau, chi


def to_minkowski_coords(tau, chi, a):
    tau = np.asarray(tau, dtype=float)
    chi = np.asarray(chi, dtype=float)
    if not np.all(chi > 0):
        raise DegenerateHorizon("chi must be positive; the horizon is not a chart point")
    arg = a * tau / C
    return chi * np.sinh(arg), chi * np.cosh(arg)


def minkowski_to_rindler(e: MinkowskiEvent, f: RindlerFrame) -> RindlerEvent:
    tau, chi = to_rindler_coords(e.ct, e.x, f.a)
    return RindlerEvent(float(tau), float(chi), e.y, e.z)


def rindler_to_minkowski(e: RindlerEvent, f: RindlerFrame) -> MinkowskiEvent:
    ct, x = to_minkowski_coords(e.tau, e.chi, f.a)
    return MinkowskiEvent(float(ct), float(x), e.y, e.z)


def rob_worldline(f: RindlerFrame, tau) -> MinkowskiEvent:
    """Rob's event at proper time ``tau`` (on x^2 - (ct)^2 = (c^2/a)^2)."""
    return rindler_to_minkowski(RindlerEvent(tau, f.rob_distance), f)


def alice_worldline(f: RindlerFrame, ct) -> MinkowskiEvent:
    """Alice's event at Minkowski time ``ct``; she sits at x = c^2/a."""
    return MinkowskiEvent(float(ct), f.rob_distance)


def alice_chi(f: RindlerFrame, tau):
    """Alice's distance from the horizon as a function of Rob's time.

    Decreases towards zero but stays positive for every finite ``tau``.
    """
    return f.rob_distance / np.cosh(f.a * np.asarray(tau, dtype=float) / C)


def alice_crossing_proper_time(f: RindlerFrame) -> float:
    """Alice's proper time from departure to the horizon crossing, c/a."""
    return C / f.a


def simultaneity_slope(f: RindlerFrame, tau):
    """Slope of Rob's plane of simultaneity, ct = slope * x, at time ``tau``."""
    return np.tanh(f.a * np.asarray(tau, dtype=float) / C)


def rindler_time_coefficient(chi, f: RindlerFrame):
    """Coefficient a^2 chi^2 / c^2 of d(tau)^2 in the Rindler line element."""
    return (f.a * np.asarray(chi, dtype=float) / C) ** 2


def rindler_interval(e: RindlerEvent, dtau, dchi, dy, dz, f: RindlerFrame):
    """Line element ``(a chi)^2 dtau^2 - dchi^2 - dy^2 - dz^2`` at ``e``.

    With c = 1 the printed coefficient a^2 chi^2 / c^2 multiplies dtau^2
    directly; no extra factor of c^2 is applied to the time term.
    """
    if not e.chi > 0:
        raise DegenerateHorizon("chi must be positive; the horizon is not a chart point")
    return rindler_time_coefficient(e.chi, f) * C**2 * dtau**2 - dchi**2 - dy**2 - dz**2
