"""Quasi-static evaporation: R(tau)^3 decreases linearly in Rob's time.

    R(tau) = (R0^3 - k tau)^(1/3),   tau_evap = R0^3 / k

The cube law is the mass-loss law dM/dtau ~ -1/M^2 written for R = 2M.  In
units with R0 = 1 it coincides with the form (R0 - k tau)^(1/3).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import EternalBlackHole, HorizonLabError

# R0^3/k carries one rounding, which the cube root would inflate to R ~ 1e-5 R0
# at the nominal tau_evap; fractions this close to zero count as evaporated
_SNAP = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class EvaporationLaw:
    R0: float
    k: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.R0) and self.R0 >= 0):
            raise HorizonLabError(f"R0 must be non-negative, got {self.R0!r}")
        if not (math.isfinite(self.k) and self.k >= 0):
            raise HorizonLabError(f"k must be non-negative, got {self.k!r}")

    @cached_property
    def tau_evap(self) -> float:
        if self.k == 0.0:
            return math.inf
        return self.R0**3 / self.k

    def scalar_state(self, tau: float):
        """(R, R0 - R, dR/dtau) at a single time; fast path for ODE right-hand sides."""
        if self.k == 0.0:
            return self.R0, 0.0, 0.0
        te = self.tau_evap
        frac = (te - tau) / te
        if frac <= _SNAP:
            return 0.0, self.R0, -math.inf
        R = self.R0 * float(np.cbrt(frac))
        shrink = self.R0**3 * (tau / te) / (self.R0**2 + self.R0 * R + R * R)
        return R, shrink, -self.k / (3.0 * R * R)


def _check_tau(tau):
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise HorizonLabError("tau must be non-negative")
    return tau


def _remaining_fraction(law: EvaporationLaw, tau):
    # (tau_evap - tau)/tau_evap == R^3/R0^3, clamped at zero
    te = law.tau_evap
    if te == 0.0:
        return np.zeros_like(tau)
    frac = (te - tau) / te
    return np.where(frac <= _SNAP, 0.0, frac)


def radius_at(law: EvaporationLaw, tau):
    """Horizon radius at Rob's time ``tau``; zero once evaporation completes."""
    tau = _check_tau(tau)
    if law.k == 0.0:
        out = np.full_like(tau, law.R0)
    else:
        out = law.R0 * np.cbrt(_remaining_fraction(law, tau))
    return out if out.ndim else float(out)


def radius_shrinkage(law: EvaporationLaw, tau):
    """R0 - R(tau) without cancellation for small tau.

    Uses R0 - R = (R0^3 - R^3) / (R0^2 + R0 R + R^2).
    """
    tau = _check_tau(tau)
    if law.k == 0.0:
        out = np.zeros_like(tau)
    else:
        R = np.asarray(radius_at(law, tau))
        lost = law.R0**3 * np.minimum(tau / law.tau_evap, 1.0)
        out = lost / (law.R0**2 + law.R0 * R + R * R)
    return out if out.ndim else float(out)


def evaporation_time(law: EvaporationLaw) -> float:
    if law.k == 0.0:
        raise EternalBlackHole("k = 0: the black hole never evaporates")
    return law.tau_evap


def calibrate_k(R0: float, desired_tau_evap: float) -> float:
    """Decay constant that makes a hole of radius ``R0`` vanish at ``desired_tau_evap``."""
    if not (R0 > 0 and desired_tau_evap > 0):
        raise HorizonLabError("R0 and tau_evap must both be positive")
    return R0**3 / desired_tau_evap


def flux_proxy(law: EvaporationLaw, tau):
    """|dR/dtau| = k / (3 R^2), the kinematic stand-in for the radiated flux.

    Diverges at ``tau_evap``; evaluating at or beyond it raises.
    """
    tau = _check_tau(tau)
    if law.k == 0.0:
        out = np.zeros_like(tau)
        return out if out.ndim else 0.0
    R = np.asarray(radius_at(law, tau))
    if np.any(R == 0.0):
        raise HorizonLabError("flux proxy is singular at and after tau_evap")
    out = law.k / (3.0 * R * R)
    return out if out.ndim else float(out)
