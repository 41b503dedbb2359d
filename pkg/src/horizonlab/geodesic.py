"""Radial free fall of Alice in the (possibly evaporating) Schwarzschild exterior.

The geodesic equations are stated in Alice's proper time (``geodesic_rhs``)
but integrated with Rob's Schwarzschild time tau as the independent
variable, using the state

    y = [lambda, x = r - R0, w = ln(u0), v = dr/dtau]

Reasons:

* In the evaporating toy model Alice's proper time saturates at a finite
  value while tau runs on to tau_evap (u0 = dtau/dlambda grows
  exponentially), so a lambda-stepper underflows long before the hole is
  gone.  In tau every state component stays bounded.
* ``x`` and ``r - R(tau) = x + (R0 - R(tau))`` keep full relative precision
  at 1e-6 R from the horizon, where ``r`` itself only carries ~10 digits of
  the gap.
* ``w`` keeps u0 ~ exp(70) representable and turns the relative accuracy
  of u0 into an absolute accuracy of ``w``.

The local error of ``x`` is measured against the current gap r - R(tau)
and that of ``v`` against the lapse f (coordinate light speed), so
"rel_tol" means relative to the physically relevant scale near the horizon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dopri
from .errors import CoordinateSingularity, HorizonLabError
from .evaporation import radius_at, radius_shrinkage
from .foundation import C
from .schwarzschild import SpacetimeParams

HORIZON_TOUCH = "horizon_touch"
EVAPORATION_COMPLETE = "evaporation_complete"
LAMBDA_MAX = "lambda_max"
TAU_MAX = "tau_max"
R_MIN_CUTOFF = "r_min_cutoff"
TERMINATIONS = (HORIZON_TOUCH, EVAPORATION_COMPLETE, LAMBDA_MAX, TAU_MAX, R_MIN_CUTOFF)


@dataclass(frozen=True)
class GeodesicState:
    lam: float  # Alice's proper time
    tau: float  # Rob's Schwarzschild time
    r: float
    u0: float  # dtau / dlambda
    ur: float  # dr / dlambda


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: Optional[float] = None
    h_min: float = 0.0
    h_max: float = math.inf
    epsilon_horizon: float = 1e-6
    event_tol: float = 1e-12
    max_steps: int = 200_000
    lambda_max: float = math.inf
    tau_max: float = math.inf
    r_min: Optional[float] = None
    sample_count: int = 0
    include_dtau_metric_terms: bool = False

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise HorizonLabError("rel_tol and abs_tol must be positive")
        if not (0 < self.epsilon_horizon < 1e-2):
            raise HorizonLabError("epsilon_horizon must lie in (0, 1e-2)")
        if not (0 < self.event_tol < self.rel_tol):
            raise HorizonLabError("event_tol must be positive and below rel_tol")
        if self.sample_count < 0:
            raise HorizonLabError("sample_count must be non-negative")


@dataclass(frozen=True)
class Termination:
    kind: str
    tau: float
    lam: float
    residual: float = 0.0
    coincides_with_evaporation: Optional[bool] = None
    tau_evap: float = math.inf


@dataclass
class Trajectory:
    """Column-oriented sample table; every array has the same length."""

    lam: np.ndarray
    tau: np.ndarray
    r: np.ndarray
    u0: np.ndarray
    ur: np.ndarray
    R_tau: np.ndarray
    f: np.ndarray
    energy: np.ndarray
    norm_residual: np.ndarray
    flux_proxy: np.ndarray
    gap: np.ndarray  # r - R(tau), exact-precision version of r - R_tau
    termination: Optional[Termination] = None
    stats: dict = field(default_factory=dict)
    solution: Optional[dopri.Solution] = field(default=None, repr=False)

    COLUMNS = ("lambda", "tau", "r", "R_tau", "f", "u0", "ur", "energy", "norm_residual", "flux_proxy")

    def __len__(self):
        return len(self.tau)

    def column(self, name):
        return self.lam if name == "lambda" else getattr(self, name)

    def rows(self):
        cols = [self.column(c) for c in self.COLUMNS]
        return [tuple(float(c[i]) for c in cols) for i in range(len(self))]


# ----------------------------------------------------------------------------
# initial data and right-hand sides


def initial_state_at_rest(r0, params: SpacetimeParams, ur0: float = 0.0) -> GeodesicState:
    """Alice at radius ``r0`` with radial velocity ``ur0`` (default: at rest).

    u0 follows from f c^2 u0^2 - ur^2 / f = c^2.
    """
    if not r0 > params.R0:
        raise CoordinateSingularity(f"r0={r0!r} is not outside the horizon R0={params.R0!r}")
    f = (r0 - params.R0) / r0
    u0 = math.sqrt((C**2 + ur0 * ur0 / f) / f) / C
    return GeodesicState(0.0, 0.0, float(r0), u0, float(ur0))


def _horizon(params: SpacetimeParams, tau):
    """(R(tau), R0 - R(tau), dR/dtau) as python floats."""
    return params.law.scalar_state(tau)


def geodesic_rhs(state: GeodesicState, params: SpacetimeParams, include_dtau_metric_terms=False):
    """Derivatives with respect to Alice's proper time.

    Returns ``(dtau, dr, du0, dur)``.  Only the instantaneous R(tau) enters
    the Christoffel symbols unless ``include_dtau_metric_terms`` adds the
    d f / d tau contributions.
    """
    R, _, Rdot = _horizon(params, state.tau)
    r = state.r
    f = (r - R) / r
    if not f > 0:
        raise CoordinateSingularity(f"r={r!r} at or inside the horizon R={R!r}")
    fp = R / (r * r)
    u0, ur = state.u0, state.ur
    du0 = -(fp / f) * u0 * ur
    dur = -(C**2 * f * fp / 2.0) * u0 * u0 + (fp / (2.0 * f)) * ur * ur
    if include_dtau_metric_terms and params.k > 0:
        fd = -Rdot / r
        du0 += -(fd / (2.0 * f)) * u0 * u0 + fd / (2.0 * C**2 * f**3) * ur * ur
        dur += (fd / f) * u0 * ur
    return u0, ur, du0, dur


def coordinate_time_rhs(params: SpacetimeParams, include_dtau_metric_terms=False):
    """Build ``rhs(tau, y)`` for the state [lambda, x, ln u0, dr/dtau].

    Obtained from :func:`geodesic_rhs` by dividing through by u0 and
    substituting ur = v u0.
    """
    R0 = params.R0
    full = include_dtau_metric_terms and params.k > 0
    c2 = C**2

    def rhs(tau, y):
        lam, x, w, v = y
        R, shrink, Rdot = _horizon(params, tau)
        r = R0 + x
        gap = x + shrink
        f = gap / r
        fp = R / (r * r)
        a = fp / f
        dw = -a * v
        dv = -c2 * f * fp / 2.0 + 1.5 * a * v * v
        if full and R > 0:
            fd = -Rdot / r
            extra = -fd / (2.0 * f) + fd / (2.0 * c2 * f**3) * v * v
            dw += extra
            dv += (fd / f) * v - v * extra
        return np.array([math.exp(-w), v, dw, dv])

    return rhs


def _error_scale(params: SpacetimeParams):
    R0 = params.R0

    def scale(tau, y0, y1, rtol, atol):
        R, shrink, _ = _horizon(params, tau)
        gap = max(min(y0[1], y1[1]) + shrink, 0.0)
        r = R0 + min(y0[1], y1[1])
        f = gap / r if r > 0 else 1.0
        return np.array(
            [
                atol + rtol * max(abs(y0[0]), abs(y1[0])),
                (atol / R0 + rtol) * gap if gap > 0 else atol,
                atol + rtol,
                atol * f + rtol * max(abs(y0[3]), abs(y1[3])),
            ]
        )

    return scale


# ----------------------------------------------------------------------------
# events


def event_functions(params: SpacetimeParams, cfg: IntegratorConfig):
    """Sign functions that are positive while integration should continue."""
    R0 = params.R0
    eps_r = cfg.epsilon_horizon * R0
    events = []
    if params.k > 0:

        def horizon(tau, y):
            return y[1] + _horizon(params, tau)[1] - eps_r

        events.append(dopri.Event(HORIZON_TOUCH, horizon))
        tau_evap = params.law.tau_evap
        # complete once the remaining fraction of R0^3 drops to event_tol; the
        # d f/d tau terms are singular at tau_evap itself
        events.append(dopri.Event(EVAPORATION_COMPLETE, lambda tau, y: (tau_evap - tau) / tau_evap - cfg.event_tol))
    r_min = cfg.r_min
    if r_min is None and params.k == 0:
        # static horizon is only reached asymptotically in tau: stop at the chart cutoff
        r_min = R0 * (1.0 + cfg.epsilon_horizon)
    if r_min is not None:
        x_min = r_min - R0
        events.append(dopri.Event(R_MIN_CUTOFF, lambda tau, y: y[1] - x_min))
    if math.isfinite(cfg.lambda_max):
        events.append(dopri.Event(LAMBDA_MAX, lambda tau, y: cfg.lambda_max - y[0]))
    return events


def detect_events(segment: dopri.DenseSegment, params: SpacetimeParams, cfg: IntegratorConfig):
    """Earliest terminal event inside one dense-output step, or None."""
    y0 = segment(segment.t0)
    y1 = segment(segment.t1)
    first = None
    for ev in event_functions(params, cfg):
        if ev.fn(segment.t0, y0) > 0 and ev.fn(segment.t1, y1) <= 0:
            hit = dopri.locate_event(ev.fn, segment, segment.t0, segment.t1, cfg.event_tol)
            if first is None or hit.t < first.t:
                first = dopri.EventHit(ev.name, hit.t, hit.y, hit.residual, hit.bracket)
    return first


def _termination(kind, tau, lam, residual, params, cfg):
    te = params.law.tau_evap
    coincides = None
    if kind == HORIZON_TOUCH:
        coincides = bool(abs(tau - te) <= max(cfg.event_tol, 1e-3 * te))
    return Termination(kind, float(tau), float(lam), float(residual), coincides, te)


# ----------------------------------------------------------------------------
# integration


def _columns(tau, Y, params: SpacetimeParams):
    tau = np.asarray(tau, dtype=float)
    lam, x, w, v = Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3]
    law = params.law
    R = np.asarray(radius_at(law, tau), dtype=float)
    shrink = np.asarray(radius_shrinkage(law, tau), dtype=float)
    r = params.R0 + x
    gap = x + shrink
    f = gap / r
    with np.errstate(over="ignore"):
        u0 = np.exp(w)
        ur = v * u0
        energy = np.exp(w + np.log(f))
    # normalisation residual relative to the magnitude of its two terms:
    # (f u0^2 - ur^2/f - 1) / (f u0^2 + ur^2/f), computed without forming u0^2
    a = f - v * v / (f * C**2)
    b = f + v * v / (f * C**2)
    norm_residual = (a - np.exp(-2.0 * w) / C**2) / b
    if params.k > 0:
        flux = np.where(tau < law.tau_evap, law.k / (3.0 * np.maximum(R, 1e-300) ** 2), np.inf)
    else:
        flux = np.zeros_like(tau)
    return dict(lam=lam, tau=tau, r=r, u0=u0, ur=ur, R_tau=R, f=f, energy=energy,
                norm_residual=norm_residual, flux_proxy=flux, gap=gap)


def integrate_radial(init: GeodesicState, params: SpacetimeParams, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate Alice's radial geodesic until the first terminal event.

    Samples are the accepted adaptive steps merged with ``cfg.sample_count``
    points uniform in tau over the integrated range.
    """
    if init.tau != 0.0 or init.lam != 0.0:
        raise HorizonLabError("initial state must start at tau = lambda = 0")
    if not init.r > params.R0:
        raise CoordinateSingularity("initial radius inside the horizon")
    y0 = [0.0, init.r - params.R0, math.log(init.u0), init.ur / init.u0]
    events = event_functions(params, cfg)
    sol = dopri.solve(
        coordinate_time_rhs(params, cfg.include_dtau_metric_terms),
        0.0,
        y0,
        cfg.tau_max,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        h_init=cfg.h_init,
        h_min=cfg.h_min,
        h_max=cfg.h_max,
        max_steps=cfg.max_steps,
        events=events,
        event_tol=cfg.event_tol,
        scale_fn=_error_scale(params),
    )
    tau = sol.t
    Y = sol.y
    if cfg.sample_count > 1 and sol.segments:
        grid = np.linspace(0.0, tau[-1], cfg.sample_count)
        inner = grid[(grid > 0.0) & (grid < tau[-1])]
        if inner.size:
            tau = np.concatenate([tau, inner])
            Y = np.concatenate([Y, sol.sol(inner)])
            order = np.argsort(tau, kind="stable")
            tau, Y = tau[order], Y[order]
            keep = np.concatenate([[True], np.diff(tau) > 0])
            tau, Y = tau[keep], Y[keep]

    cols = _columns(tau, Y, params)
    if sol.event is not None:
        term = _termination(sol.event.name, sol.event.t, sol.event.y[0], sol.event.residual, params, cfg)
    else:
        term = _termination(TAU_MAX, tau[-1], Y[-1, 0], 0.0, params, cfg)
    stats = dict(n_accepted=sol.n_accepted, n_rejected=sol.n_rejected, nfev=sol.nfev,
                 min_gap=float(np.min(cols["gap"])))
    return Trajectory(**cols, termination=term, stats=stats, solution=sol)


def state_at(traj: Trajectory, i: int) -> GeodesicState:
    return GeodesicState(float(traj.lam[i]), float(traj.tau[i]), float(traj.r[i]), float(traj.u0[i]), float(traj.ur[i]))


# ----------------------------------------------------------------------------
# eternal-case oracles


def cycloid_prefactor(r0, R):
    return math.sqrt(r0**3 / (4.0 * C**2 * R))


def cycloid_eta(r0, R, lam):
    """Invert lambda = A (eta + sin eta) on [0, pi] by vectorised bisection."""
    A = cycloid_prefactor(r0, R)
    lam = np.asarray(lam, dtype=float)
    lo = np.zeros_like(lam)
    hi = np.full_like(lam, math.pi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        below = A * (mid + np.sin(mid)) < lam
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    # lambda'(eta) vanishes at pi, so bisection only gets eta to ~1e-5 there;
    # the end of the fall is known exactly
    return np.where(lam >= A * math.pi * (1 - 4e-16), math.pi, 0.5 * (lo + hi))


def cycloid_tau(r0, R, eta):
    """Schwarzschild time along the from-rest cycloid (exterior part only)."""
    eta = np.asarray(eta, dtype=float)
    s = math.sqrt(r0 / R - 1.0)
    t = np.tan(eta / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        logterm = np.log(np.abs((s + t) / (s - t)))
    tau = R / C * logterm + (R / C) * s * (eta + (r0 / (2.0 * R)) * (eta + np.sin(eta)))
    return np.where(t < s, tau, np.nan)


def analytic_cycloid(r0, R, lambda_grid, k=0.0) -> Trajectory:
    """Closed-form from-rest fall in the eternal geometry, regular through r = R.

    r = (r0/2)(1 + cos eta),  lambda = sqrt(r0^3 / (4 c^2 R)) (eta + sin eta).
    Inside the horizon ``tau``, ``u0`` and ``energy`` are NaN (chart breaks).
    """
    if k != 0:
        raise HorizonLabError("the cycloid solution only applies to the eternal hole")
    if not r0 > R:
        raise CoordinateSingularity("r0 must lie outside the horizon")
    lam = np.asarray(lambda_grid, dtype=float)
    A = cycloid_prefactor(r0, R)
    if np.any(lam < 0) or np.any(lam > A * math.pi * (1 + 1e-15)):
        raise HorizonLabError("lambda outside [0, total fall time]")
    eta = cycloid_eta(r0, R, lam)
    r = 0.5 * r0 * (1.0 + np.cos(eta))
    E = math.sqrt(1.0 - R / r0)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (r - R) / r
        ur = -C * np.sqrt(np.maximum(R * (1.0 / r - 1.0 / r0), 0.0))
        outside = r > R
        u0 = np.where(outside, E / f, np.nan)
    tau = cycloid_tau(r0, R, eta)
    n = lam.size
    return Trajectory(lam=lam, tau=tau, r=r, u0=u0, ur=ur, R_tau=np.full(n, float(R)), f=f,
                      energy=np.where(outside, E, np.nan), norm_residual=np.zeros(n),
                      flux_proxy=np.zeros(n), gap=r - R,
                      termination=Termination("analytic", float(np.nanmax(tau)) if n else 0.0,
                                              float(lam[-1]) if n else 0.0))


def cycloid_fall_time(r0, R):
    """Proper time from rest at r0 to r = 0: (pi/2) sqrt(r0^3 / (R c^2))."""
    return 0.5 * math.pi * math.sqrt(r0**3 / (R * C**2))


def cycloid_lambda_at_radius(r0, R, r):
    """Proper time to fall from rest at r0 to radius ``r``."""
    eta = np.arccos(2.0 * np.asarray(r, dtype=float) / r0 - 1.0)
    return cycloid_prefactor(r0, R) * (eta + np.sin(eta))


def coordinate_time_profile(traj: Trajectory, R=None, tail=(1e-5, 1e-3)):
    """Fit tau against ln(dr/R) over the near-horizon tail.

    Returns ``(log_delta_r, tau, slope)``; the slope tends to -R/c.
    """
    R = float(traj.R_tau[0]) if R is None else R
    rel = traj.gap / R
    if not np.min(rel) <= tail[0]:
        raise HorizonLabError(f"trajectory does not reach dr/R <= {tail[0]:g}")
    mask = (rel >= tail[0]) & (rel <= tail[1])
    if mask.sum() < 3:
        raise HorizonLabError("too few samples in the tail window")
    log_dr = np.log(rel[mask])
    tau = traj.tau[mask]
    slope, _ = np.polyfit(log_dr, tau, 1)
    return log_dr, tau, float(slope)
