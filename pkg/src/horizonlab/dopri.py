"""Dormand-Prince 5(4) integrator with PI step control, dense output and
terminal events located by bisection.

Deliberately small: fixed tableau, explicit loop, no vectorised systems.
Everything is deterministic; the same inputs always produce the same steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import MaxStepsExceeded, StepUnderflow

# Dormand & Prince (1980) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th minus 4th order weights
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
# 4th-order continuous extension (Hairer, Norsett & Wanner, DOPRI5 "contd5")
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

ORDER = 5
SAFETY = 0.9
# per-step change of h is bounded to [FAC_MIN, FAC_MAX] * h
FAC_MIN = 0.2
FAC_MAX = 10.0
BETA = 0.04  # PI stabilisation exponent
ALPHA = 1 / ORDER - 0.75 * BETA


@dataclass
class DenseSegment:
    """Interpolant over one accepted step [t0, t0 + h]."""

    t0: float
    h: float
    coeffs: np.ndarray  # shape (5, n)

    @property
    def t1(self) -> float:
        return self.t0 + self.h

    def __call__(self, t: float) -> np.ndarray:
        theta = (t - self.t0) / self.h
        th1 = 1.0 - theta
        c = self.coeffs
        return c[0] + theta * (c[1] + th1 * (c[2] + theta * (c[3] + th1 * c[4])))


@dataclass(frozen=True)
class Event:
    """Terminal event: fires when ``fn(t, y)`` goes from positive to <= 0."""

    name: str
    fn: Callable[[float, np.ndarray], float]


@dataclass(frozen=True)
class EventHit:
    name: str
    t: float
    y: np.ndarray
    residual: float
    bracket: tuple


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), n)
    segments: list
    event: Optional[EventHit]
    status: str  # "event" or "t_end"
    nfev: int = 0
    n_accepted: int = 0
    n_rejected: int = 0
    _starts: np.ndarray = field(default=None, repr=False)

    def sol(self, t):
        """Dense output at ``t`` (scalar or 1-D array) inside the integrated range."""
        if self._starts is None:
            self._starts = np.array([s.t0 for s in self.segments])
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self._starts, ts, side="right") - 1, 0, len(self.segments) - 1)
        out = np.array([self.segments[i](tt) for i, tt in zip(idx, ts)])
        return out if np.ndim(t) else out[0]


def locate_event(fn, seg: DenseSegment, t_lo, t_hi, tol, max_iter=200) -> EventHit:
    """Bisect ``fn`` on the dense segment between a positive and a non-positive value.

    Returns the last positive-side point once the bracket is narrower than
    ``tol`` and the residual there is below ``tol`` (or the bracket cannot
    be split further in floating point).
    """
    lo, hi = t_lo, t_hi
    y_lo = seg(lo)
    g_lo = fn(lo, y_lo)
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo)) and abs(g_lo) < tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        y_mid = seg(mid)
        g_mid = fn(mid, y_mid)
        if g_mid > 0:
            lo, y_lo, g_lo = mid, y_mid, g_mid
        else:
            hi = mid
    return EventHit(name="", t=lo, y=y_lo, residual=g_lo, bracket=(lo, hi))


def _default_scale(t, y0, y1, rtol, atol):
    return atol + rtol * np.maximum(np.abs(y0), np.abs(y1))


def initial_step(fun, t0, y0, f0, rtol, atol, scale_fn):
    """Starting step from Hairer, Norsett & Wanner (II.4)."""
    sc = scale_fn(t0, y0, y0, rtol, atol)
    d0 = np.sqrt(np.mean((y0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1)


def solve(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_end: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    h_init: Optional[float] = None,
    h_min: float = 0.0,
    h_max: float = math.inf,
    max_steps: int = 1_000_000,
    events: Sequence[Event] = (),
    event_tol: float = 1e-12,
    scale_fn=None,
) -> Solution:
    """Integrate ``y' = fun(t, y)`` forward from ``t0`` until ``t_end`` or a terminal event.

    ``scale_fn(t, y_old, y_new, rtol, atol)`` returns the per-component
    error scale; the step is accepted when the RMS of ``err / scale`` is
    at most one.  Default is ``atol + rtol * max(|y_old|, |y_new|)``.
    """
    scale_fn = scale_fn or _default_scale
    t = float(t0)
    y = np.array(y0, dtype=float)
    k1 = fun(t, y)
    nfev = 1
    if h_init is None:
        h = initial_step(fun, t, y, k1, rtol, atol, scale_fn)
        nfev += 1
    else:
        h = h_init
    h = min(h, h_max)

    g_prev = [ev.fn(t, y) for ev in events]
    ts, ys, segments = [t], [y.copy()], []
    err_old = 1e-4
    last_rejected = False
    n_acc = n_rej = 0

    while t < t_end:
        if n_acc + n_rej >= max_steps:
            raise MaxStepsExceeded(f"exceeded {max_steps} steps at t={t!r}")
        if h < h_min or h <= 4 * np.spacing(abs(t)):
            raise StepUnderflow(f"step size {h!r} underflowed at t={t!r}")
        if t + h > t_end:
            h = t_end - t

        k2 = fun(t + C2 * h, y + h * A21 * k1)
        k3 = fun(t + C3 * h, y + h * (A31 * k1 + A32 * k2))
        k4 = fun(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = fun(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = fun(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        t_new = t + h
        k7 = fun(t_new, y_new)
        nfev += 6

        err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = scale_fn(t_new, y, y_new, rtol, atol)
        err = math.sqrt(float(np.mean((err_vec / sc) ** 2)))
        if not math.isfinite(err):
            h *= FAC_MIN
            n_rej += 1
            last_rejected = True
            continue

        fac11 = err**ALPHA
        if err <= 1.0:
            fac = fac11 / err_old**BETA
            fac = min(1.0 / FAC_MIN, max(1.0 / FAC_MAX, fac / SAFETY))
            h_next = h / fac
            if last_rejected:
                h_next = min(h_next, h)
            err_old = max(err, 1e-4)
            last_rejected = False
            n_acc += 1

            ydiff = y_new - y
            bspl = h * k1 - ydiff
            coeffs = np.array(
                [
                    y,
                    ydiff,
                    bspl,
                    ydiff - h * k7 - bspl,
                    h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
                ]
            )
            seg = DenseSegment(t, h, coeffs)
            segments.append(seg)

            g_new = [ev.fn(t_new, y_new) for ev in events]
            first = None
            for ev, ga, gb in zip(events, g_prev, g_new):
                if ga > 0 and gb <= 0:
                    hit = locate_event(ev.fn, seg, t, t_new, event_tol)
                    if first is None or hit.t < first.t:
                        first = EventHit(ev.name, hit.t, hit.y, hit.residual, hit.bracket)
            if first is not None:
                ts.append(first.t)
                ys.append(first.y)
                return Solution(np.array(ts), np.array(ys), segments, first, "event", nfev, n_acc, n_rej)

            t, y, k1 = t_new, y_new, k7
            g_prev = g_new
            ts.append(t)
            ys.append(y.copy())
            h = min(h_next, h_max)
        else:
            h = h / min(1.0 / FAC_MIN, fac11 / SAFETY)
            last_rejected = True
            n_rej += 1

    return Solution(np.array(ts), np.array(ys), segments, None, "t_end", nfev, n_acc, n_rej)
