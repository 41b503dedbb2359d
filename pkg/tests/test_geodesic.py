import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from horizonlab.errors import CoordinateSingularity, HorizonLabError, MaxStepsExceeded
from horizonlab.geodesic import (
    EVAPORATION_COMPLETE,
    HORIZON_TOUCH,
    LAMBDA_MAX,
    R_MIN_CUTOFF,
    TAU_MAX,
    GeodesicState,
    IntegratorConfig,
    Trajectory,
    analytic_cycloid,
    coordinate_time_profile,
    coordinate_time_rhs,
    cycloid_fall_time,
    cycloid_lambda_at_radius,
    cycloid_prefactor,
    detect_events,
    geodesic_rhs,
    initial_state_at_rest,
    integrate_radial,
)
from horizonlab.schwarzschild import SpacetimeParams

ETERNAL = SpacetimeParams(1.0)
EVAP = SpacetimeParams(1.0, 0.01)  # tau_evap = 100


@pytest.fixture(scope="module")
def eternal_run():
    return integrate_radial(initial_state_at_rest(2.0, ETERNAL), ETERNAL, IntegratorConfig(sample_count=201))


@pytest.fixture(scope="module")
def evaporating_run():
    return integrate_radial(initial_state_at_rest(3.0, EVAP), EVAP, IntegratorConfig(sample_count=201))


# ----------------------------------------------------------------------------
# initial data and right-hand sides


def test_initial_state_examples():
    s = initial_state_at_rest(2.0, ETERNAL)
    assert s.u0 == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert (s.lam, s.tau, s.r, s.ur) == (0.0, 0.0, 2.0, 0.0)
    assert abs(initial_state_at_rest(1e6, ETERNAL).u0 - 1.0) < 1e-6
    with pytest.raises(CoordinateSingularity):
        initial_state_at_rest(1.0, ETERNAL)


def test_initial_state_with_velocity_is_normalised():
    s = initial_state_at_rest(4.0, ETERNAL, ur0=-0.3)
    f = 0.75
    assert f * s.u0**2 - s.ur**2 / f == pytest.approx(1.0, rel=1e-15)


def test_rhs_at_rest_is_newtonian_pull():
    for r0 in (1.5, 2.0, 7.0):
        s = initial_state_at_rest(r0, ETERNAL)
        dtau, dr, du0, dur = geodesic_rhs(s, ETERNAL)
        assert (dtau, dr, du0) == (s.u0, 0.0, 0.0)
        assert dur == pytest.approx(-1.0 / (2 * r0**2), rel=1e-14)


def test_rhs_far_away_is_inertial():
    s = GeodesicState(0.0, 0.0, 1e9, 1.0, 0.1)
    _, _, du0, dur = geodesic_rhs(s, ETERNAL)
    assert abs(du0) < 1e-18 and abs(dur) < 1e-18


def test_rhs_static_limit_is_bitwise_identical():
    s = GeodesicState(0.0, 0.0, 2.5, 1.4, -0.2)
    assert geodesic_rhs(s, SpacetimeParams(1.0, 0.0)) == geodesic_rhs(s, SpacetimeParams(1.0, 0.3))


def test_rhs_inside_horizon_raises():
    with pytest.raises(CoordinateSingularity):
        geodesic_rhs(GeodesicState(0.0, 0.0, 0.9, 1.0, -0.1), ETERNAL)


@settings(max_examples=200)
@given(
    st.floats(1e-6, 5.0),  # r - R(tau)
    st.floats(0.0, 0.99),  # fraction of tau_evap
    st.floats(-0.999, 0.5),  # v / f, coordinate speed in units of light speed
    st.booleans(),
    st.booleans(),
)
def test_coordinate_time_rhs_is_chain_rule_of_geodesic_rhs(gap, frac, beta, evaporating, full):
    params = SpacetimeParams(1.0, 0.01 if evaporating else 0.0)
    tau = frac * 100.0 if evaporating else 3.0
    R, shrink, _ = params.law.scalar_state(tau)
    r = R + gap
    f = gap / r
    v = beta * f
    u0 = 1.0 / math.sqrt(f - v * v / f)
    state = GeodesicState(0.7, tau, r, u0, v * u0)
    dtau, dr, du0, dur = geodesic_rhs(state, params, full)
    y = np.array([0.7, r - 1.0, math.log(u0), v])
    got = coordinate_time_rhs(params, full)(tau, y)
    want = np.array([1.0 / dtau, dr / dtau, du0 / (u0 * dtau), (dur * u0 - state.ur * du0) / u0**3])
    scale = np.array([1.0, f, abs(want[2]) + 1e-300, abs(want[3]) + f])
    # r - R and x + shrink differ by one rounding (relative eps/f in f); the
    # d f/d tau terms carry a factor (v^2/f^2 - 1) that amplifies it
    rtol = 1e-9 + 1e-13 / (f * (1.0 - beta * beta))
    assert np.all(np.abs(got - want) <= rtol * scale)


# ----------------------------------------------------------------------------
# analytic oracle


def test_cycloid_examples():
    lam_end = cycloid_fall_time(2.0, 1.0)
    # (pi/2) sqrt(8)
    assert lam_end == pytest.approx(4.442882938158366247, rel=1e-15)
    A = cycloid_prefactor(2.0, 1.0)
    tr = analytic_cycloid(2.0, 1.0, [0.0, A * (math.pi / 2 + 1.0), lam_end])
    assert tr.r[0] == 2.0
    assert tr.r[1] == pytest.approx(1.0, rel=1e-14)
    assert tr.r[2] == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(HorizonLabError):
        analytic_cycloid(2.0, 1.0, [0.0, 1.0], k=1e-3)
    with pytest.raises(CoordinateSingularity):
        analytic_cycloid(0.5, 1.0, [0.0])


def test_cycloid_fall_time_against_quadrature():
    for r0, R in [(2.0, 1.0), (5.0, 1.0), (3.0, 2.0)]:
        # (dr/dlambda)^2 = R (1/r - 1/r0): integrate dlambda = dr / |dr/dlambda|
        # with r = r0 - s^2, which makes the integrand regular at r0
        g = lambda s: 2 * s / math.sqrt(R * (1.0 / (r0 - s * s) - 1.0 / r0)) if s > 0 else 2 * r0 / math.sqrt(R)
        lam, _ = quad(g, 0.0, math.sqrt(r0), epsabs=0, epsrel=1e-12, limit=200)
        assert cycloid_fall_time(r0, R) == pytest.approx(lam, rel=1e-10)


def test_cycloid_satisfies_radial_equation():
    r0, R = 4.0, 1.0
    lam = np.linspace(0.0, cycloid_fall_time(r0, R), 400)[1:-1]
    tr = analytic_cycloid(r0, R, lam)
    assert np.allclose(tr.ur**2, R * (1 / tr.r - 1 / r0), rtol=1e-12, atol=1e-15)
    out = tr.r > R
    f = tr.f[out]
    assert np.allclose(f * tr.u0[out] ** 2 - tr.ur[out] ** 2 / f, 1.0, rtol=1e-9)
    assert np.all(np.isnan(tr.tau[~out]))
    assert np.all(np.diff(tr.r) < 0)


def test_cycloid_tau_against_quadrature():
    r0, R = 2.0, 1.0
    E = math.sqrt(1 - R / r0)
    for r in (1.8, 1.3, 1.01):
        lam = cycloid_lambda_at_radius(r0, R, r)
        tr = analytic_cycloid(r0, R, [lam])
        # dtau/dr = (E/f) / |dr/dlambda|; substitute r = r0 - s^2 to remove the endpoint singularity
        g = lambda s: 2 * s * (E / (1 - R / (r0 - s * s))) / math.sqrt(R * (1 / (r0 - s * s) - 1 / r0))
        ref, _ = quad(g, 0.0, math.sqrt(r0 - r), epsabs=0, epsrel=1e-12)
        assert tr.tau[0] == pytest.approx(ref, rel=1e-9)


# ----------------------------------------------------------------------------
# eternal integration


def test_eternal_matches_cycloid(eternal_run):
    tr = eternal_run
    ref = analytic_cycloid(2.0, 1.0, tr.lam)
    assert np.max(np.abs(tr.r - ref.r) / ref.r) <= 1e-8
    assert tr.gap.min() <= 1.0000001e-6


def test_eternal_matches_scipy_in_proper_time():
    # independent integrator on the lambda-form equations, stopped at r = 1.05
    def rhs(lam, y):
        return geodesic_rhs(GeodesicState(lam, y[0], y[1], y[2], y[3]), ETERNAL)

    s = initial_state_at_rest(2.0, ETERNAL)
    stop = lambda lam, y: y[1] - 1.05
    stop.terminal = True
    ref = solve_ivp(rhs, (0, 10), [0.0, 2.0, s.u0, 0.0], method="DOP853", rtol=1e-12, atol=1e-14, events=stop)
    lam_stop, tau_stop = ref.t_events[0][0], ref.y_events[0][0][0]
    tr = integrate_radial(s, ETERNAL, IntegratorConfig(r_min=1.05))
    assert tr.termination.kind == R_MIN_CUTOFF
    assert tr.termination.lam == pytest.approx(lam_stop, rel=1e-9)
    assert tr.termination.tau == pytest.approx(tau_stop, rel=1e-9)


def test_eternal_conservation(eternal_run):
    tr = eternal_run
    E0 = tr.energy[0]
    assert np.max(np.abs(tr.energy / E0 - 1)) < 1e-9
    assert np.max(np.abs(tr.norm_residual)) < 1e-9


def test_eternal_monotone_and_blueshifted(eternal_run):
    tr = eternal_run
    assert np.all(np.diff(tr.r) < 0)
    assert np.all(np.diff(tr.tau) > 0)
    assert np.all(np.diff(tr.lam) > 0)
    assert tr.u0[-1] > 1e3
    assert np.all(tr.gap > 0)
    assert np.all(tr.flux_proxy == 0.0)


def test_eternal_never_touches(eternal_run):
    term = eternal_run.termination
    assert term.kind == R_MIN_CUTOFF
    assert term.coincides_with_evaporation is None
    assert math.isinf(term.tau_evap)
    assert 0 <= term.residual < 1e-12


def test_sample_grid_is_merged(eternal_run):
    tr = eternal_run
    grid = np.linspace(0.0, tr.tau[-1], 201)[1:-1]
    assert np.all(np.isin(grid, tr.tau))
    assert len(tr) == tr.stats["n_accepted"] + 1 + 199
    assert len(tr.rows()) == len(tr) and len(tr.rows()[0]) == len(Trajectory.COLUMNS)


def test_tau_profile_slope_scales_with_R():
    for R in (1.0, 2.0):
        p = SpacetimeParams(R)
        tr = integrate_radial(initial_state_at_rest(2.0 * R, p), p)
        _, _, slope = coordinate_time_profile(tr)
        assert slope == pytest.approx(-R, rel=1e-2)


def test_tau_profile_requires_tail():
    tr = integrate_radial(initial_state_at_rest(2.0, ETERNAL), ETERNAL, IntegratorConfig(lambda_max=2.0))
    assert tr.termination.kind == LAMBDA_MAX
    with pytest.raises(HorizonLabError):
        coordinate_time_profile(tr)


def test_budget_terminations():
    s = initial_state_at_rest(2.0, ETERNAL)
    tr = integrate_radial(s, ETERNAL, IntegratorConfig(lambda_max=1.5))
    assert tr.termination.kind == LAMBDA_MAX
    assert tr.termination.lam == pytest.approx(1.5, abs=1e-11)
    tr = integrate_radial(s, ETERNAL, IntegratorConfig(tau_max=2.0))
    assert tr.termination.kind == TAU_MAX and tr.tau[-1] == 2.0
    with pytest.raises(MaxStepsExceeded):
        integrate_radial(s, ETERNAL, IntegratorConfig(max_steps=10))


def test_detect_events_on_segments(eternal_run):
    cfg = IntegratorConfig()
    segs = eternal_run.solution.segments
    assert detect_events(segs[0], ETERNAL, cfg) is None
    hit = detect_events(segs[-1], ETERNAL, cfg)
    assert hit.name == R_MIN_CUTOFF
    assert hit.t == eternal_run.termination.tau
    assert 0 <= hit.residual < cfg.event_tol


def test_deterministic():
    s = initial_state_at_rest(3.0, EVAP)
    cfg = IntegratorConfig(sample_count=50, epsilon_horizon=1e-4)
    a = integrate_radial(s, EVAP, cfg)
    b = integrate_radial(s, EVAP, cfg)
    assert a.rows() == b.rows()
    assert a.termination == b.termination


def test_invalid_inputs():
    with pytest.raises(HorizonLabError):
        integrate_radial(GeodesicState(0.0, 1.0, 2.0, 1.5, 0.0), ETERNAL)
    for kw in (dict(epsilon_horizon=1e-2), dict(epsilon_horizon=0.0), dict(event_tol=1e-10), dict(rel_tol=0.0)):
        with pytest.raises(HorizonLabError):
            IntegratorConfig(**kw)


# ----------------------------------------------------------------------------
# evaporating integration


def test_evaporating_stays_outside(evaporating_run):
    tr = evaporating_run
    assert np.min(tr.r - tr.R_tau) >= -1e-12
    assert np.all(tr.gap > 0)
    # a signal-speed bound keeps Alice at least k / (3 R0) from the shrinking horizon
    assert tr.stats["min_gap"] >= EVAP.k / 3.0


def test_evaporating_outlives_the_hole(evaporating_run):
    term = evaporating_run.termination
    assert term.kind == EVAPORATION_COMPLETE
    assert term.tau == pytest.approx(100.0, rel=1e-9)
    assert term.tau_evap == pytest.approx(100.0, rel=1e-15)


def test_evaporating_monotone_columns(evaporating_run):
    tr = evaporating_run
    assert np.all(np.diff(tr.r) < 0)
    assert np.all(np.diff(tr.tau) > 0)
    assert np.all(np.diff(tr.flux_proxy) > 0)
    assert tr.flux_proxy[-1] / tr.flux_proxy[0] > 1e3
    # Alice's clock saturates while Rob's runs on to tau_evap
    assert np.all(np.diff(tr.lam) >= 0)
    assert tr.lam[-1] < 8.0


def test_evaporating_subluminal(evaporating_run):
    tr = evaporating_run
    v = tr.ur / tr.u0
    assert np.all(np.abs(v) < tr.f)


def test_dtau_metric_terms_restore_normalisation():
    s = initial_state_at_rest(3.0, EVAP)
    tr = integrate_radial(s, EVAP, IntegratorConfig(include_dtau_metric_terms=True))
    assert tr.termination.kind == EVAPORATION_COMPLETE
    assert np.max(np.abs(tr.norm_residual)) < 1e-6
    quasi = integrate_radial(s, EVAP, IntegratorConfig())
    # the quasi-static model drifts off the mass shell; that is what the flag measures
    assert np.max(np.abs(quasi.norm_residual)) > 0.1


@pytest.mark.parametrize("eps", [1e-4, 1e-5])
def test_horizon_touch_for_slow_evaporation(eps):
    p = SpacetimeParams(1.0, 1e-7)
    cfg = IntegratorConfig(epsilon_horizon=eps)
    tr = integrate_radial(initial_state_at_rest(3.0, p), p, cfg)
    term = tr.termination
    assert term.kind == HORIZON_TOUCH
    assert term.coincides_with_evaporation is False
    assert 0 <= term.residual < cfg.event_tol
    assert tr.gap[-1] == pytest.approx(eps, rel=1e-6)


def test_evaporating_r_min_cutoff():
    tr = integrate_radial(initial_state_at_rest(3.0, EVAP), EVAP, IntegratorConfig(r_min=1.5))
    assert tr.termination.kind == R_MIN_CUTOFF
    assert tr.r[-1] == pytest.approx(1.5, abs=1e-11)
