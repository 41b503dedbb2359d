"""Radial free fall towards event horizons: Rindler, eternal and evaporating Schwarzschild."""
from .errors import (
    ConfigError,
    CoordinateSingularity,
    DegenerateHorizon,
    EternalBlackHole,
    HorizonLabError,
    MaxStepsExceeded,
    NumericalFailure,
    OutsideWedge,
    StepUnderflow,
)
from .evaporation import EvaporationLaw, calibrate_k, evaporation_time, flux_proxy, radius_at
from .foundation import MinkowskiEvent, causal_reachable, convert_units, interval_minkowski
from .geodesic import (
    GeodesicState,
    IntegratorConfig,
    Trajectory,
    analytic_cycloid,
    coordinate_time_profile,
    geodesic_rhs,
    initial_state_at_rest,
    integrate_radial,
)
from .rindler import RindlerEvent, RindlerFrame, minkowski_to_rindler, rindler_to_minkowski
from .schwarzschild import SpacetimeParams, effective_acceleration, metric_components

__version__ = "0.1.0"
