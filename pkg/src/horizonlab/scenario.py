"""Scenario configuration, orchestration and table emission.

Configuration is one JSON object; command-line flags override file values.
All values are in the unit system named by ``units``; conversion to the
internal geometric units happens here and nowhere else.
"""
from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import geodesic, rindler
from .errors import ConfigError, HorizonLabError
from .evaporation import calibrate_k
from .foundation import MinkowskiEvent, causal_reachable, convert_units
from .schwarzschild import SpacetimeParams

MODES = ("fig1", "infall", "transform")
SUBMODES = ("eternal", "evaporating")
FORMATS = ("csv", "json")
UNIT_SYSTEMS = ("geometric", "si")
DIRECTIONS = ("to-rindler", "to-minkowski")

INFALL_COLUMNS = geodesic.Trajectory.COLUMNS
FIG1_COLUMNS = ("series", "ct", "x")
INFALL_META_KEYS = (
    "mode", "submode", "units", "R0", "k", "tau_evap", "r0", "ur0", "epsilon_horizon", "rel_tol",
    "abs_tol", "event_tol", "include_dtau_metric_terms", "termination", "event_tau", "event_lambda",
    "event_residual", "coincides_with_evaporation", "min_horizon_gap", "n_accepted", "n_rejected",
)
FIG1_META_KEYS = (
    "mode", "units", "a", "rob_distance", "tau_range", "tau_simultaneity", "simultaneity_slope",
    "tau_signal", "signal_end_beyond_horizon", "reply_reaches_rob", "alice_crossing_proper_time",
)


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    submode: Optional[str] = None
    a: float = 1.0
    tau_range: tuple = (-3.0, 3.0)
    tau_simultaneity: float = 1.0
    tau_signal: float = 1.0
    direction: str = "to-rindler"
    R0: float = 1.0
    k: Optional[float] = None
    tau_evap: Optional[float] = None
    r0: Optional[float] = None
    ur0: float = 0.0
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
    include_dtau_metric_terms: bool = False
    samples: int = 601
    output_path: Optional[str] = None
    format: str = "csv"
    units: str = "geometric"


_FIELDS = {f.name for f in fields(ScenarioConfig)}
_ALIASES = {"sample_count": "samples", "out": "output_path", "tau-evap": "tau_evap", "unit_system": "units"}


def _number(name, value, *, positive=False, nonneg=False, allow_inf=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    value = float(value)
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ConfigError(name, "must be finite")
    if positive and not value > 0:
        raise ConfigError(name, "must be positive")
    if nonneg and value < 0:
        raise ConfigError(name, "must be non-negative")
    return value


def _choice(name, value, options):
    if value not in options:
        raise ConfigError(name, f"must be one of {', '.join(options)}; got {value!r}")
    return value


def validate(raw: dict) -> ScenarioConfig:
    """Check a raw mapping, fill defaults and resolve k from tau_evap."""
    data = {}
    for key, value in raw.items():
        key = _ALIASES.get(key, key)
        if key not in _FIELDS:
            raise ConfigError(key, "unknown configuration key")
        data[key] = value
    if "mode" not in data:
        raise ConfigError("mode", "missing")
    _choice("mode", data["mode"], MODES)
    cfg = ScenarioConfig(**{k: v for k, v in data.items()})

    _choice("format", cfg.format, FORMATS)
    _choice("units", cfg.units, UNIT_SYSTEMS)
    _choice("direction", cfg.direction, DIRECTIONS)
    if cfg.submode is not None:
        _choice("submode", cfg.submode, SUBMODES)
    upd = {}
    upd["a"] = _number("a", cfg.a, positive=True)
    tr = cfg.tau_range
    if not (isinstance(tr, (list, tuple)) and len(tr) == 2):
        raise ConfigError("tau_range", "expected [tau_min, tau_max]")
    lo, hi = (_number("tau_range", v) for v in tr)
    if not lo < hi:
        raise ConfigError("tau_range", "tau_min must be below tau_max")
    upd["tau_range"] = (lo, hi)
    upd["tau_simultaneity"] = _number("tau_simultaneity", cfg.tau_simultaneity)
    upd["tau_signal"] = _number("tau_signal", cfg.tau_signal)
    upd["R0"] = _number("R0", cfg.R0, positive=True)
    upd["ur0"] = _number("ur0", cfg.ur0)
    for name in ("rel_tol", "abs_tol", "event_tol", "epsilon_horizon"):
        upd[name] = _number(name, getattr(cfg, name), positive=True)
    for name in ("lambda_max", "tau_max", "h_max"):
        upd[name] = _number(name, getattr(cfg, name), positive=True, allow_inf=True)
    upd["h_min"] = _number("h_min", cfg.h_min, nonneg=True)
    if cfg.h_init is not None:
        upd["h_init"] = _number("h_init", cfg.h_init, positive=True)
    if cfg.r_min is not None:
        upd["r_min"] = _number("r_min", cfg.r_min, positive=True)
    for name in ("samples", "max_steps"):
        v = getattr(cfg, name)
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ConfigError(name, "expected a non-negative integer")
    if cfg.mode == "fig1" and cfg.samples < 2:
        raise ConfigError("samples", "fig1 needs at least 2 samples per series")
    if not isinstance(cfg.include_dtau_metric_terms, bool):
        raise ConfigError("include_dtau_metric_terms", "expected true or false")

    if cfg.k is not None and cfg.tau_evap is not None:
        raise ConfigError("k", "k and tau_evap are mutually exclusive")
    k = 0.0
    if cfg.k is not None:
        k = _number("k", cfg.k, nonneg=True)
    if cfg.tau_evap is not None:
        k = calibrate_k(upd["R0"], _number("tau_evap", cfg.tau_evap, positive=True))
    submode = cfg.submode
    if submode is None:
        submode = "evaporating" if k > 0 else "eternal"
    if submode == "evaporating" and k <= 0:
        raise ConfigError("k", "evaporating scenario needs k > 0 or tau_evap > 0")
    if submode == "eternal" and k > 0:
        raise ConfigError("k", "eternal scenario requires k = 0")
    upd["k"] = k
    upd["submode"] = submode
    r0 = 3.0 * upd["R0"] if cfg.r0 is None else _number("r0", cfg.r0, positive=True)
    if cfg.mode == "infall" and not r0 > upd["R0"]:
        raise ConfigError("r0", "must lie outside the horizon (r0 > R0)")
    upd["r0"] = r0
    cfg = replace(cfg, **upd)
    try:
        integrator_config(cfg)
    except HorizonLabError as exc:
        raise ConfigError("integrator", str(exc)) from None
    return cfg


def load_scenario(path=None, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Read a JSON scenario file (optional), apply ``overrides`` and validate."""
    raw = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"JSON parse error: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[_ALIASES.get(key, key)] = value
    if raw.get("k") is not None and raw.get("tau_evap") is not None and overrides:
        # a flag overrides the other form given in the file
        if overrides.get("k") is not None and overrides.get("tau_evap") is None:
            raw.pop("tau_evap")
        elif overrides.get("tau_evap") is not None and overrides.get("k") is None:
            raw.pop("k")
    return validate(raw)


# ----------------------------------------------------------------------------
# unit handling


def _to_geo(cfg, value, dim):
    if cfg.units == "geometric" or value is None:
        return value
    return convert_units(value, dim, "to_geometric")


def _from_geo(cfg, value, dim):
    if cfg.units == "geometric":
        return value
    return convert_units(value, dim, "to_si")


def integrator_config(cfg: ScenarioConfig) -> geodesic.IntegratorConfig:
    t = lambda v: _to_geo(cfg, v, "time")  # noqa: E731
    return geodesic.IntegratorConfig(
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, h_init=t(cfg.h_init), h_min=t(cfg.h_min),
        h_max=t(cfg.h_max), epsilon_horizon=cfg.epsilon_horizon, event_tol=cfg.event_tol,
        max_steps=cfg.max_steps, lambda_max=t(cfg.lambda_max), tau_max=t(cfg.tau_max),
        r_min=cfg.r_min, sample_count=cfg.samples,
        include_dtau_metric_terms=cfg.include_dtau_metric_terms,
    )


def spacetime_params(cfg: ScenarioConfig) -> SpacetimeParams:
    # k is length^3 / time
    k = cfg.k if cfg.units == "geometric" else cfg.k / convert_units(1.0, "time", "to_geometric")
    return SpacetimeParams(cfg.R0, k)


# ----------------------------------------------------------------------------
# tables


@dataclass
class OutputTable:
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise HorizonLabError(f"row {i} has {len(row)} fields, expected {n}")

    def column(self, name):
        j = self.columns.index(name)
        return [row[j] for row in self.rows]


def format_number(v) -> str:
    """17 significant digits: exact round trip for binary64."""
    return format(float(v), ".17g")


def _csv_field(v):
    if isinstance(v, str):
        return v
    return format_number(v)


def _json_value(v):
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_number(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def render_table(table: OutputTable, fmt: str = "csv") -> str:
    if fmt == "csv":
        lines = [",".join(table.columns)]
        lines += [",".join(_csv_field(v) for v in row) for row in table.rows]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        rows = ",\n    ".join(_json_value(list(row)) for row in table.rows)
        return (
            "{\n"
            f'  "columns": {_json_value(list(table.columns))},\n'
            f'  "rows": [{chr(10) + "    " + rows + chr(10) + "  " if rows else ""}],\n'
            f'  "meta": {_json_value(table.meta)}\n'
            "}\n"
        )
    raise HorizonLabError(f"unknown format {fmt!r}")


def emit_table(table: OutputTable, path=None, fmt: str = "csv"):
    """Write ``table`` to ``path`` (stdout when None).

    CSV output carries only header and rows; when writing to a file the
    metadata record goes to a ``<path>.meta.json`` sidecar.
    """
    text = render_table(table, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    if fmt == "csv":
        with open(path.with_name(path.name + ".meta.json"), "w", newline="\n") as fh:
            fh.write(_json_value(table.meta) + "\n")


# ----------------------------------------------------------------------------
# scenarios


def run_fig1(cfg: ScenarioConfig) -> OutputTable:
    """Worldlines, horizon, simultaneity plane and a one-way signal for a Rindler frame."""
    a = _to_geo(cfg, cfg.a, "acceleration")
    frame = rindler.RindlerFrame(a)
    d = frame.rob_distance
    t_lo, t_hi = (_to_geo(cfg, v, "time") for v in cfg.tau_range)
    n = cfg.samples

    taus = np.linspace(t_lo, t_hi, n)
    rob_ct, rob_x = rindler.to_minkowski_coords(taus, np.full(n, d), a)
    ct_top = float(np.max(rob_ct))
    x_top = float(np.max(rob_x))
    rows = [("rob", ct, x) for ct, x in zip(rob_ct, rob_x)]
    rows += [("alice", ct, d) for ct in np.linspace(0.0, max(ct_top, 0.0), n)]
    rows += [("horizon", s, s) for s in np.linspace(0.0, x_top, n)]

    tau_sim = _to_geo(cfg, cfg.tau_simultaneity, "time")
    slope = float(rindler.simultaneity_slope(frame, tau_sim))
    rows += [("simultaneity", slope * x, x) for x in np.linspace(0.0, x_top, n)]

    # ingoing light ray from Rob until it meets Alice's worldline
    tau_sig = _to_geo(cfg, cfg.tau_signal, "time")
    start = rindler.rob_worldline(frame, tau_sig)
    reach = start.x - d
    rows += [("signal", start.ct + s, start.x - s) for s in np.linspace(0.0, reach, n)]
    end = MinkowskiEvent(start.ct + reach, d)
    if not causal_reachable(start, end):
        raise HorizonLabError("signal endpoint not causally reachable; check tau_signal")
    beyond = end.ct >= end.x
    # can Alice, at the reception event, reach Rob at any sampled time?
    probe = np.linspace(t_lo, t_hi + 10.0 / a, 4 * n)
    reply = any(causal_reachable(end, rindler.rob_worldline(frame, float(t))) for t in probe)

    meta = {
        "mode": "fig1",
        "units": cfg.units,
        "a": cfg.a,
        "rob_distance": d,
        "tau_range": list(cfg.tau_range),
        "tau_simultaneity": cfg.tau_simultaneity,
        "simultaneity_slope": slope,
        "tau_signal": cfg.tau_signal,
        "signal_end_beyond_horizon": bool(beyond),
        "reply_reaches_rob": bool(reply),
        "alice_crossing_proper_time": _from_geo(cfg, rindler.alice_crossing_proper_time(frame), "time"),
    }
    return OutputTable(FIG1_COLUMNS, rows, meta)


def run_infall(cfg: ScenarioConfig) -> OutputTable:
    """Integrate Alice's fall; the exterior and infalling views are projections of one table."""
    params = spacetime_params(cfg)
    icfg = integrator_config(cfg)
    r0 = cfg.r0
    ur0 = cfg.ur0  # dimensionless in geometric units, m/s in SI
    if cfg.units == "si":
        ur0 = ur0 / convert_units(1.0, "time", "to_geometric")
    init = geodesic.initial_state_at_rest(r0, params, ur0)
    traj = geodesic.integrate_radial(init, params, icfg)
    return trajectory_table(traj, cfg)


def trajectory_table(traj: geodesic.Trajectory, cfg: ScenarioConfig) -> OutputTable:
    c_si = convert_units(1.0, "time", "to_geometric")  # metres per second of time
    scale = {name: 1.0 for name in INFALL_COLUMNS}
    if cfg.units == "si":
        scale.update({"lambda": 1.0 / c_si, "tau": 1.0 / c_si, "ur": c_si, "flux_proxy": c_si})
    cols = [np.asarray(traj.column(name), dtype=float) * scale[name] for name in INFALL_COLUMNS]
    rows = [tuple(float(c[i]) for c in cols) for i in range(len(traj))]
    term = traj.termination
    t_scale = scale["tau"]
    meta = {
        "mode": "infall",
        "submode": cfg.submode,
        "units": cfg.units,
        "R0": cfg.R0,
        "k": cfg.k,
        "tau_evap": term.tau_evap * t_scale if math.isfinite(term.tau_evap) else None,
        "r0": cfg.r0,
        "ur0": cfg.ur0,
        "epsilon_horizon": cfg.epsilon_horizon,
        "rel_tol": cfg.rel_tol,
        "abs_tol": cfg.abs_tol,
        "event_tol": cfg.event_tol,
        "include_dtau_metric_terms": cfg.include_dtau_metric_terms,
        "termination": term.kind,
        "event_tau": term.tau * t_scale,
        "event_lambda": term.lam * t_scale,
        "event_residual": term.residual,
        "coincides_with_evaporation": term.coincides_with_evaporation,
        "min_horizon_gap": traj.stats.get("min_gap"),
        "n_accepted": traj.stats.get("n_accepted"),
        "n_rejected": traj.stats.get("n_rejected"),
    }
    return OutputTable(INFALL_COLUMNS, rows, meta)


def _parse_pair(line, lineno):
    parts = line.replace(",", " ").split()
    if len(parts) != 2:
        raise ConfigError("stdin", f"line {lineno}: expected two numbers, got {line!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError("stdin", f"line {lineno}: not a number in {line!r}") from None


def run_transform(cfg: ScenarioConfig, lines) -> OutputTable:
    """Transform (ct, x) -> (tau, chi) or back, one event per input line.

    Blank lines and lines starting with '#' are skipped.
    """
    a = _to_geo(cfg, cfg.a, "acceleration")
    pairs = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        pairs.append(_parse_pair(line, lineno))
    arr = np.array(pairs, dtype=float).reshape(-1, 2)
    if cfg.direction == "to-rindler":
        tau, chi = rindler.to_rindler_coords(arr[:, 0], arr[:, 1], a) if len(arr) else (arr[:, 0], arr[:, 1])
        out = np.column_stack([_from_geo(cfg, tau, "time"), chi])
        cols = ("tau", "chi")
    else:
        tau = _to_geo(cfg, arr[:, 0], "time")
        ct, x = rindler.to_minkowski_coords(tau, arr[:, 1], a) if len(arr) else (arr[:, 0], arr[:, 1])
        out = np.column_stack([ct, x])
        cols = ("ct", "x")
    rows = [tuple(float(v) for v in row) for row in out]
    return OutputTable(cols, rows, {"mode": "transform", "direction": cfg.direction, "a": cfg.a, "units": cfg.units})


def run(cfg: ScenarioConfig, stdin=None) -> OutputTable:
    if cfg.mode == "fig1":
        return run_fig1(cfg)
    if cfg.mode == "infall":
        return run_infall(cfg)
    return run_transform(cfg, stdin if stdin is not None else io.StringIO(""))
