"""Experiment runner: closed-loop simulation, CSV telemetry, run metrics.

A scenario wires mission -> autopilot -> rigid-body plant at a fixed 1 kHz
base step and runs until the mission completes or t_max elapses. Everything
is deterministic; there is no randomness anywhere in the stack, so reruns of
the same config produce byte-identical telemetry.

Telemetry is UTF-8 CSV with a fixed header (see TELEMETRY_COLUMNS); a JSON
sidecar next to each CSV records the fully resolved configuration, vehicle
parameters and the effective stock-gain table.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import mission as mission_mod
from .autopilot import (Autopilot, AutopilotStageError, MODE_ADAPTIVE,
                        MODE_FIXED)
from .dynamics import (NonFiniteStateError, PitchSingularityError, QuadParams,
                       RigidBodyState, motor_speeds_to_wrench, step,
                       wrap_angle)
from .mission import (PHASE_DONE, PHASE_ENROUTE_BASE, PHASE_LAND,
                      Mission, MissionTracker)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2

SCHEMA_VERSION = 1

# Launch attitude (roll, pitch, yaw, rad): the vehicle rests slightly
# off-level, as on uneven ground. The small correction transient during the
# climb gives every attitude/rate channel its first training data while the
# flight is still benign; a perfectly level start would leave them untrained
# until the first aggressive maneuver.
INITIAL_ATTITUDE = (0.15, -0.12, 0.09)

# yaw-error magnitude a swing must reach before a sign change counts as an
# oscillation crossing
YAW_CROSSING_DEADBAND = 0.05  # rad

STATE_COLUMNS = ("x", "y", "z", "u", "v", "w", "phi", "theta", "psi",
                 "p", "q", "r")

GAIN_COLUMNS = Autopilot.GAIN_NAMES

TELEMETRY_COLUMNS: Tuple[str, ...] = (
    ("t",) + STATE_COLUMNS
    + ("x_sp", "y_sp", "z_sp", "vx_sp", "vy_sp", "vz_sp",
       "fx_sp", "fy_sp", "fz_sp", "phi_sp", "theta_sp", "psi_sp",
       "p_sp", "q_sp", "r_sp", "pdot_sp", "qdot_sp", "rdot_sp", "thrust_sp",
       "omega1", "omega2", "omega3", "omega4")
    + GAIN_COLUMNS
    + ("phase", "sat_motor", "sat_vel", "sat_force", "sat_tilt")
)

_COL_INDEX = {name: i for i, name in enumerate(TELEMETRY_COLUMNS)}


class ConfigError(ValueError):
    """Bad scenario configuration or config file."""


@dataclass
class ScenarioConfig:
    """Resolved experiment configuration."""

    mode: str = MODE_ADAPTIVE
    alpha_p: float = 1.0
    alpha_n: float = 1.0
    inertia_scale: float = 1.0
    mission: Optional[str] = None      # mission file path; None = default square
    t_max: float = 200.0
    dt_sim: float = 0.001
    out: str = "out"
    decimation: int = 10
    gravity_ff: bool = False
    name: Optional[str] = None         # telemetry base name; None = run_<mode>

    def validate(self) -> None:
        if self.mode not in (MODE_FIXED, MODE_ADAPTIVE):
            raise ConfigError(f"mode must be 'fixed' or 'adaptive', got {self.mode!r}")
        for key in ("alpha_p", "alpha_n", "inertia_scale"):
            if not getattr(self, key) > 0.0:
                raise ConfigError(f"{key} must be > 0")
        if self.t_max < 0.0:
            raise ConfigError("t_max must be >= 0")
        if self.dt_sim <= 0.0:
            raise ConfigError("dt_sim must be > 0")
        ratio = 0.004 / self.dt_sim
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("dt_sim must divide 0.004 exactly")
        if int(self.decimation) != self.decimation or self.decimation < 1:
            raise ConfigError("decimation must be a positive integer")

    def base_name(self) -> str:
        return self.name if self.name else f"run_{self.mode}"


_CONFIG_TYPES = {
    "mode": str,
    "alpha_p": float,
    "alpha_n": float,
    "inertia_scale": float,
    "mission": str,
    "t_max": float,
    "dt_sim": float,
    "out": str,
    "decimation": int,
    "gravity_ff": bool,
    "name": str,
}


def parse_config(path) -> ScenarioConfig:
    """Read a key = value config file; unknown keys are rejected."""
    values: Dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _CONFIG_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
            kind = _CONFIG_TYPES[key]
            try:
                if kind is bool:
                    if value.lower() not in ("true", "false", "0", "1"):
                        raise ValueError(f"bad boolean {value!r}")
                    values[key] = value.lower() in ("true", "1")
                elif kind is int:
                    values[key] = int(value)
                elif kind is float:
                    values[key] = float(value)
                else:
                    values[key] = value
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    config = ScenarioConfig(**values)
    config.validate()
    return config


@dataclass
class RunMetrics:
    """Quantitative summary of one closed-loop run."""

    mission_completed: bool = False
    completion_time: float = 0.0       # time of touchdown, or t_end if not completed
    rms_pos_err: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    rms_pos_total: float = 0.0
    rms_yaw_err: float = 0.0
    yaw_zero_crossings: int = 0
    max_tilt: float = 0.0
    gain_settling: float = 0.0
    diverged: bool = False

    def as_dict(self) -> Dict[str, object]:
        d = asdict(self)
        d["rms_pos_err"] = list(self.rms_pos_err)
        return d


METRICS_FIELDS = ("name", "mode", "alpha_p", "alpha_n", "inertia_scale",
                  "mission_completed", "completion_time",
                  "rms_pos_x", "rms_pos_y", "rms_pos_z", "rms_pos_total",
                  "rms_yaw_err", "yaw_zero_crossings", "max_tilt",
                  "gain_settling", "diverged")


def default_mission_path() -> Path:
    return Path(__file__).parent / "missions" / "mission_square.cfg"


def _load_mission(config: ScenarioConfig) -> Mission:
    if config.mission is None:
        return mission_mod.default_square_mission()
    return mission_mod.load_mission(config.mission)


def run_scenario(config: ScenarioConfig,
                 plant: Optional[QuadParams] = None,
                 nominal: Optional[QuadParams] = None
                 ) -> Tuple[RunMetrics, Path]:
    """Run one closed-loop scenario; write telemetry + sidecar; return
    (metrics, telemetry path).

    The plant defaults to the nominal vehicle with its inertia diagonal
    scaled by config.inertia_scale; the autopilot always sees the nominal
    parameters. Divergence (non-finite state or a controller failure) stops
    the run, truncates telemetry, and is reported in the metrics instead of
    raising.
    """
    config.validate()
    nominal = nominal if nominal is not None else QuadParams()
    nominal.validate()
    if plant is None:
        plant = nominal.scaled_inertia(config.inertia_scale)
    plant.validate()
    mission = _load_mission(config)
    mission.validate()

    ap = Autopilot(nominal, config.mode, alpha_p=config.alpha_p,
                   alpha_n=config.alpha_n, dt_sim=config.dt_sim,
                   gravity_ff=config.gravity_ff)
    tracker = MissionTracker(mission)
    state = RigidBodyState(x=mission.home[0], y=mission.home[1],
                           phi=INITIAL_ATTITUDE[0], theta=INITIAL_ATTITUDE[1],
                           psi=INITIAL_ATTITUDE[2])

    dt = config.dt_sim
    dec = int(config.decimation)
    k_max = round(config.t_max / dt)
    rows: List[List[float]] = []
    completion: Optional[float] = None
    diverged = False
    t_end = 0.0

    def log_row(t: float, phase: int) -> None:
        held = ap.held
        row = [t]
        row.extend(state.as_tuple())
        row.extend(held.pos_sp)
        row.extend(held.vel_sp)
        row.extend(held.force_sp)
        row.extend(held.att_sp)
        row.extend(held.rate_sp)
        row.extend(held.angacc_sp)
        row.append(held.thrust_sp)
        row.extend(ap.motor_cmd)
        row.extend(ap.gains_snapshot())
        row.append(float(phase))
        row.append(1.0 if ap.sat_motor else 0.0)
        row.append(1.0 if ap.sat_vel else 0.0)
        row.append(1.0 if ap.sat_force else 0.0)
        row.append(1.0 if ap.sat_tilt else 0.0)
        rows.append(row)

    k = 0
    while k <= k_max and k_max > 0:
        t = k * dt
        t_end = t
        pos_sp, psi_sp, phase = tracker.update(state, t)
        if phase == PHASE_DONE and completion is None:
            completion = t
        if phase == PHASE_DONE or k == k_max:
            if k % dec == 0:
                log_row(t, phase)
            break
        try:
            motors = ap.step(t, state, pos_sp, psi_sp)
        except AutopilotStageError:
            diverged = True
            break
        if k % dec == 0:
            log_row(t, phase)
        try:
            wrench = motor_speeds_to_wrench(motors, plant)
            state = step(state, wrench, dt, plant)
        except (PitchSingularityError, NonFiniteStateError):
            diverged = True
            t_end = (k + 1) * dt
            break
        if state.z > 0.0:
            # ground contact: the world has a floor at Z = 0
            state = replace(state, z=0.0, w=min(state.w, 0.0))
        k += 1

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    telemetry_path = out_dir / f"{config.base_name()}.csv"
    write_telemetry(telemetry_path, rows)
    metrics = compute_metrics(rows, diverged=diverged,
                              completion_time=completion, t_end=t_end) \
        if rows else RunMetrics(diverged=diverged, completion_time=t_end)
    write_sidecar(telemetry_path, config, ap, plant, nominal, metrics)
    return metrics, telemetry_path


def write_telemetry(path, rows: Sequence[Sequence[float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(TELEMETRY_COLUMNS) + "\n")
        phase_i = _COL_INDEX["phase"]
        for row in rows:
            parts = [repr(v) if i < phase_i else str(int(v))
                     for i, v in enumerate(row)]
            fh.write(",".join(parts) + "\n")


def write_sidecar(telemetry_path, config: ScenarioConfig, ap: Autopilot,
                  plant: QuadParams, nominal: QuadParams,
                  metrics: RunMetrics) -> Path:
    sidecar = Path(telemetry_path).with_suffix(".meta.json")
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": asdict(config),
        "plant_params": asdict(plant),
        "nominal_params": asdict(nominal),
        "stock_gains_effective": dict(zip(GAIN_COLUMNS,
                                          ap.stock_gains_snapshot())),
        "columns": list(TELEMETRY_COLUMNS),
        "metrics": metrics.as_dict(),
    }
    with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


def read_telemetry(path) -> Dict[str, List[float]]:
    """Read a telemetry CSV into {column: list of floats}."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty telemetry file")
        names = header.split(",")
        data: Dict[str, List[float]] = {name: [] for name in names}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            for name, text in zip(names, line.split(",")):
                data[name].append(float(text))
    return data


def compute_metrics(rows: Sequence[Sequence[float]], *, diverged: bool = False,
                    completion_time: Optional[float] = None,
                    t_end: Optional[float] = None) -> RunMetrics:
    """Metrics over telemetry rows. Position/yaw RMS cover enroute-phase
    samples only; tilt and gain settling cover the whole flight."""
    if not rows:
        raise ValueError("empty telemetry")
    idx = _COL_INDEX
    t_col = [row[0] for row in rows]
    end_time = t_end if t_end is not None else t_col[-1]
    phase = [row[idx["phase"]] for row in rows]
    enroute = [i for i, ph in enumerate(phase)
               if PHASE_ENROUTE_BASE <= ph < PHASE_LAND]

    def rms(values: Sequence[float]) -> float:
        if not values:
            return 0.0
        return math.sqrt(sum(v * v for v in values) / len(values))

    pos_errs = []
    for axis, (sp_name, m_name) in enumerate((("x_sp", "x"), ("y_sp", "y"),
                                              ("z_sp", "z"))):
        errs = [rows[i][idx[sp_name]] - rows[i][idx[m_name]] for i in enroute]
        pos_errs.append(errs)
    rms_axes = tuple(rms(errs) for errs in pos_errs)
    all_sq = [e * e for errs in pos_errs for e in errs]
    rms_total = math.sqrt(sum(all_sq) / len(all_sq)) if all_sq else 0.0

    yaw_errs = [wrap_angle(rows[i][idx["psi_sp"]] - rows[i][idx["psi"]])
                for i in enroute]
    # oscillation swings: sign changes with a deadband so noise-scale
    # chatter around zero is not counted
    crossings = 0
    prev = None
    for e in yaw_errs:
        if abs(e) < YAW_CROSSING_DEADBAND:
            continue
        sign = 1 if e > 0 else -1
        if prev is not None and sign != prev:
            crossings += 1
        prev = sign

    max_tilt = 0.0
    for row in rows:
        c = math.cos(row[idx["phi"]]) * math.cos(row[idx["theta"]])
        tilt = math.acos(max(-1.0, min(1.0, c)))
        if tilt > max_tilt:
            max_tilt = tilt

    window_start = 0.8 * end_time
    tail = [i for i, t in enumerate(t_col) if t >= window_start]
    settling = 0.0
    if tail:
        last = rows[tail[-1]]
        for name in GAIN_COLUMNS:
            j = idx[name]
            final = last[j]
            for i in tail:
                settling = max(settling, abs(rows[i][j] - final))

    return RunMetrics(
        mission_completed=completion_time is not None,
        completion_time=completion_time if completion_time is not None
        else end_time,
        rms_pos_err=rms_axes,
        rms_pos_total=rms_total,
        rms_yaw_err=rms(yaw_errs),
        yaw_zero_crossings=crossings,
        max_tilt=max_tilt,
        gain_settling=settling,
        diverged=diverged,
    )


def _metrics_row(name: str, config: ScenarioConfig,
                 metrics: RunMetrics) -> List[str]:
    values = [name, config.mode, repr(config.alpha_p), repr(config.alpha_n),
              repr(config.inertia_scale), str(int(metrics.mission_completed)),
              repr(metrics.completion_time)]
    values.extend(repr(v) for v in metrics.rms_pos_err)
    values.extend([repr(metrics.rms_pos_total), repr(metrics.rms_yaw_err),
                   str(metrics.yaw_zero_crossings), repr(metrics.max_tilt),
                   repr(metrics.gain_settling), str(int(metrics.diverged))])
    return values


def write_metrics_csv(path, entries: Sequence[Tuple[str, ScenarioConfig,
                                                    RunMetrics]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(METRICS_FIELDS) + "\n")
        for name, config, metrics in entries:
            fh.write(",".join(_metrics_row(name, config, metrics)) + "\n")


def summarize(name: str, metrics: RunMetrics) -> str:
    status = "DIVERGED" if metrics.diverged else (
        "completed" if metrics.mission_completed else "incomplete")
    return (f"{name}: {status} t={metrics.completion_time:.2f}s "
            f"rms_pos={metrics.rms_pos_total:.3f}m "
            f"rms_yaw={metrics.rms_yaw_err:.4f}rad "
            f"yaw_zc={metrics.yaw_zero_crossings} "
            f"max_tilt={math.degrees(metrics.max_tilt):.1f}deg "
            f"gain_settle={metrics.gain_settling:.4f}")


SWEEP_PARAMETERS = ("alpha_p", "alpha_n")


def sweep(config: ScenarioConfig, parameter: str,
          values: Sequence[float]) -> List[Tuple[float, RunMetrics, Path]]:
    """One run per value of alpha_p or alpha_n; individual divergences are
    recorded and the sweep continues. Writes a summary CSV in the out dir."""
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
    for v in values:
        if not v > 0.0:
            raise ConfigError("sweep values must be > 0")
    results = []
    entries = []
    for value in values:
        run_cfg = replace(config, **{parameter: value},
                          name=f"{config.base_name()}_{parameter}_{value:g}")
        metrics, path = run_scenario(run_cfg)
        results.append((value, metrics, path))
        entries.append((run_cfg.base_name(), run_cfg, metrics))
    write_metrics_csv(Path(config.out) / f"sweep_{parameter}.csv", entries)
    return results


def compare_inertia(config: ScenarioConfig, scale: float
                    ) -> Dict[str, Tuple[RunMetrics, Path]]:
    """Fixed vs adaptive at the same scaled plant inertia. Returns
    {'fixed': (metrics, path), 'adaptive': (metrics, path)}."""
    if not scale > 0.0:
        raise ConfigError("inertia scale must be > 0")
    out: Dict[str, Tuple[RunMetrics, Path]] = {}
    entries = []
    for mode in (MODE_FIXED, MODE_ADAPTIVE):
        run_cfg = replace(config, mode=mode, inertia_scale=scale,
                          name=f"inertia_{scale:g}_{mode}")
        metrics, path = run_scenario(run_cfg)
        out[mode] = (metrics, path)
        entries.append((run_cfg.base_name(), run_cfg, metrics))
    write_metrics_csv(Path(config.out) / f"compare_inertia_{scale:g}.csv",
                      entries)
    return out
