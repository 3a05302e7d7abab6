"""Waypoint missions: takeoff, a fixed waypoint sequence, land back home.

Setpoints are step commands (no smoothing between waypoints). Altitude is
NED Z, so flying at 10 m means Z = -10. Phase codes used in telemetry:

    0        takeoff
    1 + i    enroute to waypoint i
    98       landing descent
    99       done (touched down within 5 cm)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

PHASE_TAKEOFF = 0
PHASE_ENROUTE_BASE = 1
PHASE_LAND = 98
PHASE_DONE = 99

TOUCHDOWN_ALT = 0.05  # |Z| below this during landing counts as down, m


class MissionError(ValueError):
    """Bad mission definition or unparseable mission file."""


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    z: float
    psi: float
    radius: float
    hold: float


@dataclass(frozen=True)
class Mission:
    home: Tuple[float, float]
    takeoff_alt: float
    waypoints: Tuple[Waypoint, ...]
    descent_rate: float

    def validate(self) -> None:
        if not self.waypoints:
            raise MissionError("mission needs at least one waypoint")
        if self.takeoff_alt <= 0.0:
            raise MissionError("takeoff_alt must be > 0")
        if self.descent_rate <= 0.0:
            raise MissionError("descent_rate must be > 0")
        for i, wp in enumerate(self.waypoints):
            if wp.radius <= 0.0:
                raise MissionError(f"waypoint {i} acceptance radius must be > 0")
            if wp.hold < 0.0:
                raise MissionError(f"waypoint {i} hold time must be >= 0")

    def path_length(self) -> float:
        """Total commanded distance along the waypoint legs (climb/descent
        excluded)."""
        total = 0.0
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            total += math.dist((a.x, a.y, a.z), (b.x, b.y, b.z))
        return total


def default_square_mission() -> Mission:
    """Shipped default: 40 m square circuit at 10 m altitude, headings along
    each leg, first/last waypoints above home. The first waypoint holds a few
    seconds so takeoff settles into a stable hover before the circuit."""
    alt = -10.0
    r, hold = 2.0, 1.0
    wps = (
        Waypoint(0.0, 0.0, alt, 0.0, r, 3.0),
        Waypoint(40.0, 0.0, alt, 0.0, r, hold),
        Waypoint(40.0, 40.0, alt, math.pi / 2.0, r, hold),
        Waypoint(0.0, 40.0, alt, math.pi, r, hold),
        Waypoint(0.0, 0.0, alt, -math.pi / 2.0, r, 12.0),
    )
    return Mission(home=(0.0, 0.0), takeoff_alt=10.0, waypoints=wps,
                   descent_rate=0.6)


def load_mission(path) -> Mission:
    """Parse a mission file.

    Format is line-oriented key = value with '#' comments:

        home = 0.0, 0.0
        takeoff_alt = 10.0
        descent_rate = 1.0
        waypoint = x, y, z, psi, radius, hold    (repeated, in order)

    Unknown keys are rejected.
    """
    home = None
    takeoff_alt = None
    descent_rate = None
    waypoints: List[Waypoint] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise MissionError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            parts = [p.strip() for p in value.split(",")]
            try:
                nums = [float(p) for p in parts]
            except ValueError as exc:
                raise MissionError(f"{path}:{lineno}: bad number: {exc}") from None
            if key == "home":
                if len(nums) != 2:
                    raise MissionError(f"{path}:{lineno}: home needs 2 values")
                home = (nums[0], nums[1])
            elif key == "takeoff_alt":
                takeoff_alt = nums[0]
            elif key == "descent_rate":
                descent_rate = nums[0]
            elif key == "waypoint":
                if len(nums) != 6:
                    raise MissionError(
                        f"{path}:{lineno}: waypoint needs 6 values "
                        "(x, y, z, psi, radius, hold)")
                waypoints.append(Waypoint(*nums))
            else:
                raise MissionError(f"{path}:{lineno}: unknown key '{key}'")
    if home is None or takeoff_alt is None or descent_rate is None:
        raise MissionError(f"{path}: missing home/takeoff_alt/descent_rate")
    mission = Mission(home, takeoff_alt, tuple(waypoints), descent_rate)
    mission.validate()
    return mission


def write_mission(mission: Mission, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"home = {mission.home[0]!r}, {mission.home[1]!r}\n")
        fh.write(f"takeoff_alt = {mission.takeoff_alt!r}\n")
        fh.write(f"descent_rate = {mission.descent_rate!r}\n")
        for wp in mission.waypoints:
            fh.write(f"waypoint = {wp.x!r}, {wp.y!r}, {wp.z!r}, "
                     f"{wp.psi!r}, {wp.radius!r}, {wp.hold!r}\n")


class MissionTracker:
    """Phase state machine the harness owns; setpoint_at is pure given the
    (mission, phase-state, t) triple."""

    def __init__(self, mission: Mission):
        mission.validate()
        self.mission = mission
        self.phase = PHASE_TAKEOFF
        self.wp_index = 0
        self.entry_time = None
        self.land_t0 = 0.0
        self.land_z0 = 0.0

    def update(self, state, t: float):
        """Advance the phase machine against the current state and return
        (pos_sp, psi_sp, phase). Phase is non-decreasing in t."""
        m = self.mission
        if self.phase == PHASE_TAKEOFF:
            target = (m.home[0], m.home[1], -m.takeoff_alt)
            if _dist3(state, target) <= m.waypoints[0].radius:
                self.phase = PHASE_ENROUTE_BASE
                self.wp_index = 0
                self.entry_time = None
        elif self.phase == PHASE_LAND:
            if abs(state.z) < TOUCHDOWN_ALT:
                self.phase = PHASE_DONE
        elif self.phase not in (PHASE_DONE,):
            wp = m.waypoints[self.wp_index]
            if _dist3(state, (wp.x, wp.y, wp.z)) <= wp.radius:
                if self.entry_time is None:
                    self.entry_time = t
                if t - self.entry_time >= wp.hold:
                    self.entry_time = None
                    if self.wp_index + 1 < len(m.waypoints):
                        self.wp_index += 1
                        self.phase = PHASE_ENROUTE_BASE + self.wp_index
                    else:
                        self.phase = PHASE_LAND
                        self.land_t0 = t
                        self.land_z0 = state.z
            else:
                self.entry_time = None

        return self.setpoint(state, t)

    def setpoint(self, state, t: float):
        """Setpoint for the current phase; no state-machine side effects.

        Landing keeps the last waypoint's heading so touchdown adds no yaw
        transient."""
        m = self.mission
        if self.phase == PHASE_TAKEOFF:
            return (m.home[0], m.home[1], -m.takeoff_alt), 0.0, PHASE_TAKEOFF
        if self.phase == PHASE_LAND:
            z_sp = min(self.land_z0 + m.descent_rate * (t - self.land_t0), 0.0)
            return (m.home[0], m.home[1], z_sp), m.waypoints[-1].psi, PHASE_LAND
        if self.phase == PHASE_DONE:
            return (m.home[0], m.home[1], 0.0), m.waypoints[-1].psi, PHASE_DONE
        wp = m.waypoints[self.wp_index]
        return (wp.x, wp.y, wp.z), wp.psi, self.phase


def _dist3(state, target) -> float:
    return math.dist((state.x, state.y, state.z), target)
