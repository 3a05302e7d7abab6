"""Cascaded flight controller: position P -> velocity PI(D) -> attitude P ->
rate PID+FF, with the two static maps and the motor mixer.

Loop rates are fixed: position 25 Hz, velocity 50 Hz, attitude/rate/mixer
250 Hz; between its own ticks every stage holds its last output (zero-order
hold). The twelve channel controllers are RcacController instances in both
modes:

* adaptive mode starts every gain at zero and adapts it each tick by RLS;
* fixed mode freezes the gains at the stock table, converted once into the
  same discrete regressor structure (integral gains scaled by the loop
  period, derivative gains divided by it). Freezing makes the two modes
  bit-identical when the adaptive gains are pinned to the stock values,
  which pins down the shared code path.

The rate controllers in both modes work in normalized torque (full
differential thrust = 1); the rate loop scales their output to angular
acceleration through the nominal control authority.

The controller only sees nominal vehicle parameters; the plant integrated by
the harness may differ (e.g. scaled inertia).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .dynamics import (NonFiniteStateError, PITCH_LIMIT,
                       PitchSingularityError, QuadParams, RigidBodyState,
                       euler_to_rotation, wrap_angle)
from .rcac import ControllerKind, RcacController, RcacDivergenceError

MODE_FIXED = "fixed"
MODE_ADAPTIVE = "adaptive"

POSITION_PERIOD = 0.04
VELOCITY_PERIOD = 0.02
ATTITUDE_PERIOD = 0.004

# Covariance scales per loop (adaptive mode), multiplied by alpha_p.
P0_POSITION = 0.01
P0_VELOCITY = 0.01
P0_ATTITUDE = 1.0
P0_RATE = 0.01


class AutopilotStageError(RuntimeError):
    """Controller failure annotated with the cascade stage it came from."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        super().__init__(f"{stage}: {cause}")


@dataclass
class StockGains:
    """Fixed-gain table in PX4-style units.

    pos_p: 1/s. vel_pid: acceleration per (m/s); converted to force by the
    nominal mass. att_p: 1/s. rate_pid/rate_ff: normalized torque per
    (rad/s); converted to angular acceleration by the per-axis control
    authority (max moment over nominal inertia).
    """

    pos_p: Tuple[float, float, float] = (0.95, 0.95, 1.0)
    vel_pid: Tuple[Tuple[float, float, float], ...] = (
        (1.8, 0.4, 0.2), (1.8, 0.4, 0.2), (4.0, 2.0, 0.0))
    att_p: Tuple[float, float, float] = (6.5, 6.5, 2.8)
    rate_pid: Tuple[Tuple[float, float, float], ...] = (
        (0.15, 0.2, 0.003), (0.15, 0.2, 0.003), (0.2, 0.1, 0.0))
    rate_ff: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def control_authority(self, params: QuadParams) -> Tuple[float, float, float]:
        """Max angular acceleration per axis from full differential thrust."""
        t_max = params.kf * params.omega_max ** 2
        arm = params.l / math.sqrt(2.0)
        m_xy = 2.0 * arm * t_max
        m_z = 2.0 * (params.km / params.kf) * t_max
        return (m_xy / params.jxx, m_xy / params.jyy, m_z / params.jzz)

    def velocity_theta(self, axis: int, params: QuadParams) -> List[float]:
        """Effective [P, I, D] gains in force units for the discrete
        (lagged-sum) regressor."""
        kp, ki, kd = self.vel_pid[axis]
        m = params.m
        return [kp * m, ki * m * VELOCITY_PERIOD, kd * m / VELOCITY_PERIOD]

    def rate_theta(self, axis: int, params: QuadParams) -> List[float]:
        """Effective [P, I, D, FF] gains for the discrete regressor, in
        normalized-torque units (the rate loop's native output)."""
        kp, ki, kd = self.rate_pid[axis]
        return [kp, ki * ATTITUDE_PERIOD, kd / ATTITUDE_PERIOD,
                self.rate_ff[axis]]


def force_yaw_to_attitude(force_sp: Sequence[float], psi_sp: float,
                          params: QuadParams, tilt_max: float,
                          prev_att_sp: Sequence[float],
                          eps: float = 1e-9,
                          thrust_limit: Optional[float] = None,
                          thrust_floor: float = 0.0,
                          lift_anchor: float = 0.0):
    """Static map from a desired inertial force and yaw to (attitude setpoint,
    thrust magnitude).

    The desired body-down axis is the unit vector opposite the force; its
    horizontal part is shrunk to the tilt limit if needed. Rotors cannot push
    downward, so a positive (downward) force z-component saturates at zero,
    and the thrust magnitude saturates at thrust_limit (full motor thrust by
    default) so descent/extreme demands stay feasible. When computing the
    tilt direction (not the thrust magnitude), the upward component is
    anchored at lift_anchor so momentary dips in the vertical demand do not
    swing the tilt command wildly. Degenerate force (norm <= eps) holds the
    previous attitude with zero thrust.
    """
    fx, fy, fz = force_sp
    if fz > 0.0:
        fz = 0.0
    t = math.sqrt(fx * fx + fy * fy + fz * fz)
    if not math.isfinite(t):
        raise NonFiniteStateError("non-finite force command")
    if t <= eps:
        return (prev_att_sp[0], prev_att_sp[1], prev_att_sp[2]), 0.0
    fz_dir = min(fz, -lift_anchor)
    norm = math.sqrt(fx * fx + fy * fy + fz_dir * fz_dir)
    dx, dy, dz = -fx / norm, -fy / norm, -fz_dir / norm
    cos_tilt = max(-1.0, min(1.0, dz))
    if math.acos(cos_tilt) > tilt_max:
        h = math.hypot(dx, dy)
        scale = math.sin(tilt_max) / h
        dx *= scale
        dy *= scale
        dz = math.cos(tilt_max)
    psi = wrap_angle(psi_sp)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    dpx = cpsi * dx + spsi * dy
    dpy = -spsi * dx + cpsi * dy
    theta_sp = math.atan2(dpx, dz)
    phi_sp = math.asin(max(-1.0, min(1.0, -dpy)))
    limit = thrust_limit if thrust_limit is not None else params.max_thrust()
    # a floor keeps some collective thrust whenever a force is commanded so
    # the mixer retains moment authority
    thrust = min(max(t, thrust_floor), limit)
    return (phi_sp, theta_sp, psi), thrust


def euler_rates_to_body_rates(att: Sequence[float],
                              euler_rates: Sequence[float]):
    """Desired body rates from desired Euler-angle rates at the measured
    attitude (inverse of the Euler kinematics)."""
    phi, theta = att[0], att[1]
    if abs(theta) >= PITCH_LIMIT:
        raise PitchSingularityError(
            f"pitch {theta:.4f} rad within singularity band")
    dphi, dtheta, dpsi = euler_rates
    sphi, cphi = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    p = dphi - sth * dpsi
    q = cphi * dtheta + sphi * cth * dpsi
    r = -sphi * dtheta + cphi * cth * dpsi
    return (p, q, r)


# Motor sign patterns matching dynamics.motor_speeds_to_wrench.
_SIGN_MX = (-1.0, 1.0, 1.0, -1.0)
_SIGN_MY = (1.0, -1.0, 1.0, -1.0)
_SIGN_MZ = (1.0, 1.0, -1.0, -1.0)


def mix(angacc_sp: Sequence[float], thrust_sp: float, params: QuadParams):
    """Allocate desired thrust and angular acceleration to motor speeds.

    Moments come from the NOMINAL inertia diagonal; the true plant may
    differ. The quad-X allocation matrix has mutually orthogonal sign
    patterns, so the inverse is closed-form. Infeasible demands saturate
    (squared speeds clamped at zero, speeds at omega_max) and are flagged.

    Returns (speeds, saturated).
    """
    mx = params.jxx * angacc_sp[0]
    my = params.jyy * angacc_sp[1]
    mz = params.jzz * angacc_sp[2]
    thrust = max(0.0, thrust_sp)
    a = params.l / math.sqrt(2.0)
    kf, km = params.kf, params.km
    base = thrust / (4.0 * kf)
    cx = mx / (4.0 * a * kf)
    cy = my / (4.0 * a * kf)
    cz = mz / (4.0 * km)
    saturated = False
    speeds = []
    for i in range(4):
        w2 = base + _SIGN_MX[i] * cx + _SIGN_MY[i] * cy + _SIGN_MZ[i] * cz
        if w2 < 0.0:
            w2 = 0.0
            saturated = True
        w = math.sqrt(w2)
        if w > params.omega_max:
            w = params.omega_max
            saturated = True
        speeds.append(w)
    return speeds, saturated


@dataclass
class CascadeSetpoints:
    """Zero-order-held outputs of every cascade stage."""

    pos_sp: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    vel_sp: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    force_sp: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    att_sp: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    euler_rate_sp: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    rate_sp: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    angacc_sp: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    thrust_sp: float = 0.0


class Autopilot:
    """Multi-rate cascade over twelve channel controllers."""

    def __init__(self, nominal: QuadParams, mode: str = MODE_ADAPTIVE, *,
                 alpha_p: float = 1.0, alpha_n: float = 1.0,
                 dt_sim: float = 0.001, stock: Optional[StockGains] = None,
                 gravity_ff: bool = False, vel_limit_xy: float = 12.0,
                 vel_limit_z: float = 3.0,
                 tilt_max: float = math.radians(45.0),
                 thrust_margin: float = 0.85,
                 thrust_floor_frac: float = 0.12,
                 accel_limit_xy: float = 3.0,
                 att_slew_rp: float = 2.0,
                 att_slew_yaw: float = 1.0,
                 rate_limit_rp: float = 3.5,
                 rate_limit_yaw: float = 2.0,
                 brake_accel_xy: float = 1.5,
                 brake_accel_z: float = 1.5,
                 adapt_deadband: Tuple[float, float, float, float] = (
                     3.0, 2.0, 0.08, 0.15),
                 gamma_limit: float = 1e4):
        if mode not in (MODE_FIXED, MODE_ADAPTIVE):
            raise ValueError(f"unknown autopilot mode '{mode}'")
        if alpha_p <= 0.0 or alpha_n <= 0.0:
            raise ValueError("alpha_p and alpha_n must be > 0")
        n_att = ATTITUDE_PERIOD / dt_sim
        if abs(n_att - round(n_att)) > 1e-9 or dt_sim <= 0.0:
            raise ValueError("dt_sim must divide the 0.004 s attitude period")
        nominal.validate()
        self.nominal = nominal
        self.mode = mode
        self.adaptive = mode == MODE_ADAPTIVE
        self.dt_sim = dt_sim
        self.stock = stock if stock is not None else StockGains()
        self.gravity_ff = gravity_ff
        self.vel_limit_xy = vel_limit_xy
        self.vel_limit_z = vel_limit_z
        self.tilt_max = tilt_max
        # headroom below full collective thrust so the mixer keeps moment
        # authority during aggressive climbs
        self.thrust_limit = thrust_margin * nominal.max_thrust()
        self.thrust_floor = thrust_floor_frac * nominal.max_thrust()
        # tilt-direction anchor: half the hover force
        self.lift_anchor = 0.5 * nominal.m * nominal.g
        # horizontal force cap (mass * max horizontal acceleration)
        self.force_limit_xy = accel_limit_xy * nominal.m
        # attitude setpoints slew between ticks instead of stepping, so the
        # inner loops track ramps rather than discontinuities
        self.att_slew = (att_slew_rp * ATTITUDE_PERIOD,
                         att_slew_rp * ATTITUDE_PERIOD,
                         att_slew_yaw * ATTITUDE_PERIOD)
        self.rate_limits = (rate_limit_rp, rate_limit_rp, rate_limit_yaw)
        # velocity setpoints follow a square-root braking curve near the
        # target so step position commands arrive without overshoot
        self.brake_accel = (brake_accel_xy, brake_accel_xy, brake_accel_z)
        # adaptation dead zone per loop (position m, velocity m/s, attitude
        # rad, rate rad/s): gains stop updating on residual-scale errors so
        # they cannot drift while tracking is already converged
        self.deadband_pos, self.deadband_vel, self.deadband_att, \
            self.deadband_rate = adapt_deadband
        # the rate controllers work in normalized torque (+-1 ~ full
        # differential-thrust authority); their output scales to angular
        # acceleration here
        self.rate_authority = self.stock.control_authority(nominal)
        self.n_pos = round(POSITION_PERIOD / dt_sim)
        self.n_vel = round(VELOCITY_PERIOD / dt_sim)
        self.n_att = round(ATTITUDE_PERIOD / dt_sim)

        sigma = alpha_n
        if self.adaptive:
            self.pos_ctrl = [RcacController.create(
                ControllerKind.P, P0_POSITION * alpha_p, sigma, gamma_limit=gamma_limit)
                for _ in range(3)]
            self.vel_ctrl = [RcacController.create(
                ControllerKind.PI, P0_VELOCITY * alpha_p, sigma, gamma_limit=gamma_limit)
                for _ in range(3)]
            self.att_ctrl = [RcacController.create(
                ControllerKind.P, P0_ATTITUDE * alpha_p, sigma, gamma_limit=gamma_limit)
                for _ in range(3)]
            self.rate_ctrl = [RcacController.create(
                ControllerKind.PID_FF, P0_RATE * alpha_p, sigma, gamma_limit=gamma_limit)
                for _ in range(3)]
        else:
            self.pos_ctrl = [RcacController.create(
                ControllerKind.P, 1.0, sigma, theta0=[self.stock.pos_p[i]],
                gamma_limit=gamma_limit) for i in range(3)]
            self.vel_ctrl = [RcacController.create(
                ControllerKind.PID, 1.0, sigma,
                theta0=self.stock.velocity_theta(i, nominal),
                gamma_limit=gamma_limit) for i in range(3)]
            self.att_ctrl = [RcacController.create(
                ControllerKind.P, 1.0, sigma, theta0=[self.stock.att_p[i]],
                gamma_limit=gamma_limit) for i in range(3)]
            self.rate_ctrl = [RcacController.create(
                ControllerKind.PID_FF, 1.0, sigma,
                theta0=self.stock.rate_theta(i, nominal),
                gamma_limit=gamma_limit) for i in range(3)]

        self.held = CascadeSetpoints()
        self.motor_cmd = [0.0, 0.0, 0.0, 0.0]
        self.sat_motor = False
        self.sat_vel = False
        self.sat_force = False
        self.sat_tilt = False
        # per-channel saturation latches storing the clamp direction
        # (0 free, +1 clamped high, -1 clamped low): adaptation and
        # integration are inhibited on the next tick only while the error
        # keeps pushing into the clamp (direction-aware anti-windup)
        self._pos_sat = [0, 0, 0]
        self._vel_sat = [0, 0, 0]
        self._att_sat = [0, 0, 0]
        self._thrust_sat = False
        self.tick_counts = {"position": 0, "velocity": 0, "attitude": 0,
                            "rate": 0, "mix": 0}

    # stage implementations -------------------------------------------------

    def position_loop(self, pos_sp: Sequence[float],
                      pos_meas: Sequence[float]) -> List[float]:
        """Position error -> velocity setpoint, clamped per axis."""
        errors = [pos_sp[i] - pos_meas[i] for i in range(3)]
        out = []
        self.sat_vel = False
        try:
            for i in range(3):
                free = self._pos_sat[i] * errors[i] <= 0.0
                upd = self.adaptive and free \
                    and abs(errors[i]) >= self.deadband_pos
                out.append(self.pos_ctrl[i].step(
                    errors[i], update=upd, integrate=free))
        except RcacDivergenceError as exc:
            raise AutopilotStageError("position loop", exc) from exc
        for i, vmax in enumerate((self.vel_limit_xy, self.vel_limit_xy,
                                  self.vel_limit_z)):
            limit = min(vmax, math.sqrt(
                2.0 * self.brake_accel[i] * abs(errors[i])))
            if out[i] > limit:
                out[i] = limit
                self._pos_sat[i] = 1
                self.sat_vel = True
            elif out[i] < -limit:
                out[i] = -limit
                self._pos_sat[i] = -1
                self.sat_vel = True
            else:
                self._pos_sat[i] = 0
        return out

    def velocity_loop(self, vel_sp: Sequence[float],
                      vel_meas_inertial: Sequence[float]) -> List[float]:
        """Inertial velocity error -> inertial force setpoint (N).

        Feasibility clamps: horizontal magnitude capped at the acceleration
        limit and the vertical component at zero (rotors cannot push down).
        Clamped channels inhibit their own adaptation next tick."""
        out = []
        self.sat_force = False
        try:
            for i in range(3):
                z = vel_sp[i] - vel_meas_inertial[i]
                free = self._vel_sat[i] * z <= 0.0
                upd = self.adaptive and free and abs(z) >= self.deadband_vel
                out.append(self.vel_ctrl[i].step(
                    z, update=upd, integrate=free))
        except RcacDivergenceError as exc:
            raise AutopilotStageError("velocity loop", exc) from exc
        if self.gravity_ff:
            out[2] -= self.nominal.m * self.nominal.g
        raw = list(out)
        h = math.hypot(out[0], out[1])
        if h > self.force_limit_xy:
            scale = self.force_limit_xy / h
            out[0] *= scale
            out[1] *= scale
            self.sat_force = True
            self._vel_sat[0] = 1 if raw[0] > 0.0 else -1
            self._vel_sat[1] = 1 if raw[1] > 0.0 else -1
        else:
            self._vel_sat[0] = 0
            self._vel_sat[1] = 0
        if out[2] > 0.0:
            out[2] = 0.0
            self.sat_force = True
            self._vel_sat[2] = 1
        elif self._thrust_sat:
            # collective thrust clipped downstream: vertical demand exceeded
            # what the rotors can lift
            self._vel_sat[2] = -1
        else:
            self._vel_sat[2] = 0
        return out

    def attitude_loop(self, att_sp: Sequence[float],
                      att_meas: Sequence[float]) -> List[float]:
        """Attitude error (yaw wrapped) -> Euler-rate setpoint, clamped to
        the per-axis rate limits."""
        errors = (att_sp[0] - att_meas[0], att_sp[1] - att_meas[1],
                  wrap_angle(att_sp[2] - att_meas[2]))
        out = []
        try:
            for i in range(3):
                free = self._att_sat[i] * errors[i] <= 0.0
                upd = self.adaptive and free \
                    and abs(errors[i]) >= self.deadband_att
                out.append(self.att_ctrl[i].step(
                    errors[i], update=upd, integrate=free))
        except RcacDivergenceError as exc:
            raise AutopilotStageError("attitude loop", exc) from exc
        for i, limit in enumerate(self.rate_limits):
            if out[i] > limit:
                out[i] = limit
                self._att_sat[i] = 1
            elif out[i] < -limit:
                out[i] = -limit
                self._att_sat[i] = -1
            else:
                self._att_sat[i] = 0
        return out

    def rate_loop(self, rate_sp: Sequence[float],
                  rate_meas: Sequence[float]) -> List[float]:
        """Body-rate error -> angular-acceleration setpoint, with the rate
        setpoint feeding the feedforward regressor entry."""
        out = []
        try:
            for i in range(3):
                z = rate_sp[i] - rate_meas[i]
                upd = self.adaptive and abs(z) >= self.deadband_rate
                u = self.rate_ctrl[i].step(
                    z, setpoint_ff=rate_sp[i], update=upd)
                out.append(u * self.rate_authority[i])
        except RcacDivergenceError as exc:
            raise AutopilotStageError("rate loop", exc) from exc
        return out

    # scheduler -------------------------------------------------------------

    def step(self, t: float, state: RigidBodyState, pos_sp: Sequence[float],
             psi_sp: float) -> List[float]:
        """One simulation tick: fire whichever loops are due at t and return
        the (held) motor command."""
        k = round(t / self.dt_sim)
        if abs(k * self.dt_sim - t) > 1e-9:
            raise ValueError(f"t={t} is not a multiple of dt_sim={self.dt_sim}")
        held = self.held

        if k % self.n_pos == 0:
            held.pos_sp = list(pos_sp)
            held.vel_sp = self.position_loop(pos_sp,
                                             (state.x, state.y, state.z))
            self.tick_counts["position"] += 1

        if k % self.n_vel == 0:
            rot = euler_to_rotation(state.phi, state.theta, state.psi)
            vel_inertial = tuple(
                rot[i][0] * state.u + rot[i][1] * state.v + rot[i][2] * state.w
                for i in range(3))
            held.force_sp = self.velocity_loop(held.vel_sp, vel_inertial)
            self.tick_counts["velocity"] += 1

        if k % self.n_att == 0:
            try:
                att_raw, thrust_sp = force_yaw_to_attitude(
                    held.force_sp, psi_sp, self.nominal, self.tilt_max,
                    held.att_sp, thrust_limit=self.thrust_limit,
                    thrust_floor=self.thrust_floor,
                    lift_anchor=self.lift_anchor)
            except NonFiniteStateError as exc:
                raise AutopilotStageError("attitude static map", exc) from exc
            fx, fy, fz = held.force_sp
            self._thrust_sat = math.sqrt(
                fx * fx + fy * fy + fz * fz) > self.thrust_limit
            self.sat_tilt = thrust_sp > 0.0 and (
                math.acos(max(-1.0, min(1.0,
                              math.cos(att_raw[0]) * math.cos(att_raw[1]))))
                >= self.tilt_max - 1e-12)
            att_sp = []
            for i in range(3):
                delta = wrap_angle(att_raw[i] - held.att_sp[i])
                limit = self.att_slew[i]
                if delta > limit:
                    delta = limit
                elif delta < -limit:
                    delta = -limit
                att_sp.append(wrap_angle(held.att_sp[i] + delta))
            held.att_sp = att_sp
            held.thrust_sp = thrust_sp
            att_meas = (state.phi, state.theta, state.psi)
            held.euler_rate_sp = self.attitude_loop(att_sp, att_meas)
            self.tick_counts["attitude"] += 1
            try:
                rate_sp = euler_rates_to_body_rates(att_meas,
                                                    held.euler_rate_sp)
            except PitchSingularityError as exc:
                raise AutopilotStageError("euler-rate map", exc) from exc
            held.rate_sp = list(rate_sp)
            held.angacc_sp = self.rate_loop(rate_sp,
                                            (state.p, state.q, state.r))
            self.tick_counts["rate"] += 1
            self.motor_cmd, self.sat_motor = mix(
                held.angacc_sp, held.thrust_sp, self.nominal)
            self.tick_counts["mix"] += 1

        return list(self.motor_cmd)

    # telemetry hooks --------------------------------------------------------

    GAIN_NAMES = (
        "g_pos_x", "g_pos_y", "g_pos_z",
        "g_vel_x_p", "g_vel_x_i", "g_vel_y_p", "g_vel_y_i",
        "g_vel_z_p", "g_vel_z_i",
        "g_att_roll", "g_att_pitch", "g_att_yaw",
        "g_rate_roll_p", "g_rate_roll_i", "g_rate_roll_d", "g_rate_roll_ff",
        "g_rate_pitch_p", "g_rate_pitch_i", "g_rate_pitch_d", "g_rate_pitch_ff",
        "g_rate_yaw_p", "g_rate_yaw_i", "g_rate_yaw_d", "g_rate_yaw_ff",
    )

    def gains_snapshot(self) -> List[float]:
        """The 24 channel gains in telemetry order. Fixed-mode velocity
        controllers carry a D gain that the (PI-shaped) schema drops."""
        out = [c.theta[0] for c in self.pos_ctrl]
        for c in self.vel_ctrl:
            out.extend(c.theta[:2])
        out.extend(c.theta[0] for c in self.att_ctrl)
        for c in self.rate_ctrl:
            out.extend(c.theta[:4])
        return out

    def stock_gains_snapshot(self) -> List[float]:
        """Effective stock gains in the same order/units as gains_snapshot."""
        out = [self.stock.pos_p[i] for i in range(3)]
        for i in range(3):
            out.extend(self.stock.velocity_theta(i, self.nominal)[:2])
        out.extend(self.stock.att_p[i] for i in range(3))
        for i in range(3):
            out.extend(self.stock.rate_theta(i, self.nominal))
        return out
