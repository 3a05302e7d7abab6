"""Quadcopter rigid-body dynamics.

Conventions: Earth frame is NED (z down, altitude = -Z). Body frame has x
forward, y right, z down; attitude is 3-2-1 (yaw-pitch-roll) Euler angles.
Translational velocity (u, v, w) is stored in the body frame; body angular
rates are (p, q, r). The model has no drag, no rotor gyroscopics and no wind;
the only inputs are a body-z thrust force and three body moments.

Pure functions over value types: nothing here keeps state, so everything is
safe to call from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

# Pitch must stay clear of +/-90 deg or the Euler kinematics blow up.
PITCH_LIMIT = math.pi / 2.0 - 1e-3


class PitchSingularityError(RuntimeError):
    """Pitch angle reached the Euler-kinematics singularity band."""


class NonFiniteStateError(RuntimeError):
    """Integration produced a non-finite state component."""


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(angle + math.pi, TWO_PI)
    if a <= 0.0:
        a += TWO_PI
    return a - math.pi


@dataclass(frozen=True)
class QuadParams:
    """Physical and actuation parameters.

    Defaults describe an Iris-class 1.5 kg quad with the light inertia of the
    common simulator models of that airframe. Thrust per motor is
    kf * omega^2, reaction torque km * omega^2. Motors sit on a quad-X frame
    at body positions (+-l/sqrt(2), +-l/sqrt(2), 0): 1 front-right (CCW),
    2 back-left (CCW), 3 front-left (CW), 4 back-right (CW).
    """

    m: float = 1.5            # kg
    jxx: float = 0.008        # kg m^2
    jyy: float = 0.008
    jzz: float = 0.012
    g: float = 9.81           # m/s^2, positive down
    l: float = 0.25           # arm length, m
    kf: float = 5.84e-6       # N s^2/rad^2
    km: float = 2.2e-7        # N m s^2/rad^2
    omega_max: float = 1100.0  # rad/s

    def validate(self) -> None:
        for name in ("m", "jxx", "jyy", "jzz", "l", "kf", "km", "omega_max"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"QuadParams.{name} must be > 0")
        # g = 0 is allowed so torque-free/zero-gravity cases can be simulated.
        if self.g < 0.0 or not math.isfinite(self.g):
            raise ValueError("QuadParams.g must be finite and >= 0")

    def max_thrust(self) -> float:
        """Total thrust with all four motors at omega_max, N."""
        return 4.0 * self.kf * self.omega_max ** 2

    def scaled_inertia(self, factor: float) -> "QuadParams":
        """Copy with the inertia diagonal scaled; everything else unchanged."""
        return QuadParams(self.m, self.jxx * factor, self.jyy * factor,
                          self.jzz * factor, self.g, self.l, self.kf,
                          self.km, self.omega_max)


@dataclass(frozen=True)
class RigidBodyState:
    """12-state rigid body: NED position, body velocity, 3-2-1 Euler angles,
    body rates."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    u: float = 0.0
    v: float = 0.0
    w: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.z, self.u, self.v, self.w,
                self.phi, self.theta, self.psi, self.p, self.q, self.r)

    @staticmethod
    def from_tuple(t) -> "RigidBodyState":
        return RigidBodyState(*t)

    def validate(self) -> None:
        for value in self.as_tuple():
            if not math.isfinite(value):
                raise NonFiniteStateError("non-finite state component")
        if abs(self.theta) >= PITCH_LIMIT:
            raise PitchSingularityError(
                f"pitch {self.theta:.4f} rad within singularity band")


@dataclass(frozen=True)
class Wrench:
    """Body-frame force/moment input: fz along body z (<= 0 for lift) and
    moments about body axes."""

    fz: float = 0.0
    mx: float = 0.0
    my: float = 0.0
    mz: float = 0.0


def euler_to_rotation(phi: float, theta: float, psi: float):
    """Body-to-Earth rotation matrix for 3-2-1 Euler angles, as 3 row tuples."""
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    return (
        (cth * cpsi, sphi * sth * cpsi - cphi * spsi, cphi * sth * cpsi + sphi * spsi),
        (cth * spsi, sphi * sth * spsi + cphi * cpsi, cphi * sth * spsi - sphi * cpsi),
        (-sth, sphi * cth, cphi * cth),
    )


def _derivs(s: tuple, fz: float, mx: float, my: float, mz: float,
            m: float, jxx: float, jyy: float, jzz: float, g: float) -> tuple:
    """Raw state derivative on a 12-tuple; hot path for the integrator."""
    _, _, _, u, v, w, phi, theta, psi, p, q, r = s
    if abs(theta) >= PITCH_LIMIT:
        raise PitchSingularityError(
            f"pitch {theta:.4f} rad within singularity band")
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    tth = sth / cth
    sec = 1.0 / cth

    x_dot = cth * cpsi * u + (sphi * sth * cpsi - cphi * spsi) * v \
        + (cphi * sth * cpsi + sphi * spsi) * w
    y_dot = cth * spsi * u + (sphi * sth * spsi + cphi * cpsi) * v \
        + (cphi * sth * spsi - sphi * cpsi) * w
    z_dot = -sth * u + sphi * cth * v + cphi * cth * w

    u_dot = v * r - w * q - sth * g
    v_dot = -u * r + w * p + sphi * cth * g
    w_dot = u * q - v * p + cphi * cth * g + fz / m

    phi_dot = p + sphi * tth * q + cphi * tth * r
    theta_dot = cphi * q - sphi * r
    psi_dot = sphi * sec * q + cphi * sec * r

    p_dot = ((jyy - jzz) * q * r + mx) / jxx
    q_dot = ((jzz - jxx) * p * r + my) / jyy
    r_dot = ((jxx - jyy) * p * q + mz) / jzz

    return (x_dot, y_dot, z_dot, u_dot, v_dot, w_dot,
            phi_dot, theta_dot, psi_dot, p_dot, q_dot, r_dot)


def derivatives(state: RigidBodyState, wrench: Wrench,
                params: QuadParams) -> tuple:
    """Time derivative of the 12-state under the given wrench.

    Raises PitchSingularityError when |theta| is inside the singularity band.
    """
    return _derivs(state.as_tuple(), wrench.fz, wrench.mx, wrench.my,
                   wrench.mz, params.m, params.jxx, params.jyy, params.jzz,
                   params.g)


def step(state: RigidBodyState, wrench: Wrench, dt: float,
         params: QuadParams) -> RigidBodyState:
    """Advance the state by dt with classical RK4, wrench held constant.

    Roll and yaw are wrapped to (-pi, pi] after the step. Raises
    NonFiniteStateError if any component leaves the reals and propagates
    PitchSingularityError from the stage evaluations.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    s0 = state.as_tuple()
    fz, mx, my, mz = wrench.fz, wrench.mx, wrench.my, wrench.mz
    m, jxx, jyy, jzz, g = params.m, params.jxx, params.jyy, params.jzz, params.g

    k1 = _derivs(s0, fz, mx, my, mz, m, jxx, jyy, jzz, g)
    h2 = 0.5 * dt
    s1 = tuple(a + h2 * b for a, b in zip(s0, k1))
    k2 = _derivs(s1, fz, mx, my, mz, m, jxx, jyy, jzz, g)
    s2 = tuple(a + h2 * b for a, b in zip(s0, k2))
    k3 = _derivs(s2, fz, mx, my, mz, m, jxx, jyy, jzz, g)
    s3 = tuple(a + dt * b for a, b in zip(s0, k3))
    k4 = _derivs(s3, fz, mx, my, mz, m, jxx, jyy, jzz, g)

    h6 = dt / 6.0
    out = [a + h6 * (b + 2.0 * c + 2.0 * d + e)
           for a, b, c, d, e in zip(s0, k1, k2, k3, k4)]
    out[6] = wrap_angle(out[6])
    out[8] = wrap_angle(out[8])
    for value in out:
        if not math.isfinite(value):
            raise NonFiniteStateError("integration produced a non-finite state")
    if abs(out[7]) >= PITCH_LIMIT:
        raise PitchSingularityError(
            f"pitch {out[7]:.4f} rad within singularity band")
    return RigidBodyState(*out)


# Motor sign patterns for (Mx, My, Mz) on the quad-X layout; see QuadParams.
_SIGN_MX = (-1.0, 1.0, 1.0, -1.0)
_SIGN_MY = (1.0, -1.0, 1.0, -1.0)
_SIGN_MZ = (1.0, 1.0, -1.0, -1.0)


def motor_speeds_to_wrench(omegas, params: QuadParams) -> Wrench:
    """Map four motor speeds (rad/s) to the body wrench they produce."""
    if len(omegas) != 4:
        raise ValueError("expected four motor speeds")
    for w in omegas:
        if not 0.0 <= w <= params.omega_max:
            raise ValueError(f"motor speed {w} outside [0, {params.omega_max}]")
    thrusts = [params.kf * w * w for w in omegas]
    a = params.l / math.sqrt(2.0)
    fz = -sum(thrusts)
    mx = a * sum(s * t for s, t in zip(_SIGN_MX, thrusts))
    my = a * sum(s * t for s, t in zip(_SIGN_MY, thrusts))
    mz = (params.km / params.kf) * sum(s * t for s, t in zip(_SIGN_MZ, thrusts))
    return Wrench(fz, mx, my, mz)
