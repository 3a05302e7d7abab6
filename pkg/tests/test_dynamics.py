import math

import numpy as np
import pytest

from rcacpilot.dynamics import (PitchSingularityError, QuadParams,
                                RigidBodyState, Wrench, derivatives,
                                euler_to_rotation, motor_speeds_to_wrench,
                                step, wrap_angle)


def reference_derivatives(state, wrench, params):
    """Independent matrix-form transcription of the equations of motion,
    used as an oracle against the scalar implementation."""
    x = np.array(state.as_tuple())
    v_body = x[3:6]
    phi, theta, psi = x[6:9]
    omega = x[9:12]

    rot = np.array(euler_to_rotation(phi, theta, psi))
    pos_dot = rot @ v_body

    grav_body = rot.T @ np.array([0.0, 0.0, params.g])
    thrust = np.array([0.0, 0.0, wrench.fz / params.m])
    v_dot = -np.cross(omega, v_body) + grav_body + thrust

    t_mat = np.array([
        [1.0, math.sin(phi) * math.tan(theta), math.cos(phi) * math.tan(theta)],
        [0.0, math.cos(phi), -math.sin(phi)],
        [0.0, math.sin(phi) / math.cos(theta), math.cos(phi) / math.cos(theta)],
    ])
    euler_dot = t_mat @ omega

    jmat = np.diag([params.jxx, params.jyy, params.jzz])
    moments = np.array([wrench.mx, wrench.my, wrench.mz])
    omega_dot = np.linalg.solve(jmat, moments - np.cross(omega, jmat @ omega))

    return np.concatenate([pos_dot, v_dot, euler_dot, omega_dot])


def random_state(rng):
    return RigidBodyState(
        x=rng.uniform(-50, 50), y=rng.uniform(-50, 50), z=rng.uniform(-50, 5),
        u=rng.uniform(-10, 10), v=rng.uniform(-10, 10), w=rng.uniform(-10, 10),
        phi=rng.uniform(-3.0, 3.0), theta=rng.uniform(-1.4, 1.4),
        psi=rng.uniform(-3.0, 3.0),
        p=rng.uniform(-5, 5), q=rng.uniform(-5, 5), r=rng.uniform(-5, 5))


def random_wrench(rng, params):
    return Wrench(fz=-rng.uniform(0, params.max_thrust()),
                  mx=rng.uniform(-1, 1), my=rng.uniform(-1, 1),
                  mz=rng.uniform(-0.3, 0.3))


class TestDerivatives:
    def test_hover_equilibrium(self):
        params = QuadParams()
        state = RigidBodyState()
        wrench = Wrench(fz=-params.m * params.g)
        assert derivatives(state, wrench, params) == pytest.approx(
            [0.0] * 12, abs=1e-15)

    def test_pure_yaw_acceleration_with_symmetric_inertia(self):
        params = QuadParams(jxx=0.02, jyy=0.02, jzz=0.1)
        state = RigidBodyState(p=0.0, q=0.0, r=0.3)
        wrench = Wrench(fz=-params.m * params.g, mz=0.5)
        ders = derivatives(state, wrench, params)
        assert ders[11] == pytest.approx(5.0, abs=1e-12)
        assert ders[9] == pytest.approx(0.0, abs=1e-15)
        assert ders[10] == pytest.approx(0.0, abs=1e-15)

    def test_matches_independent_transcription(self):
        rng = np.random.default_rng(7)
        params = QuadParams()
        for _ in range(2000):
            state = random_state(rng)
            wrench = random_wrench(rng, params)
            got = np.array(derivatives(state, wrench, params))
            want = reference_derivatives(state, wrench, params)
            assert np.max(np.abs(got - want)) < 1e-12

    def test_position_rate_equals_rotated_body_velocity(self):
        rng = np.random.default_rng(8)
        params = QuadParams()
        for _ in range(200):
            state = random_state(rng)
            ders = derivatives(state, Wrench(), params)
            rot = np.array(euler_to_rotation(state.phi, state.theta, state.psi))
            want = rot @ np.array([state.u, state.v, state.w])
            assert np.allclose(ders[:3], want, atol=1e-13)

    def test_deterministic(self):
        params = QuadParams()
        state = random_state(np.random.default_rng(3))
        wrench = Wrench(fz=-10.0, mx=0.1, my=-0.2, mz=0.05)
        first = derivatives(state, wrench, params)
        for _ in range(5):
            assert derivatives(state, wrench, params) == first

    def test_pitch_singularity_raises(self):
        params = QuadParams()
        state = RigidBodyState(theta=math.pi / 2 - 1e-4)
        with pytest.raises(PitchSingularityError):
            derivatives(state, Wrench(), params)


class TestStep:
    def test_free_fall_constant_acceleration(self):
        params = QuadParams(g=9.81)
        out = step(RigidBodyState(), Wrench(), 0.1, params)
        assert out.w == pytest.approx(0.981, abs=1e-12)
        assert out.z == pytest.approx(0.04905, abs=1e-12)

    def test_hover_is_fixed_point(self):
        params = QuadParams()
        wrench = Wrench(fz=-params.m * params.g)
        state = RigidBodyState(x=1.0, y=-2.0, z=-5.0)
        for dt in (0.001, 0.02, 0.5):
            out = step(state, wrench, dt, params)
            assert np.allclose(out.as_tuple(), state.as_tuple(), atol=1e-12)

    def test_fourth_order_convergence(self):
        params = QuadParams(jxx=0.008, jyy=0.009, jzz=0.012)
        state = RigidBodyState(u=1.0, v=-0.5, w=0.3, phi=0.2, theta=-0.1,
                               psi=0.4, p=0.8, q=-0.6, r=0.5)
        wrench = Wrench(fz=-12.0, mx=0.02, my=-0.015, mz=0.01)

        def integrate(dt):
            s = state
            for _ in range(round(1.0 / dt)):
                s = step(s, wrench, dt, params)
            return np.array(s.as_tuple())

        reference = integrate(1e-5)
        err_coarse = np.linalg.norm(integrate(0.004) - reference)
        err_fine = np.linalg.norm(integrate(0.002) - reference)
        assert err_coarse / err_fine >= 12.0

    def test_angular_momentum_conserved_without_torque(self):
        params = QuadParams(jxx=0.029, jyy=0.032, jzz=0.055, g=0.0)
        state = RigidBodyState(p=0.3, q=-0.4, r=0.25)
        jdiag = np.array([params.jxx, params.jyy, params.jzz])
        h0 = np.linalg.norm(jdiag * np.array([state.p, state.q, state.r]))
        for _ in range(1000):
            state = step(state, Wrench(), 1e-3, params)
            h = np.linalg.norm(jdiag * np.array([state.p, state.q, state.r]))
            assert abs(h - h0) < 1e-6

    def test_angles_wrapped_after_step(self):
        params = QuadParams()
        state = RigidBodyState(phi=3.14, psi=-3.14, p=5.0, r=-5.0)
        out = step(state, Wrench(fz=-params.m * params.g), 0.01, params)
        assert -math.pi < out.phi <= math.pi
        assert -math.pi < out.psi <= math.pi

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            step(RigidBodyState(), Wrench(), 0.0, QuadParams())


class TestMotorMap:
    def test_zero_speeds(self):
        w = motor_speeds_to_wrench([0.0] * 4, QuadParams())
        assert w == Wrench(0.0, 0.0, 0.0, 0.0)

    def test_balanced_speeds(self):
        params = QuadParams(kf=1e-5)
        w = motor_speeds_to_wrench([500.0] * 4, params)
        assert w.fz == pytest.approx(-10.0, abs=1e-12)
        assert w.mx == pytest.approx(0.0, abs=1e-12)
        assert w.my == pytest.approx(0.0, abs=1e-12)
        assert w.mz == pytest.approx(0.0, abs=1e-12)

    def test_lift_is_never_downward(self):
        rng = np.random.default_rng(11)
        params = QuadParams()
        for _ in range(100):
            speeds = rng.uniform(0, params.omega_max, size=4)
            assert motor_speeds_to_wrench(speeds, params).fz <= 0.0

    def test_out_of_range_rejected(self):
        params = QuadParams()
        with pytest.raises(ValueError):
            motor_speeds_to_wrench([0.0, 0.0, 0.0, params.omega_max + 1], params)
        with pytest.raises(ValueError):
            motor_speeds_to_wrench([-1.0, 0.0, 0.0, 0.0], params)


def test_wrap_angle_range_and_values():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(6.2) == pytest.approx(6.2 - 2 * math.pi, abs=1e-12)
    for a in np.linspace(-20, 20, 401):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert abs(math.sin(w) - math.sin(a)) < 1e-12
        assert abs(math.cos(w) - math.cos(a)) < 1e-12


def test_quad_params_validation():
    QuadParams().validate()
    QuadParams(g=0.0).validate()
    with pytest.raises(ValueError):
        QuadParams(m=0.0).validate()
    with pytest.raises(ValueError):
        QuadParams(g=-1.0).validate()
