"""Adaptive digital controllers tuned online by recursive least squares.

Each controller carries a gain vector theta over a short regressor of past
error data and updates it every tick from a retrospective performance
measure. Controller kinds and regressor layouts:

    P       [e_prev]
    PI      [e_prev, e_sum_prev]
    PID     [e_prev, e_sum_prev, e_prev - e_prev2]
    PID_FF  [e_prev, e_sum_prev, e_prev - e_prev2, setpoint_now]

Note the one-tick lag on all error-derived terms; only the feedforward
setpoint enters at the current tick. The per-tick sequence in step() is:

    1. rls_update(e)   consumes the regressor/output stored on the previous
                       tick, so the pair (e_k, phi_{k-1}, u_{k-1}) drives the
                       gain update;
    2. build_regressor reads the error history, which still ends at e_{k-1};
    3. control_output  u = phi . theta, and stores (phi, u) for the next
                       update;
    4. push_error(e)   advances the error history and integrator.

Controllers are independent values with no shared state; a cascade of them
is driven sequentially within one simulation tick.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Optional, Sequence


class RcacDivergenceError(RuntimeError):
    """Gain update produced a non-finite value; carries the tick index."""

    def __init__(self, step_index: int, detail: str = ""):
        self.step_index = step_index
        super().__init__(
            f"controller diverged at step {step_index}" +
            (f": {detail}" if detail else ""))


class ControllerKind(Enum):
    P = "P"
    PI = "PI"
    PID = "PID"
    PID_FF = "PID_FF"

    @property
    def width(self) -> int:
        return _WIDTHS[self]

    @property
    def has_feedforward(self) -> bool:
        return self is ControllerKind.PID_FF


_WIDTHS = {
    ControllerKind.P: 1,
    ControllerKind.PI: 2,
    ControllerKind.PID: 3,
    ControllerKind.PID_FF: 4,
}


def _identity(n: int):
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def _mat_inv(mat):
    """Gauss-Jordan inverse with partial pivoting for the small (n<=4)
    covariance matrices used here."""
    n = len(mat)
    a = [list(row) + ident for row, ident in zip(mat, _identity(n))]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[pivot][col]) < 1e-300:
            raise ValueError("singular matrix")
        a[col], a[pivot] = a[pivot], a[col]
        scale = a[col][col]
        a[col] = [v / scale for v in a[col]]
        for row in range(n):
            if row != col and a[row][col] != 0.0:
                factor = a[row][col]
                a[row] = [v - factor * w for v, w in zip(a[row], a[col])]
    return [row[n:] for row in a]


class RcacController:
    """One adaptive channel: gain vector, covariance, and error history."""

    __slots__ = ("kind", "theta", "pmat", "sigma", "gamma", "z_prev",
                 "z_prev2", "phi_prev", "u_prev", "gamma_limit", "step_count")

    def __init__(self, kind: ControllerKind, theta, pmat, sigma: float,
                 gamma_limit: float = 1e4):
        n = kind.width
        if len(theta) != n or len(pmat) != n:
            raise ValueError("theta/pmat size does not match controller kind")
        self.kind = kind
        self.theta = list(theta)
        self.pmat = [list(row) for row in pmat]
        self.sigma = sigma
        self.gamma = 0.0
        self.z_prev = 0.0
        self.z_prev2 = 0.0
        self.phi_prev = [0.0] * n
        self.u_prev = 0.0
        self.gamma_limit = gamma_limit
        self.step_count = 0

    @classmethod
    def create(cls, kind: ControllerKind, p0: float, sigma: float = 1.0,
               theta0: Optional[Sequence[float]] = None,
               gamma_limit: float = 1e4) -> "RcacController":
        """Fresh controller with covariance p0 * I and gains theta0 (zeros
        by default)."""
        n = kind.width
        theta = list(theta0) if theta0 is not None else [0.0] * n
        pmat = [[p0 if i == j else 0.0 for j in range(n)] for i in range(n)]
        return cls(kind, theta, pmat, sigma, gamma_limit)

    def build_regressor(self, setpoint_ff: Optional[float] = None):
        """Regressor for the current tick, from history ending one tick back."""
        if self.kind.has_feedforward:
            if setpoint_ff is None:
                raise ValueError("PID_FF controller requires a feedforward setpoint")
            return [self.z_prev, self.gamma,
                    self.z_prev - self.z_prev2, setpoint_ff]
        if setpoint_ff is not None:
            raise ValueError(
                f"feedforward value supplied to a {self.kind.value} controller")
        if self.kind is ControllerKind.P:
            return [self.z_prev]
        if self.kind is ControllerKind.PI:
            return [self.z_prev, self.gamma]
        return [self.z_prev, self.gamma, self.z_prev - self.z_prev2]

    def control_output(self, phi) -> float:
        """u = phi . theta; stores (phi, u) for the next gain update."""
        if len(phi) != self.kind.width:
            raise ValueError("regressor width mismatch")
        u = 0.0
        for a, b in zip(phi, self.theta):
            u += a * b
        self.phi_prev = list(phi)
        self.u_prev = u
        return u

    def rls_update(self, z: float) -> None:
        """Gain/covariance update driven by the freshest error sample.

        Pairs z with the regressor and output stored on the previous tick:

            P+ = P - (P phi' phi P) / (1 + phi P phi')
            theta+ = theta + P+ phi' [z + sigma (phi theta - u_prev)]

        P is re-symmetrized afterwards to stop floating-point drift.
        """
        phi = self.phi_prev
        n = len(phi)
        pmat = self.pmat
        pphi = [sum(pmat[i][j] * phi[j] for j in range(n)) for i in range(n)]
        denom = 1.0 + sum(phi[i] * pphi[i] for i in range(n))
        for i in range(n):
            for j in range(n):
                pmat[i][j] -= pphi[i] * pphi[j] / denom
        # symmetrize
        for i in range(n):
            for j in range(i + 1, n):
                avg = 0.5 * (pmat[i][j] + pmat[j][i])
                pmat[i][j] = avg
                pmat[j][i] = avg
        innov = z + self.sigma * (
            sum(phi[i] * self.theta[i] for i in range(n)) - self.u_prev)
        pphi_new = [sum(pmat[i][j] * phi[j] for j in range(n)) for i in range(n)]
        for i in range(n):
            self.theta[i] += pphi_new[i] * innov
        for value in self.theta:
            if not math.isfinite(value):
                raise RcacDivergenceError(self.step_count, "gain vector")
        for row in pmat:
            for value in row:
                if not math.isfinite(value):
                    raise RcacDivergenceError(self.step_count, "covariance")

    def push_error(self, z: float, integrate: bool = True) -> None:
        """Advance the error history; accumulate the clamped integrator
        unless integration is inhibited (anti-windup)."""
        if integrate:
            gamma = self.gamma + z
            if gamma > self.gamma_limit:
                gamma = self.gamma_limit
            elif gamma < -self.gamma_limit:
                gamma = -self.gamma_limit
            self.gamma = gamma
        self.z_prev2 = self.z_prev
        self.z_prev = z

    def step(self, z: float, setpoint_ff: Optional[float] = None,
             update: bool = True, integrate: bool = True) -> float:
        """One controller tick.

        The control uses the gains as they stood before this tick's error
        arrived, and the gain update pairs the fresh error with the
        regressor/output stored on the previous tick:

            phi = regressor from history     (ends at the previous error)
            u   = phi . theta                (theta not yet updated with z)
            rls_update(z)                    (consumes the previous pair)
            store (phi, u) for the next update; push z into the history

        update=False freezes the gains (fixed-gain mode, or anti-windup
        inhibition while the channel's output is saturated downstream);
        integrate=False additionally freezes the error integrator.
        """
        phi = self.build_regressor(setpoint_ff)
        u = 0.0
        for a, b in zip(phi, self.theta):
            u += a * b
        if update:
            self.rls_update(z)
        self.phi_prev = phi
        self.u_prev = u
        self.push_error(z, integrate)
        self.step_count += 1
        return u


def retrospective_cost(theta, history, theta0, p0, sigma: float) -> float:
    """Cost of a candidate gain vector over recorded update data.

    history is a sequence of (z_k, phi_{k-1}, u_{k-1}) tuples as consumed by
    rls_update. p0 may be a scalar (isotropic) or an n x n matrix; the
    regularizer uses its inverse. Diagnostic/oracle use only.
    """
    theta = list(theta)
    n = len(theta)
    theta0 = list(theta0)
    if isinstance(p0, (int, float)):
        p0_mat = [[float(p0) if i == j else 0.0 for j in range(n)]
                  for i in range(n)]
    else:
        p0_mat = [list(row) for row in p0]
    p0_inv = _mat_inv(p0_mat)
    diff = [a - b for a, b in zip(theta, theta0)]
    cost = sum(diff[i] * sum(p0_inv[i][j] * diff[j] for j in range(n))
               for i in range(n))
    for z, phi, u_prev in history:
        zhat = z + sigma * (
            sum(phi[i] * theta[i] for i in range(n)) - u_prev)
        cost += zhat * zhat
    return cost
