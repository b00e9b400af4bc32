"""Bar-heating benchmark: Dirichlet heat equation on (0, 10) with three
actuator patches and three point sensors.

The steady-state map C A^{-1} B has a closed form through the Dirichlet
Green's function G(x, xi) = -x (10 - xi) / 10 for x <= xi (symmetric
otherwise); the discretized operators reproduce it under grid refinement.
All operator norms are taken in the L2-weighted sense (grid weight h), so
reported values are resolution-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu, spsolve

from .errors import ConfigError, NumericalFailure
from .pde_sim import Trajectory

LENGTH = 10.0
ACTUATOR_INTERVALS = ((1.5, 2.5), (4.5, 5.5), (6.5, 7.5))
SENSOR_POINTS = (3.0, 6.0, 8.0)
Y_REF = np.array([1.0, 3.0, 2.0])
MU_HEAT = np.pi**2 / 50.0
# Column bound |B u| <= sqrt(m) |u| for unit-norm indicator columns.
B_NORM_BOUND = np.sqrt(3.0)


@dataclass(frozen=True)
class HeatProblem:
    """Finite-difference discretization with N intervals (N % 10 == 0)."""

    N: int
    A: sparse.csc_matrix = field(repr=False)
    B: np.ndarray = field(repr=False)      # (N-1, 3) cell-averaged indicators
    sensor_idx: np.ndarray
    y_ref: np.ndarray

    @classmethod
    def build(cls, N: int = 2000) -> "HeatProblem":
        if N % 10 != 0 or N < 20:
            raise ConfigError("N must be a multiple of 10 (sensors sit on grid nodes)")
        h = LENGTH / N
        inner = N - 1
        main = np.full(inner, -2.0 / h**2)
        off = np.full(inner - 1, 1.0 / h**2)
        A = sparse.diags([off, main, off], offsets=(-1, 0, 1), format="csc")
        s = h * np.arange(1, N)
        B = np.zeros((inner, 3))
        for j, (a, b) in enumerate(ACTUATOR_INTERVALS):
            lo = np.maximum(s - h / 2.0, a)
            hi = np.minimum(s + h / 2.0, b)
            B[:, j] = np.clip(hi - lo, 0.0, None) / h
        sensor_idx = np.array([int(round(x / h)) - 1 for x in SENSOR_POINTS])
        return cls(N=N, A=A, B=B, sensor_idx=sensor_idx, y_ref=Y_REF.copy())

    @property
    def h(self) -> float:
        return LENGTH / self.N

    @property
    def s(self) -> np.ndarray:
        """Interior node coordinates."""
        return self.h * np.arange(1, self.N)

    def output(self, phi: np.ndarray) -> np.ndarray:
        return phi[self.sensor_idx]

    @cached_property
    def cainv_rows(self) -> np.ndarray:
        """Rows of C A^{-1} on the interior grid (three sparse solves)."""
        rhs = np.zeros((self.N - 1, 3))
        rhs[self.sensor_idx, np.arange(3)] = 1.0
        return splu(self.A.T.tocsc()).solve(rhs).T


def _green_interval_integral(x: float, a: float, b: float) -> float:
    """Integral over [a, b] of the Dirichlet Green's function xi -> G(x, xi)."""
    total = 0.0
    lo, hi = a, min(b, x)
    if hi > lo:  # xi <= x: G = -xi (10 - x) / 10
        total += -(LENGTH - x) / LENGTH * (hi**2 - lo**2) / 2.0
    lo, hi = max(a, x), b
    if hi > lo:  # xi >= x: G = -x (10 - xi) / 10
        total += -x / LENGTH * ((LENGTH * hi - hi**2 / 2.0) - (LENGTH * lo - lo**2 / 2.0))
    return total


def exact_CAinvB() -> np.ndarray:
    """Closed-form C A^{-1} B by integrating the Green's function."""
    out = np.empty((3, 3))
    for i, x in enumerate(SENSOR_POINTS):
        for j, (a, b) in enumerate(ACTUATOR_INTERVALS):
            out[i, j] = _green_interval_integral(x, a, b)
    return out


def discrete_CAinvB(problem: HeatProblem) -> np.ndarray:
    return problem.output(splu(problem.A).solve(problem.B))


def cainv_apply(problem: HeatProblem, phi: np.ndarray) -> np.ndarray:
    """The three closed-form integrals of C A^{-1} applied to a grid function.

    Kernel of row i: coef_i (s - 10) + (x_i - s) 1_{s <= x_i} with
    coef = (3/10, 3/5, 4/5) and x = (3, 6, 8); evaluated by trapezoid over
    [0, 10] with the Dirichlet zeros padded at both ends.
    """
    phi = np.asarray(phi, dtype=float).reshape(-1)
    if phi.size != problem.N - 1:
        raise ValueError(f"phi must have {problem.N - 1} interior samples")
    s_full = problem.h * np.arange(0, problem.N + 1)
    phi_full = np.concatenate([[0.0], phi, [0.0]])
    coefs = (0.3, 0.6, 0.8)
    out = np.empty(3)
    for i, (coef, x) in enumerate(zip(coefs, SENSOR_POINTS)):
        kernel = coef * (s_full - LENGTH) + np.where(s_full <= x, x - s_full, 0.0)
        out[i] = np.trapezoid(kernel * phi_full, s_full)
    return out


def cainv_norm(problem: HeatProblem, iterations: int = 200) -> float:
    """Operator norm of C A^{-1} from L2(0, 10) to R^3 by power iteration."""
    rows = problem.cainv_rows
    gram = (rows @ rows.T) / problem.h
    v = np.ones(3) / np.sqrt(3.0)
    lam = 0.0
    for _ in range(iterations):
        w = gram @ v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return float(np.sqrt(lam))


@dataclass(frozen=True)
class HeatGain:
    """Integral gain data for the bar benchmark at one resolution."""

    Ki: np.ndarray
    ki_star: float
    mu: float
    ki_norm: float
    cainv_norm: float
    b_bound: float
    bki_norm: float          # sharp L2-weighted norm of B Ki
    ki_star_sharp: float     # gain bound with the sharp |B Ki| instead of the product bound


def heat_gain(problem: HeatProblem) -> HeatGain:
    """Ki = (C A^{-1} B)^{-1} and the certified gain bound.

    ki_star follows the product bound |B Ki| <= |B| |Ki| <= sqrt(3) |Ki|;
    the sharp alternative (the actuator supports are disjoint, so |B| = 1
    in the L2-weighted sense) is reported alongside.
    """
    Ki = np.linalg.inv(discrete_CAinvB(problem))
    ki_norm = float(np.linalg.norm(Ki, 2))
    m_norm = cainv_norm(problem)
    bki_norm = float(np.sqrt(problem.h) * np.linalg.norm(problem.B @ Ki, 2))
    ki_star = float(MU_HEAT / (2.0 * B_NORM_BOUND * ki_norm * m_norm))
    ki_star_sharp = float(MU_HEAT / (2.0 * bki_norm * m_norm))
    return HeatGain(Ki=Ki, ki_star=ki_star, mu=MU_HEAT, ki_norm=ki_norm,
                    cainv_norm=m_norm, b_bound=float(B_NORM_BOUND),
                    bki_norm=bki_norm, ki_star_sharp=ki_star_sharp)


def heat_steady_state(problem: HeatProblem, ki: float, Ki: np.ndarray,
                      w: Optional[np.ndarray] = None):
    """Exact steady state of the discrete closed loop (direct linear solve).

    With ki = 0 the integrator is disconnected; the open-loop rest state
    -A^{-1} w is returned with z fixed at zero.
    """
    inner = problem.N - 1
    w_vec = np.zeros(inner) if w is None else np.asarray(w, dtype=float).reshape(inner)
    if ki == 0.0:
        return splu(problem.A).solve(-w_vec), np.zeros(3)
    C = sparse.csr_matrix(
        (np.ones(3), (np.arange(3), problem.sensor_idx)), shape=(3, inner))
    top = sparse.hstack([problem.A, sparse.csr_matrix(ki * (problem.B @ Ki))])
    bottom = sparse.hstack([C, sparse.csr_matrix((3, 3))])
    lhs = sparse.vstack([top, bottom]).tocsc()
    rhs = np.concatenate([-w_vec, problem.y_ref])
    sol = spsolve(lhs, rhs)
    return sol[:inner], sol[inner:]


def simulate_heat(problem: HeatProblem, ki: float, T: float, dt: float,
                  w: Optional[np.ndarray] = None,
                  phi0: Optional[np.ndarray] = None,
                  z0: Optional[np.ndarray] = None,
                  record_every: int = 10,
                  gain: Optional[HeatGain] = None) -> Trajectory:
    """Closed-loop run: implicit Euler for the diffusion, explicit integrator.

    The Laplacian is stiff, so the phi-step solves (I - dt A) phi+ = phi +
    dt (B u + w) with a factorization reused across steps; dt only limits
    accuracy, not stability.  V = |phi - phi_inf|^2 and the forwarding
    functional use the weighted discrete inner product and the shifted
    state, with P = I.
    """
    if dt <= 0 or T <= 0:
        raise ConfigError("need positive dt and T")
    gain = heat_gain(problem) if gain is None else gain
    Ki = gain.Ki
    inner = problem.N - 1
    h = problem.h
    w_vec = np.zeros(inner) if w is None else np.asarray(w, dtype=float).reshape(inner)

    phi = np.zeros(inner) if phi0 is None else np.array(phi0, dtype=float).reshape(inner)
    z = np.zeros(3) if z0 is None else np.array(z0, dtype=float).reshape(3)

    steps = max(1, int(round(T / dt)))
    dt = T / steps
    stepper = splu(sparse.identity(inner, format="csc") - dt * problem.A)

    # Forwarding monitor built from the honest weighted norms.
    M_rows = problem.cainv_rows
    m_norm = gain.cainv_norm
    alpha = gain.bki_norm**2
    p = float(np.sqrt(alpha) / m_norm)
    phi_inf, z_inf = heat_steady_state(problem, ki, Ki, w=w_vec)

    def monitor(state, zval):
        shifted = state - phi_inf
        V = h * float(shifted @ shifted)
        res = (zval - z_inf) - (M_rows @ shifted)
        return V, V + p * float(res @ res)

    frames_t, frames_z, frames_y, frames_V, frames_Ve, frames_norm = [], [], [], [], [], []

    def record(t, state, zval):
        y = problem.output(state)
        V, Ve = monitor(state, zval)
        frames_t.append(t)
        frames_z.append(zval.copy())
        frames_y.append(y.copy())
        frames_V.append(V)
        frames_Ve.append(Ve)
        frames_norm.append(float(np.sqrt(h) * np.linalg.norm(state - phi_inf)))

    record(0.0, phi, z)
    for k in range(steps):
        y = problem.output(phi)
        u = ki * (Ki @ z)
        z = z + dt * (y - problem.y_ref)
        phi = stepper.solve(phi + dt * (problem.B @ u + w_vec))
        if (k + 1) % record_every == 0 or k + 1 == steps:
            record((k + 1) * dt, phi, z)

    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(z))):
        raise NumericalFailure("heat simulation produced non-finite state")

    return Trajectory(
        times=np.array(frames_t),
        z=np.array(frames_z),
        outputs=np.array(frames_y),
        norm_phi=np.array(frames_norm),
        V=np.array(frames_V),
        Ve=np.array(frames_Ve),
        states=None,
        metadata={
            "scheme": "implicit-euler", "dt": dt, "steps": steps, "N": problem.N,
            "ki": ki, "gain_warning": not (0.0 < ki < gain.ki_star),
        },
    )
