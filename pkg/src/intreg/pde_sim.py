"""Closed-loop simulation of the hyperbolic system with integral action.

The scheme is first-order upwind in space and explicit first-order in time.
Characteristics with positive speed take their boundary value at s = 0 and
negative ones at s = 1, matching the block structure of the boundary
relation; the boundary assignment uses the incoming traces from the
previous time level, which keeps every update explicit and causal.

The Lyapunov monitor evaluates V and the forwarding functional
V_e = V + p |z - (M Psi phi integral)|^2 on the state shifted by the
closed-loop equilibrium.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, NumericalFailure
from .fundamental_solutions import integrate_phi, integrate_psi, split_blocks
from .gain_design import GainCertificate, compute_T1
from .model_core import (DisturbanceScenario, HyperbolicSystem,
                         LyapunovWeight, max_speed, validate_hyperbolic)


@dataclass(frozen=True)
class Equilibrium:
    """Closed-loop steady state (phi_inf, z_inf) with the input it needs."""

    s_grid: np.ndarray
    phi_inf: np.ndarray      # (n, nodes)
    z_inf: np.ndarray
    u_inf: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Recorded frames of a simulation run.

    `states` holds the state shifted by the attached equilibrium (the raw
    profile is states + equilibrium.phi_inf); z and outputs are raw.
    """

    times: np.ndarray
    z: np.ndarray            # (frames, m)
    outputs: np.ndarray      # (frames, m)
    norm_phi: np.ndarray     # L2 norm of the (shifted) profile per frame
    V: np.ndarray
    Ve: np.ndarray
    states: Optional[np.ndarray] = None      # (frames, n, nodes), shifted
    s_grid: Optional[np.ndarray] = None
    equilibrium: Optional[Equilibrium] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        F = len(self.times)
        for name in ("z", "outputs", "norm_phi", "V", "Ve"):
            if len(getattr(self, name)) != F:
                raise ValueError(f"{name} has {len(getattr(self, name))} frames, expected {F}")
        if self.states is not None and len(self.states) != F:
            raise ValueError("states frame count mismatch")
        if F > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        cfl = self.metadata.get("cfl")
        if cfl is not None and cfl > 1.0 + 1e-12:
            raise ValueError(f"CFL number {cfl} exceeds 1")


# ---------------------------------------------------------------------------
# Equilibrium (steady state of the closed loop)
# ---------------------------------------------------------------------------

def compute_equilibrium(system: HyperbolicSystem, cert, scenario: DisturbanceScenario,
                        n_nodes: int = 201) -> Equilibrium:
    """Unique closed-loop equilibrium for a scenario.

    `cert` only needs attributes ki and Ki (a GainCertificate or GainChoice).
    The steady profile solves phi' = Lambda0^{-1} Lambda1 phi, so
    phi_inf(s) = Phi(s) phi_inf(0); the pair (z_inf, phi_inf(0)) comes from
    the boundary relation and the zero-integrator condition y = y_ref.
    """
    ki = float(cert.ki)
    if ki <= 0:
        raise ValueError("equilibrium requires a positive integral gain ki")
    Ki = np.atleast_2d(np.asarray(cert.Ki, dtype=float))
    errs = scenario.check(system)
    if errs:
        raise ValueError("scenario inconsistent with system: " + "; ".join(errs))

    phi = integrate_phi(system, steps=max(n_nodes - 1, 10))
    phi_plus, phi_minus, _, _ = split_blocks(system, phi.at_one)
    inner = phi_minus - system.K @ phi_plus
    out_map = system.L1 @ phi_minus + system.L2 @ phi_plus
    t1 = compute_T1(system, phi_plus, phi_minus)

    rhs = (scenario.y_ref - scenario.w_y) - out_map @ np.linalg.solve(inner, scenario.w_b)
    z_inf = np.linalg.solve(Ki, np.linalg.solve(t1, rhs)) / ki
    u_inf = ki * (Ki @ z_inf)
    phi0 = np.linalg.solve(inner, system.B @ u_inf + scenario.w_b)
    profiles = np.einsum("jab,b->aj", phi.samples, phi0)
    return Equilibrium(s_grid=phi.s_values.copy(), phi_inf=profiles,
                       z_inf=z_inf, u_inf=u_inf)


def equilibrium_residuals(system: HyperbolicSystem, eq: Equilibrium,
                          scenario: DisturbanceScenario):
    """(boundary, output) residual magnitudes of an equilibrium candidate."""
    l = system.ell
    left = eq.phi_inf[:, 0]
    right = eq.phi_inf[:, -1]
    incoming = np.concatenate([left[:l], right[l:]])     # phi_+(0), phi_-(1)
    outgoing = np.concatenate([right[:l], left[l:]])     # phi_+(1), phi_-(0)
    bc = incoming - (system.K @ outgoing + system.B @ eq.u_inf + scenario.w_b)
    y = system.L1 @ incoming + system.L2 @ outgoing + scenario.w_y
    return float(np.max(np.abs(bc))), float(np.max(np.abs(y - scenario.y_ref)))


# ---------------------------------------------------------------------------
# Lyapunov functionals
# ---------------------------------------------------------------------------

def evaluate_V(weight: LyapunovWeight, phi: np.ndarray, s_grid: np.ndarray) -> float:
    """Trapezoidal quadrature of the weighted square integral phi' P(s) phi."""
    Pd = weight.diag_at(s_grid)                      # (nodes, n)
    integrand = np.einsum("ji,ij->j", Pd, phi**2)
    return float(np.trapezoid(integrand, s_grid))


def forwarding_kernel(m_matrix: np.ndarray, psi_samples: np.ndarray) -> np.ndarray:
    """Quadrature weights M Psi(s) of the forwarding operator, per node."""
    return np.einsum("ma,jab->jmb", np.atleast_2d(m_matrix), psi_samples)


def apply_forwarding(kernel: np.ndarray, phi: np.ndarray, s_grid: np.ndarray) -> np.ndarray:
    """Integral of M Psi(s) phi(s) ds by trapezoid; kernel is (nodes, m, n)."""
    kernel = np.asarray(kernel, dtype=float)
    if kernel.ndim == 2:
        kernel = np.broadcast_to(kernel, (len(s_grid),) + kernel.shape)
    values = np.einsum("jmb,bj->jm", kernel, phi)
    return np.trapezoid(values, s_grid, axis=0)


def evaluate_Ve(weight: LyapunovWeight, kernel: np.ndarray, p: float,
                phi: np.ndarray, z: np.ndarray, s_grid: np.ndarray) -> float:
    """V(phi) + p |z - integral of (M Psi phi)|^2."""
    residual = np.asarray(z, dtype=float) - apply_forwarding(kernel, phi, s_grid)
    return evaluate_V(weight, phi, s_grid) + float(p) * float(residual @ residual)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def _interp_coefficients(system, s_grid):
    lam = np.empty((system.n, len(s_grid)))
    for i in range(system.n):
        lam[i] = np.interp(s_grid, system.s_grid, system.lambda0_samples[:, i])
    lam1 = np.empty((len(s_grid), system.n, system.n))
    for a in range(system.n):
        for b in range(system.n):
            lam1[:, a, b] = np.interp(s_grid, system.s_grid, system.lambda1_samples[:, a, b])
    return lam, lam1


def simulate(system: HyperbolicSystem, cert: GainCertificate,
             scenario: DisturbanceScenario, T: float,
             phi0: Optional[np.ndarray] = None, z0: Optional[np.ndarray] = None,
             cfl: float = 0.9, n_cells: int = 200, record_every: int = 10,
             store_states: bool = True) -> Trajectory:
    """Closed-loop upwind simulation with the Lyapunov monitor attached.

    The time step is dt = cfl * h / max|lambda| (then rounded down so the
    horizon is hit exactly).  V and V_e are evaluated on the state shifted
    by the computed equilibrium at every recorded frame.
    """
    violations = validate_hyperbolic(system)
    if violations:
        raise ConfigError("invalid system: " + "; ".join(violations))
    if scenario.w_dist is not None:
        raise ConfigError("distributed disturbances are not part of the boundary-driven model")
    if not (0.0 < cfl <= 1.0):
        raise ConfigError(f"cfl must lie in (0, 1], got {cfl}")
    if n_cells < 2 or T <= 0:
        raise ConfigError("need n_cells >= 2 and T > 0")

    n, l, m = system.n, system.ell, system.m
    nodes = n_cells + 1
    s_grid = np.linspace(0.0, 1.0, nodes)
    h = 1.0 / n_cells
    speed = max_speed(system)
    dt = cfl * h / speed
    steps = max(1, int(np.ceil(T / dt)))
    dt = T / steps
    actual_cfl = dt * speed / h

    lam, lam1 = _interp_coefficients(system, s_grid)
    lam1_active = bool(np.any(lam1))

    ki = float(cert.ki)
    Ki = np.atleast_2d(np.asarray(cert.Ki, dtype=float))
    eq = compute_equilibrium(system, cert, scenario, n_nodes=nodes)

    weight = cert.iss.weight
    psi = integrate_psi(system, steps=n_cells)
    kernel = forwarding_kernel(cert.rank_report.m_matrix, psi.samples)
    p = float(cert.p)

    phi = np.zeros((n, nodes)) if phi0 is None else np.array(phi0, dtype=float)
    if phi.shape != (n, nodes):
        raise ConfigError(f"phi0 must have shape {(n, nodes)}")
    z = np.zeros(m) if z0 is None else np.array(z0, dtype=float).reshape(m)

    def output_of(state):
        incoming = np.concatenate([state[:l, 0], state[l:, -1]])
        outgoing = np.concatenate([state[:l, -1], state[l:, 0]])
        return system.L1 @ incoming + system.L2 @ outgoing + scenario.w_y, outgoing

    frames_t, frames_z, frames_y, frames_V, frames_Ve, frames_norm = [], [], [], [], [], []
    frames_state = [] if store_states else None

    def record(t, state, zval, yval):
        shifted = state - eq.phi_inf
        z_shift = zval - eq.z_inf
        frames_t.append(t)
        frames_z.append(zval.copy())
        frames_y.append(yval.copy())
        frames_V.append(evaluate_V(weight, shifted, s_grid))
        frames_Ve.append(evaluate_Ve(weight, kernel, p, shifted, z_shift, s_grid))
        frames_norm.append(float(np.sqrt(np.trapezoid(np.sum(shifted**2, axis=0), s_grid))))
        if store_states:
            frames_state.append(shifted.copy())

    y, _ = output_of(phi)
    record(0.0, phi, z, y)

    for k in range(steps):
        y, outgoing = output_of(phi)
        z = z + dt * (y - scenario.y_ref)

        adv = np.zeros_like(phi)
        for i in range(n):
            diff = (phi[i, 1:] - phi[i, :-1]) / h
            if i < l:
                adv[i, 1:] = lam[i, 1:] * diff
            else:
                adv[i, :-1] = lam[i, :-1] * diff
        rhs = adv
        if lam1_active:
            rhs = rhs + np.einsum("jab,bj->aj", lam1, phi)
        new = phi - dt * rhs

        u = ki * (Ki @ z)
        bc = system.K @ outgoing + system.B @ u + scenario.w_b
        new[:l, 0] = bc[:l]
        new[l:, -1] = bc[l:]
        phi = new

        t = (k + 1) * dt
        if (k + 1) % record_every == 0 or k + 1 == steps:
            yk, _ = output_of(phi)
            record(t, phi, z, yk)

    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(z))):
        raise NumericalFailure("simulation produced non-finite state")

    return Trajectory(
        times=np.array(frames_t),
        z=np.array(frames_z),
        outputs=np.array(frames_y),
        norm_phi=np.array(frames_norm),
        V=np.array(frames_V),
        Ve=np.array(frames_Ve),
        states=np.array(frames_state) if store_states else None,
        s_grid=s_grid,
        equilibrium=eq,
        metadata={
            "cfl": actual_cfl, "dt": dt, "h": h, "steps": steps,
            "scheme": "upwind-explicit", "ki": ki,
            "gain_warning": not (0.0 < ki < cert.ki_star),
        },
    )


def simulate_open_loop(system: HyperbolicSystem, u_const: np.ndarray,
                       weight: LyapunovWeight, T: float,
                       phi0: Optional[np.ndarray] = None, cfl: float = 0.9,
                       n_cells: int = 200, record_every: int = 10) -> Trajectory:
    """Open-loop run with a frozen input; V is monitored on the raw state.

    Used to check the ISS dissipation V' <= -mu V + c |u|^2 numerically.
    """
    violations = validate_hyperbolic(system)
    if violations:
        raise ConfigError("invalid system: " + "; ".join(violations))
    if not (0.0 < cfl <= 1.0):
        raise ConfigError(f"cfl must lie in (0, 1], got {cfl}")

    n, l, m = system.n, system.ell, system.m
    nodes = n_cells + 1
    s_grid = np.linspace(0.0, 1.0, nodes)
    h = 1.0 / n_cells
    speed = max_speed(system)
    dt = cfl * h / speed
    steps = max(1, int(np.ceil(T / dt)))
    dt = T / steps

    lam, lam1 = _interp_coefficients(system, s_grid)
    lam1_active = bool(np.any(lam1))
    u = np.asarray(u_const, dtype=float).reshape(m)

    phi = np.zeros((n, nodes)) if phi0 is None else np.array(phi0, dtype=float)
    frames_t, frames_V, frames_norm = [0.0], [evaluate_V(weight, phi, s_grid)], [
        float(np.sqrt(np.trapezoid(np.sum(phi**2, axis=0), s_grid)))]

    for k in range(steps):
        outgoing = np.concatenate([phi[:l, -1], phi[l:, 0]])
        adv = np.zeros_like(phi)
        for i in range(n):
            diff = (phi[i, 1:] - phi[i, :-1]) / h
            if i < l:
                adv[i, 1:] = lam[i, 1:] * diff
            else:
                adv[i, :-1] = lam[i, :-1] * diff
        rhs = adv
        if lam1_active:
            rhs = rhs + np.einsum("jab,bj->aj", lam1, phi)
        new = phi - dt * rhs
        bc = system.K @ outgoing + system.B @ u
        new[:l, 0] = bc[:l]
        new[l:, -1] = bc[l:]
        phi = new
        if (k + 1) % record_every == 0 or k + 1 == steps:
            frames_t.append((k + 1) * dt)
            frames_V.append(evaluate_V(weight, phi, s_grid))
            frames_norm.append(float(np.sqrt(np.trapezoid(np.sum(phi**2, axis=0), s_grid))))

    if not np.all(np.isfinite(phi)):
        raise NumericalFailure("open-loop simulation produced non-finite state")

    F = len(frames_t)
    zeros = np.zeros((F, m))
    return Trajectory(
        times=np.array(frames_t), z=zeros, outputs=zeros,
        norm_phi=np.array(frames_norm), V=np.array(frames_V),
        Ve=np.array(frames_V), states=None, s_grid=s_grid,
        metadata={"cfl": dt * speed / h, "dt": dt, "h": h, "steps": steps,
                  "scheme": "upwind-explicit", "u_const": u.tolist()},
    )
