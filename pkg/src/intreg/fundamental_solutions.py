"""Fundamental matrix solutions of the two spatial ODEs.

Phi solves Phi_s = Lambda0(s)^{-1} Lambda1(s) Phi with Phi(0) = I and maps
boundary data to steady-state profiles.  Psi solves
Psi_s = Psi (Lambda1(s) - Lambda0'(s)) Lambda0(s)^{-1} with Psi(0) = I and
drives the forwarding cancellation; its sup norm over the grid enters the
gain bound.

Both are integrated with the classical fourth-order one-step scheme at a
fixed step 1/steps; the right-hand sides are smooth and low-dimensional, so
adaptive machinery would buy nothing and would cost determinism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoefficientError
from .model_core import HyperbolicSystem, _coeffs_at, lambda0_inverse_diag

DEFAULT_STEPS = 1000


@dataclass(frozen=True)
class FundamentalSolution:
    """Grid samples of a fundamental matrix solution on [0, 1]."""

    s_values: np.ndarray          # (steps + 1,)
    samples: np.ndarray           # (steps + 1, n, n)
    kind: str                     # "phi" or "psi"

    @property
    def at_one(self) -> np.ndarray:
        return self.samples[-1]

    @property
    def sup_norm(self) -> float:
        """Max spectral norm over the sample grid (the bound used for Psi)."""
        return float(max(np.linalg.norm(M, 2) for M in self.samples))

    def at(self, s) -> np.ndarray:
        """Entrywise linear interpolation between recorded samples."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        last = len(self.s_values) - 1
        idx = np.clip(np.searchsorted(self.s_values, s, side="right") - 1, 0, last - 1)
        t = (s - self.s_values[idx]) / (self.s_values[idx + 1] - self.s_values[idx])
        out = (1 - t)[:, None, None] * self.samples[idx] + t[:, None, None] * self.samples[idx + 1]
        return out if out.shape[0] > 1 else out[0]


def _rk4_matrix(rhs, y0, s0, s1, steps):
    """Classical RK4 for a matrix ODE; records every step."""
    h = (s1 - s0) / steps
    n = y0.shape[0]
    out = np.empty((steps + 1, n, n))
    out[0] = y0
    y = y0.copy()
    s_values = s0 + h * np.arange(steps + 1)
    for k in range(steps):
        s = s_values[k]
        k1 = rhs(s, y)
        k2 = rhs(s + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(s + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = y
    return s_values, out


def _check_nonsingular(samples, kind):
    # Fundamental solutions are nonsingular; flag numerical degeneration.
    scale = max(1.0, float(np.max(np.abs(samples))))
    n = samples.shape[1]
    dets = np.linalg.det(samples)
    if np.any(np.abs(dets) <= 1e-12 * scale**n):
        bad = int(np.argmin(np.abs(dets)))
        raise CoefficientError(
            f"{kind} sample {bad} is numerically singular (det={dets[bad]:.3e})"
        )


def integrate_phi(system: HyperbolicSystem, steps: int = DEFAULT_STEPS,
                  s_start: float = 0.0, s_end: float = 1.0,
                  initial: np.ndarray | None = None) -> FundamentalSolution:
    """Integrate Phi_s = Lambda0^{-1} Lambda1 Phi from Phi(s_start) = initial."""
    if steps < 10:
        raise ValueError("steps must be at least 10")
    y0 = np.eye(system.n) if initial is None else np.asarray(initial, dtype=float)

    def rhs(s, X):
        inv0 = lambda0_inverse_diag(system, s)
        _, lam1, _ = _coeffs_at(system, s)
        return (inv0[:, None] * lam1) @ X

    s_values, samples = _rk4_matrix(rhs, y0, s_start, s_end, steps)
    if initial is None:
        samples[0] = np.eye(system.n)  # stored exactly, not integrated
    _check_nonsingular(samples, "Phi")
    return FundamentalSolution(s_values=s_values, samples=samples, kind="phi")


def integrate_psi(system: HyperbolicSystem, steps: int = DEFAULT_STEPS,
                  s_start: float = 0.0, s_end: float = 1.0,
                  initial: np.ndarray | None = None) -> FundamentalSolution:
    """Integrate Psi_s = Psi (Lambda1 - Lambda0') Lambda0^{-1} (row propagation)."""
    if steps < 10:
        raise ValueError("steps must be at least 10")
    y0 = np.eye(system.n) if initial is None else np.asarray(initial, dtype=float)

    def rhs(s, X):
        inv0 = lambda0_inverse_diag(system, s)
        _, lam1, dlam0 = _coeffs_at(system, s)
        core = (lam1 - np.diag(dlam0)) * inv0[None, :]
        return X @ core

    s_values, samples = _rk4_matrix(rhs, y0, s_start, s_end, steps)
    if initial is None:
        samples[0] = np.eye(system.n)
    _check_nonsingular(samples, "Psi")
    return FundamentalSolution(s_values=s_values, samples=samples, kind="psi")


def split_blocks(system: HyperbolicSystem, phi_at_one: np.ndarray):
    """Block splits of Phi(1) and K induced by the speed sign pattern.

    Phi_+(1) = [[Phi11, Phi12], [0, I]],  Phi_-(1) = [[I, 0], [Phi21, Phi22]],
    K_+ = [[I, 0], [K21, K22]],           K_- = [[K11, K12], [0, I]].
    """
    n, l = system.n, system.ell
    P = np.asarray(phi_at_one, dtype=float)
    if P.shape != (n, n):
        raise ValueError(f"phi_at_one must be {n}x{n}")
    phi_plus = np.eye(n)
    phi_plus[:l, :] = P[:l, :]
    phi_plus[l:, :l] = 0.0
    phi_minus = np.eye(n)
    phi_minus[l:, :] = P[l:, :]
    phi_minus[:l, l:] = 0.0

    K11, K12, K21, K22 = system.k_blocks()
    k_plus = np.eye(n)
    k_plus[l:, :l] = K21
    k_plus[l:, l:] = K22
    k_minus = np.eye(n)
    k_minus[:l, :l] = K11
    k_minus[:l, l:] = K12
    return phi_plus, phi_minus, k_plus, k_minus
