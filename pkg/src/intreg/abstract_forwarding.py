"""Forwarding-based integral control for finite-dimensional (A, B, C) triples.

Given a Hurwitz A with Lyapunov matrix P (A'P + PA <= -mu I, the |phi|^2
convention), the construction takes M = C A^{-1}, Ki = (C A^{-1} B)^{-1}
and augments the quadratic form with a penalty p |z - M phi|^2 on the
integrator's deviation from the invariant manifold:

    Pe = [[P + p M'M, -p M'], [-p M, p I]],
    ki_star = mu / (2 |M| sqrt(alpha)),  alpha = |P B Ki|^2.

A^{-1} is never formed; every C A^{-1} product is a linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import RankConditionError, StabilityError
from .model_core import RANK_TOL

HURWITZ_MARGIN = 1e-12


@dataclass(frozen=True)
class ForwardingDesign:
    """Integral gain with its forwarding Lyapunov matrix and proof scalars."""

    P: np.ndarray
    mu: float
    M: np.ndarray
    Ki: np.ndarray
    alpha: float
    p: float
    ki: float
    ki_star: float
    mu_e: float
    Pe: np.ndarray
    a: float            # proof scalars behind mu_e, exposed for tracing
    b: float


@dataclass(frozen=True)
class Theorem2Report:
    lambda_max_sym: float
    lambda_min_Pe: float
    mu_prime: float
    passed: bool


def lyapunov_P(A: np.ndarray):
    """Solve A'P + PA = -I for a Hurwitz A; returns (P, mu) with mu = 1.

    mu is reported in the |phi|^2 convention (A'P + PA <= -mu I).  The
    weighted-form rate mu / lambda_max(P) is available via `mu_weighted`.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    eigs = np.linalg.eigvals(A)
    if np.max(eigs.real) >= -HURWITZ_MARGIN:
        raise StabilityError(
            f"A is not Hurwitz: max real part {np.max(eigs.real):.3e}"
        )
    P = sla.solve_continuous_lyapunov(A.T, -np.eye(A.shape[0]))
    P = 0.5 * (P + P.T)
    return P, 1.0


def mu_weighted(P: np.ndarray, mu: float = 1.0) -> float:
    """Convert the |phi|^2-form rate to the P-weighted form mu / lambda_max(P)."""
    return float(mu / np.max(np.linalg.eigvalsh(P)))


def _solve_CAinv(A, C):
    """M = C A^{-1} by solving A' M' = C'."""
    return np.linalg.solve(A.T, C.T).T


def _mu_e_balanced(mu, m_norm, alpha, p, ki):
    """Largest decay rate certified by the two proof inequalities.

    With b = 1/|M|^2 fixed, the phi-margin mu - ki/a - p ki |M|^2 grows in
    a while the z-margin ki (p - a alpha) shrinks; the best guaranteed rate
    sits where they balance, at the positive root of
    a^2 ki alpha + a (mu - ki p (|M|^2 + 1)) - ki = 0.
    """
    b = 1.0 / m_norm**2
    q = mu - ki * p * (m_norm**2 + 1.0)
    disc = q * q + 4.0 * ki**2 * alpha
    a = (-q + np.sqrt(disc)) / (2.0 * ki * alpha)
    mu_e = ki * (p - a * alpha)
    return float(mu_e), float(a), float(b)


def forwarding_design(A, B, C, P, mu, ki_fraction: float = 0.9) -> ForwardingDesign:
    """Build the forwarding design for (A, B, C) with Lyapunov data (P, mu).

    Requires C A^{-1} B invertible at the rank tolerance.  The optimal free
    parameters beta = 1/2, theta = 1 give the closed forms for p and
    ki_star; the recorded mu_e is evaluated at the operating gain
    ki = ki_fraction * ki_star.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    C = np.asarray(C, dtype=float)
    if C.ndim == 1:
        C = C.reshape(1, -1)
    P = np.atleast_2d(np.asarray(P, dtype=float))

    M = _solve_CAinv(A, C)
    CAinvB = M @ B
    cond = float(np.linalg.cond(CAinvB, 2))
    if not np.isfinite(cond) or cond >= RANK_TOL:
        raise RankConditionError("C A^{-1} B", cond)
    Ki = np.linalg.inv(CAinvB)

    m_norm = float(np.linalg.norm(M, 2))
    alpha = float(np.linalg.norm(P @ B @ Ki, 2)) ** 2
    ki_star = float(mu / (2.0 * m_norm * np.sqrt(alpha)))
    p = float(np.sqrt(alpha) / m_norm)
    ki = ki_fraction * ki_star
    mu_e, a, b = _mu_e_balanced(mu, m_norm, alpha, p, ki)

    m = Ki.shape[0]
    Pe = np.block([
        [P + p * M.T @ M, -p * M.T],
        [-p * M, p * np.eye(m)],
    ])
    return ForwardingDesign(P=P, mu=float(mu), M=M, Ki=Ki, alpha=alpha, p=p,
                            ki=ki, ki_star=ki_star, mu_e=mu_e, Pe=Pe, a=a, b=b)


def extended_operator(A, B, C, Ki, ki) -> np.ndarray:
    """The closed-loop matrix [[A, B Ki ki], [C, 0]] on the extended space."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    C = np.asarray(C, dtype=float)
    if C.ndim == 1:
        C = C.reshape(1, -1)
    m = B.shape[1]
    return np.block([
        [A, B @ Ki * ki],
        [C, np.zeros((m, m))],
    ])


def verify_theorem2(design: ForwardingDesign, A, B, ki, C=None) -> Theorem2Report:
    """Eigenvalue check of the extended dissipation inequality at gain ki.

    Passes iff Pe is positive definite and Ae' Pe + Pe Ae is negative
    definite with a margin relative to its own scale.
    """
    if C is None:
        C = design.M @ np.atleast_2d(np.asarray(A, dtype=float))
    Ae = extended_operator(A, B, C, design.Ki, ki)
    sym = Ae.T @ design.Pe + design.Pe @ Ae
    sym = 0.5 * (sym + sym.T)
    lam_max = float(np.max(np.linalg.eigvalsh(sym)))
    lam_min_pe = float(np.min(np.linalg.eigvalsh(design.Pe)))
    scale = max(1.0, float(np.linalg.norm(sym, 2)))
    mu_prime = -lam_max / scale
    passed = lam_max < -1e-12 * scale and lam_min_pe > 0.0
    return Theorem2Report(lambda_max_sym=lam_max, lambda_min_Pe=lam_min_pe,
                          mu_prime=mu_prime, passed=passed)


def corollary_gain(A, B, C, k_sg: float, nu_sg: float) -> float:
    """Explicit gain from semigroup constants: nu / (|C A^{-1}| k^2 |B (C A^{-1} B)^{-1}|)."""
    if k_sg <= 0 or nu_sg <= 0:
        raise ValueError("semigroup constants must be positive")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    C = np.asarray(C, dtype=float)
    if C.ndim == 1:
        C = C.reshape(1, -1)
    M = _solve_CAinv(A, C)
    CAinvB = M @ B
    cond = float(np.linalg.cond(CAinvB, 2))
    if not np.isfinite(cond) or cond >= RANK_TOL:
        raise RankConditionError("C A^{-1} B", cond)
    BKi = B @ np.linalg.inv(CAinvB)
    return float(nu_sg / (np.linalg.norm(M, 2) * k_sg**2 * np.linalg.norm(BKi, 2)))
