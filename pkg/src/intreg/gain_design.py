"""Integral-gain design for the hyperbolic boundary regulation problem.

The three design hypotheses are turned into executable checks:

* open-loop ISS via a diagonal exponential Lyapunov weight family,
* invertibility of the steady-state map T1,
* invertibility of the forwarding map T2 (with the kernel matrix M).

A successful design returns the integrator matrix Ki = T2^{-1}, the
certified gain interval (0, ki_star) with

    ki_star = sqrt(mu * P_lower) / (|M| * psi_bar * sqrt(c * |T2^{-1}|)),

the forwarding weight bound p_max, and a guaranteed closed-loop decay
rate mu_e, together with every intermediate quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product
from typing import Optional

import numpy as np

from .errors import CertificationError, RankConditionError
from .fundamental_solutions import (DEFAULT_STEPS, FundamentalSolution,
                                    integrate_phi, integrate_psi, split_blocks)
from .model_core import (RANK_TOL, HyperbolicSystem, LyapunovWeight,
                         validate_hyperbolic)


def spectral_norm(M) -> float:
    return float(np.linalg.norm(np.atleast_2d(M), 2))


def _cond(M) -> float:
    try:
        return float(np.linalg.cond(M, 2))
    except np.linalg.LinAlgError:
        return np.inf


# ---------------------------------------------------------------------------
# Rank conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankReport:
    """Both steady-state invertibility targets and the derived maps."""

    t1: np.ndarray
    t2: np.ndarray
    m_matrix: np.ndarray
    inner1: np.ndarray            # Phi_-(1) - K Phi_+(1)
    inner2: np.ndarray            # Psi(1) Lambda0(1) K_+ - Lambda0(0) K_-
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    cond_inner1: float
    cond_inner2: float
    cond_t1: float
    cond_t2: float
    passes_A3: bool
    passes_A4: bool


def compute_T1(system: HyperbolicSystem, phi_plus: np.ndarray, phi_minus: np.ndarray) -> np.ndarray:
    """T1 = (L1 Phi_-(1) + L2 Phi_+(1)) (Phi_-(1) - K Phi_+(1))^{-1} B."""
    inner = phi_minus - system.K @ phi_plus
    cond = _cond(inner)
    if cond >= RANK_TOL:
        raise RankConditionError("Phi_-(1) - K Phi_+(1)", cond)
    out_map = system.L1 @ phi_minus + system.L2 @ phi_plus
    return out_map @ np.linalg.solve(inner, system.B)


def compute_M_and_T2(system: HyperbolicSystem, psi_at_one: np.ndarray):
    """Kernel matrix M and forwarding map T2 from the boundary data.

    M  = (L1 K + L2) (Lambda0(0) K_- - Psi(1) Lambda0(1) K_+)^{-1}
    T2 = -L1 B + M (Lambda0(0) [B1; 0] - Psi(1) Lambda0(1) [0; B2])
    """
    n, l, m = system.n, system.ell, system.m
    _, _, k_plus, k_minus = split_blocks(system, np.eye(n))
    lam0_0 = np.diag(system.lambda0_samples[0])
    lam0_1 = np.diag(system.lambda0_samples[-1])
    G = lam0_0 @ k_minus - psi_at_one @ lam0_1 @ k_plus
    cond = _cond(G)
    if cond >= RANK_TOL:
        raise RankConditionError("Psi(1) Lambda0(1) K_+ - Lambda0(0) K_-", cond)
    M = np.linalg.solve(G.T, (system.L1 @ system.K + system.L2).T).T
    b_top = np.zeros((n, m))
    b_top[:l, :] = system.B1
    b_bot = np.zeros((n, m))
    b_bot[l:, :] = system.B2
    T2 = -system.L1 @ system.B + M @ (lam0_0 @ b_top - psi_at_one @ lam0_1 @ b_bot)
    return M, T2


def build_rank_report(system: HyperbolicSystem, phi: FundamentalSolution,
                      psi: FundamentalSolution) -> RankReport:
    phi_plus, phi_minus, k_plus, k_minus = split_blocks(system, phi.at_one)
    lam0_0 = np.diag(system.lambda0_samples[0])
    lam0_1 = np.diag(system.lambda0_samples[-1])
    inner1 = phi_minus - system.K @ phi_plus
    inner2 = psi.at_one @ lam0_1 @ k_plus - lam0_0 @ k_minus
    cond_inner1, cond_inner2 = _cond(inner1), _cond(inner2)

    t1 = t2 = m_matrix = None
    cond_t1 = cond_t2 = np.inf
    if cond_inner1 < RANK_TOL:
        t1 = compute_T1(system, phi_plus, phi_minus)
        cond_t1 = _cond(t1)
    if cond_inner2 < RANK_TOL:
        m_matrix, t2 = compute_M_and_T2(system, psi.at_one)
        cond_t2 = _cond(t2)

    z = np.full((system.m, system.n), np.nan)
    zm = np.full((system.m, system.m), np.nan)
    return RankReport(
        t1=zm if t1 is None else t1,
        t2=zm if t2 is None else t2,
        m_matrix=z if m_matrix is None else m_matrix,
        inner1=inner1,
        inner2=inner2,
        phi_plus=phi_plus,
        phi_minus=phi_minus,
        cond_inner1=cond_inner1,
        cond_inner2=cond_inner2,
        cond_t1=cond_t1,
        cond_t2=cond_t2,
        passes_A3=cond_inner1 < RANK_TOL and cond_t1 < RANK_TOL,
        passes_A4=cond_inner2 < RANK_TOL and cond_t2 < RANK_TOL,
    )


# ---------------------------------------------------------------------------
# Open-loop ISS certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSearchConfig:
    """Finite search grid over the exponential weight family.

    The family is P_i(s) = p_i * exp(-sign(lambda_i) * mu * s) with p_i > 0.
    The per-component scales are tried coordinate-wise around the seed
    p = 1 (full product grid for n <= 3).
    """

    mu_values: tuple = tuple(round(0.05 * k, 10) for k in range(1, 61))
    p_exponents: tuple = (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0)
    interior_tol: float = 1e-9
    boundary_margin: float = 1e-12


@dataclass(frozen=True)
class IssCertificate:
    """Certified open-loop dissipation V' <= -mu V + c |u|^2."""

    weight: LyapunovWeight
    c: float
    S: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    valid: bool


def _p_candidates(n, exponents):
    seed = np.ones(n)
    if n <= 3:
        grid = [np.array(v) for v in product(*([10.0 ** np.asarray(exponents)] * n))]
    else:
        grid = []
        for i in range(n):
            for e in exponents:
                p = np.ones(n)
                p[i] = 10.0 ** e
                grid.append(p)
    return [seed] + grid


def _weight_for(system, mu, p):
    signs = np.where(np.arange(system.n) < system.ell, 1.0, -1.0)
    s = system.s_grid
    samples = p[None, :] * np.exp(-signs[None, :] * mu * s[:, None])
    return samples, signs


def _interior_margin(system, mu, samples, signs):
    """Largest eigenvalue of (P Lambda0)' - P L1 - L1' P + mu P over the grid.

    Nonpositive (up to tolerance) means the interior inequality holds.
    P' is analytic within the family: P_i' = -sign_i * mu * P_i.
    """
    lam0 = system.lambda0_samples
    dlam0 = system.lambda0_derivative_samples
    lam1 = system.lambda1_samples
    P = samples
    dP = -signs[None, :] * mu * P
    diag_term = dP * lam0 + P * dlam0 + mu * P      # (G, n) diagonal part
    PL = P[:, :, None] * lam1                        # P(s) Lambda1(s)
    R = -PL - np.transpose(PL, (0, 2, 1))
    R[:, np.arange(system.n), np.arange(system.n)] += diag_term
    R = 0.5 * (R + np.transpose(R, (0, 2, 1)))
    return float(np.max(np.linalg.eigvalsh(R)))


def _boundary_matrices(system, samples, k_plus, k_minus):
    P0 = samples[0]
    P1 = samples[-1]
    lam0_0 = system.lambda0_samples[0]
    lam0_1 = system.lambda0_samples[-1]
    W0 = np.diag(P0 * lam0_0)
    W1 = np.diag(P1 * lam0_1)
    S = -(-k_plus.T @ W1 @ k_plus + k_minus.T @ W0 @ k_minus)
    S = 0.5 * (S + S.T)
    n, l, m = system.n, system.ell, system.m
    b_top = np.zeros((n, m))
    b_top[:l, :] = system.B1
    b_bot = np.zeros((n, m))
    b_bot[l:, :] = system.B2
    Q = -k_plus.T @ W1 @ b_bot + k_minus.T @ W0 @ b_top
    R = -b_bot.T @ W1 @ b_bot + b_top.T @ W0 @ b_top
    R = 0.5 * (R + R.T)
    return S, Q, R


def certify_iss(system: HyperbolicSystem,
                config: WeightSearchConfig = WeightSearchConfig()) -> IssCertificate:
    """Search the weight family for an open-loop ISS certificate.

    Returns the first feasible point in deterministic grid order: the mu
    grid is scanned outer, the p candidates inner (seed p = 1 first).  The
    ISS constant c is the smallest admissible one, c = max(0,
    lambda_max(R + Q' S^{-1} Q)), by Schur complement on the block matrix
    [[-S, Q], [Q', R - c I]].
    """
    violations = validate_hyperbolic(system)
    if violations:
        raise ValueError("invalid system: " + "; ".join(violations))
    _, _, k_plus, k_minus = split_blocks(system, np.eye(system.n))
    best_margin = -np.inf
    for mu in config.mu_values:
        for p in _p_candidates(system.n, config.p_exponents):
            samples, signs = _weight_for(system, mu, p)
            S, Q, R = _boundary_matrices(system, samples, k_plus, k_minus)
            s_margin = float(np.min(np.linalg.eigvalsh(S)))
            interior = _interior_margin(system, mu, samples, signs)
            margin = min(s_margin - config.boundary_margin, -interior + config.interior_tol)
            best_margin = max(best_margin, margin)
            if s_margin <= config.boundary_margin or interior > config.interior_tol:
                continue
            c = float(max(0.0, np.max(np.linalg.eigvalsh(
                R + Q.T @ np.linalg.solve(S, Q)))))
            weight = LyapunovWeight(
                samples=samples,
                s_grid=system.s_grid,
                mu=float(mu),
                P_lower=float(np.min(samples)),
                P_upper=float(np.max(samples)),
                S_margin=s_margin,
                param={"p": p.tolist(), "signs": signs.tolist()},
            )
            return IssCertificate(weight=weight, c=c, S=S, Q=Q, R=R, valid=True)
    raise CertificationError(
        f"no feasible Lyapunov weight in the family over {len(config.mu_values)} decay rates",
        best_margin=best_margin,
    )


# ---------------------------------------------------------------------------
# Gain design
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DesignOptions:
    steps: int = DEFAULT_STEPS
    mu: Optional[float] = None          # fix the certified decay rate; None sweeps
    ki_fraction: float = 0.9            # operating gain as a fraction of ki_star
    p_fraction: float = 0.9             # forwarding weight as a fraction of p_max
    search: WeightSearchConfig = field(default_factory=WeightSearchConfig)


@dataclass(frozen=True)
class GainCertificate:
    """Certified integral-action design for a hyperbolic system.

    ki_star is the closed-form bound sqrt(mu P_lower) / (|M| psi_bar
    sqrt(c |Ki|)).  ki_certifiable carries |Ki| to the first power outside
    the root, which is what the forwarding decay argument supports; the two
    coincide when |Ki| = 1 and the operating gain stays inside both.
    """

    Ki: np.ndarray
    ki: float
    ki_star: float
    ki_certifiable: float
    p: float
    p_max: float
    mu_e: float
    rank_report: RankReport
    iss: IssCertificate
    psi_bar: float
    m_norm: float

    @property
    def mu(self) -> float:
        return self.iss.weight.mu

    @property
    def c(self) -> float:
        return self.iss.c


def _ki_star_from(mu, P_lower, m_norm, psi_bar, c, ki_norm):
    if c <= 0.0 or m_norm <= 0.0 or psi_bar <= 0.0:
        return np.inf
    return float(np.sqrt(mu * P_lower) / (m_norm * psi_bar * np.sqrt(c * ki_norm)))


def _ki_certifiable_from(mu, P_lower, m_norm, psi_bar, c, ki_norm):
    if c <= 0.0 or m_norm <= 0.0 or psi_bar <= 0.0:
        return np.inf
    return float(np.sqrt(mu * P_lower) / (m_norm * psi_bar * ki_norm * np.sqrt(c)))


def _decay_rate(mu, P_lower, c, m_norm, psi_bar, ki_norm, ki, p):
    """Guaranteed exponential rate of V_e = V + p |z - M phi|^2.

    From V_e' <= -d1 V - d2 |z|^2 with d1 = mu - p ki |M|^2 psi_bar^2 /
    P_lower and d2 = p ki - c ki^2 |Ki|^2, bounding V_e <= (1 + 2 p |M|^2
    psi_bar^2 / P_lower) V + 2 p |z|^2 gives the rate below.
    """
    coupling = m_norm**2 * psi_bar**2
    d1 = mu - p * ki * coupling / P_lower
    d2 = p * ki - c * ki**2 * ki_norm**2
    if d1 <= 0.0 or d2 <= 0.0 or p <= 0.0:
        return 0.0
    return float(min(d1 / (1.0 + 2.0 * p * coupling / P_lower), d2 / (2.0 * p)))


def _design_components(system: HyperbolicSystem, options: DesignOptions):
    """Shared prelude of the design: ODE solutions, rank report, Ki."""
    violations = validate_hyperbolic(system)
    if violations:
        raise ValueError("invalid system: " + "; ".join(violations))
    phi = integrate_phi(system, steps=options.steps)
    psi = integrate_psi(system, steps=options.steps)
    report = build_rank_report(system, phi, psi)
    if not report.passes_A3:
        raise RankConditionError("Phi_-(1) - K Phi_+(1) or T1", max(report.cond_inner1, report.cond_t1))
    if not report.passes_A4:
        raise RankConditionError("forwarding target (eq. for M) or T2", max(report.cond_inner2, report.cond_t2))
    Ki = np.linalg.inv(report.t2)
    return report, Ki, spectral_norm(Ki), spectral_norm(report.m_matrix), psi.sup_norm


def _assemble_certificate(report, Ki, ki_norm, m_norm, psi_bar, iss, ki_star, options):
    ki_certifiable = _ki_certifiable_from(iss.weight.mu, iss.weight.P_lower,
                                          m_norm, psi_bar, iss.c, ki_norm)
    ki = options.ki_fraction * min(ki_star, ki_certifiable)
    p_max = iss.weight.mu * iss.weight.P_lower / (ki * m_norm**2 * psi_bar**2)
    p = options.p_fraction * p_max
    mu_e = _decay_rate(iss.weight.mu, iss.weight.P_lower, iss.c,
                       m_norm, psi_bar, ki_norm, ki, p)
    return GainCertificate(
        Ki=Ki, ki=ki, ki_star=ki_star, ki_certifiable=ki_certifiable,
        p=p, p_max=p_max, mu_e=mu_e,
        rank_report=report, iss=iss, psi_bar=psi_bar, m_norm=m_norm,
    )


def design_sweep(system: HyperbolicSystem, options: DesignOptions = DesignOptions()):
    """ki_star as a function of the certified decay rate, plus the best design.

    Returns (table, cert) where table is a list of (mu, ki_star) over the
    feasible grid points and cert maximizes ki_star (first maximizer in
    grid order).
    """
    report, Ki, ki_norm, m_norm, psi_bar = _design_components(system, options)
    table = []
    best_iss, best_star = None, -np.inf
    best_margin = None
    for mu in options.search.mu_values:
        try:
            cand = certify_iss(system, replace(options.search, mu_values=(mu,)))
        except CertificationError as exc:
            if best_margin is None or (exc.best_margin is not None
                                       and exc.best_margin > best_margin):
                best_margin = exc.best_margin
            continue
        star = _ki_star_from(cand.weight.mu, cand.weight.P_lower,
                             m_norm, psi_bar, cand.c, ki_norm)
        table.append((float(mu), star))
        if star > best_star:
            best_iss, best_star = cand, star
    if best_iss is None:
        raise CertificationError("no feasible decay rate in the search grid",
                                 best_margin=best_margin)
    cert = _assemble_certificate(report, Ki, ki_norm, m_norm, psi_bar,
                                 best_iss, best_star, options)
    return table, cert


def design(system: HyperbolicSystem, options: DesignOptions = DesignOptions()) -> GainCertificate:
    """Full design: rank checks, ISS certification, Ki = T2^{-1} and ki_star.

    With options.mu set, the certificate is computed at that decay rate;
    otherwise all feasible rates in the search grid are tried and the one
    maximizing ki_star is kept (first maximizer in grid order).
    """
    if options.mu is None:
        _, cert = design_sweep(system, options)
        return cert
    report, Ki, ki_norm, m_norm, psi_bar = _design_components(system, options)
    iss = certify_iss(system, replace(options.search, mu_values=(options.mu,)))
    ki_star = _ki_star_from(iss.weight.mu, iss.weight.P_lower, m_norm, psi_bar,
                            iss.c, ki_norm)
    return _assemble_certificate(report, Ki, ki_norm, m_norm, psi_bar, iss,
                                 ki_star, options)


def check_Ki_candidate(T2: np.ndarray, Ki: np.ndarray) -> bool:
    """True iff T2 Ki + Ki' T2' is positive definite (alternative gain matrices)."""
    T2 = np.atleast_2d(np.asarray(T2, dtype=float))
    Ki = np.atleast_2d(np.asarray(Ki, dtype=float))
    if T2.shape != Ki.shape or T2.shape[0] != T2.shape[1]:
        raise ValueError("T2 and Ki must be square with matching shapes")
    sym = T2 @ Ki + Ki.T @ T2.T
    return bool(np.min(np.linalg.eigvalsh(sym)) > 0.0)


@dataclass(frozen=True)
class GainChoice:
    """Minimal (ki, Ki) pair for operations that only need the applied gain."""

    ki: float
    Ki: np.ndarray


# ---------------------------------------------------------------------------
# Closed forms for the 2x2 shallow-water example
# ---------------------------------------------------------------------------

def saint_venant_T1(c, d, k0, k1, b0, b1) -> np.ndarray:
    """Closed-form T1 = (1/(c+d)) [[c, d], [1, -1]] [[1, -k0], [-k1, 1]]^{-1} diag(b0, b1)."""
    F = np.array([[c, d], [1.0, -1.0]])
    G = np.array([[1.0, -k0], [-k1, 1.0]])
    return (F @ np.linalg.inv(G) @ np.diag([b0, b1])) / (c + d)


def saint_venant_Ki(c, d, k0, k1, b0, b1) -> np.ndarray:
    """Closed-form Ki = T2^{-1} = -T1^{-1} for the 2x2 shallow-water data.

    Written as a scaled matrix,
        Ki = theta * [[b1 (1 - k0), b1 (d + c k0)],
                      [b0 (1 - k1), -b0 (c + d k1)]]
    with theta = -(c + d)(1 - k0 k1) / (b0 b1 D) and
    D = (1 - k0)(c + d k1) + (1 - k1)(d + c k0).
    """
    D = (1.0 - k0) * (c + d * k1) + (1.0 - k1) * (d + c * k0)
    theta = -(c + d) * (1.0 - k0 * k1) / (b0 * b1 * D)
    body = np.array([
        [b1 * (1.0 - k0), b1 * (d + c * k0)],
        [b0 * (1.0 - k1), -b0 * (c + d * k1)],
    ])
    return theta * body
