"""Problem data for the abstract and the hyperbolic regulation settings.

Coefficient functions of the hyperbolic system are stored as uniform-grid
samples with linear interpolation in between; this keeps quadrature and
feasibility sampling deterministic.  All containers are frozen dataclasses
and every operation here is pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import CoefficientError

DEFAULT_GRID_POINTS = 201

# A matrix counts as full rank when its 2-norm condition number stays below this.
RANK_TOL = 1e10


def _as_matrix(a, rows, cols, name):
    m = np.array(a, dtype=float)
    if m.shape != (rows, cols):
        raise ValueError(f"{name} must have shape {(rows, cols)}, got {m.shape}")
    return m


def _sample_coefficient(fn_or_array, s_grid, width):
    """Sample a coefficient onto the grid.

    Accepts a callable s -> array(width), a constant array(width), or an
    already-sampled array (len(s_grid), width).
    """
    G = len(s_grid)
    if callable(fn_or_array):
        out = np.stack([np.asarray(fn_or_array(s), dtype=float).reshape(width) for s in s_grid])
        return out
    arr = np.asarray(fn_or_array, dtype=float)
    if arr.shape == (G, width):
        return arr.copy()
    return np.broadcast_to(arr.reshape(width), (G, width)).copy()


@dataclass(frozen=True)
class HyperbolicSystem:
    """One-dimensional n x n hyperbolic boundary-control system.

    phi_t + Lambda0(s) phi_s + Lambda1(s) phi = 0 on s in (0, 1), with the
    boundary relation [phi_+(t,0); phi_-(t,1)] = K [phi_+(t,1); phi_-(t,0)]
    + B u + w_b and output y = L1 [phi_+(0); phi_-(1)] + L2 [phi_+(1);
    phi_-(0)] + w_y.  Lambda0 is diagonal with the first `ell` speeds
    positive and the rest negative.
    """

    n: int
    ell: int
    m: int
    lambda0_samples: np.ndarray  # (grid_points, n) diagonal entries
    lambda1_samples: np.ndarray  # (grid_points, n, n)
    K: np.ndarray
    B: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    grid_points: int = DEFAULT_GRID_POINTS
    lambda0_prime: Optional[Callable] = None  # optional analytic derivative hook

    def __post_init__(self):
        object.__setattr__(self, "lambda0_samples", np.array(self.lambda0_samples, dtype=float))
        object.__setattr__(self, "lambda1_samples", np.array(self.lambda1_samples, dtype=float))
        object.__setattr__(self, "K", _as_matrix(self.K, self.n, self.n, "K"))
        object.__setattr__(self, "B", _as_matrix(self.B, self.n, self.m, "B"))
        object.__setattr__(self, "L1", _as_matrix(self.L1, self.m, self.n, "L1"))
        object.__setattr__(self, "L2", _as_matrix(self.L2, self.m, self.n, "L2"))
        self.lambda0_samples.setflags(write=False)
        self.lambda1_samples.setflags(write=False)
        self.K.setflags(write=False)
        self.B.setflags(write=False)
        self.L1.setflags(write=False)
        self.L2.setflags(write=False)

    @cached_property
    def s_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_points)

    @cached_property
    def lambda0_derivative_samples(self) -> np.ndarray:
        """d(Lambda0)/ds on the grid, centered differences, one-sided at the ends."""
        if self.lambda0_prime is not None:
            return np.stack(
                [np.asarray(self.lambda0_prime(s), dtype=float).reshape(self.n) for s in self.s_grid]
            )
        if self.grid_points < 3:
            edge = 1
        else:
            edge = 2
        return np.gradient(self.lambda0_samples, self.s_grid, axis=0, edge_order=edge)

    # --- block views of the boundary data -------------------------------

    @property
    def B1(self) -> np.ndarray:
        return self.B[: self.ell, :]

    @property
    def B2(self) -> np.ndarray:
        return self.B[self.ell :, :]

    def k_blocks(self):
        l = self.ell
        return self.K[:l, :l], self.K[:l, l:], self.K[l:, :l], self.K[l:, l:]

    # --- construction helpers -------------------------------------------

    @classmethod
    def from_constant(cls, lambda0, lambda1, K, B, L1, L2, ell, grid_points=DEFAULT_GRID_POINTS):
        lam0 = np.asarray(lambda0, dtype=float).reshape(-1)
        n = lam0.size
        lam1 = np.asarray(lambda1, dtype=float).reshape(n, n)
        B = np.atleast_2d(np.asarray(B, dtype=float))
        if B.shape[0] != n:
            B = B.reshape(n, -1)
        m = B.shape[1]
        s = np.linspace(0.0, 1.0, grid_points)
        return cls(
            n=n,
            ell=ell,
            m=m,
            lambda0_samples=np.broadcast_to(lam0, (grid_points, n)).copy(),
            lambda1_samples=np.broadcast_to(lam1, (grid_points, n, n)).copy(),
            K=K,
            B=B,
            L1=L1,
            L2=L2,
            grid_points=grid_points,
        )

    @classmethod
    def from_callables(cls, n, ell, m, lambda0, lambda1, K, B, L1, L2,
                       grid_points=DEFAULT_GRID_POINTS, lambda0_prime=None):
        s = np.linspace(0.0, 1.0, grid_points)
        lam0 = _sample_coefficient(lambda0, s, n)
        if callable(lambda1):
            lam1 = np.stack([np.asarray(lambda1(si), dtype=float).reshape(n, n) for si in s])
        else:
            lam1 = np.broadcast_to(np.asarray(lambda1, dtype=float).reshape(n, n),
                                   (grid_points, n, n)).copy()
        return cls(n=n, ell=ell, m=m, lambda0_samples=lam0, lambda1_samples=lam1,
                   K=K, B=B, L1=L1, L2=L2, grid_points=grid_points,
                   lambda0_prime=lambda0_prime)


@dataclass(frozen=True)
class AbstractLinearSystem:
    """Dense (A, B, C) triple for the finite-dimensional regulation problem."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        C = np.asarray(self.C, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if C.ndim == 1:
            C = C.reshape(1, -1)
        N = A.shape[0]
        if A.shape != (N, N):
            raise ValueError("A must be square")
        if B.shape[0] != N or C.shape[1] != N or B.shape[1] != C.shape[0]:
            raise ValueError("B, C shapes inconsistent with A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class DisturbanceScenario:
    """Constant disturbances and reference for a regulation run."""

    w_b: np.ndarray
    w_y: np.ndarray
    y_ref: np.ndarray
    w_dist: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "w_b", np.asarray(self.w_b, dtype=float).reshape(-1))
        object.__setattr__(self, "w_y", np.asarray(self.w_y, dtype=float).reshape(-1))
        object.__setattr__(self, "y_ref", np.asarray(self.y_ref, dtype=float).reshape(-1))
        if self.w_dist is not None:
            object.__setattr__(self, "w_dist", np.asarray(self.w_dist, dtype=float))

    @classmethod
    def quiescent(cls, system, y_ref=None):
        """All-zero disturbances; y_ref defaults to zero."""
        y = np.zeros(system.m) if y_ref is None else np.asarray(y_ref, dtype=float)
        return cls(w_b=np.zeros(system.n), w_y=np.zeros(system.m), y_ref=y)

    def check(self, system):
        errs = []
        if self.w_b.size != system.n:
            errs.append(f"w_b has length {self.w_b.size}, expected n={system.n}")
        if self.w_y.size != system.m:
            errs.append(f"w_y has length {self.w_y.size}, expected m={system.m}")
        if self.y_ref.size != system.m:
            errs.append(f"y_ref has length {self.y_ref.size}, expected m={system.m}")
        for name in ("w_b", "w_y", "y_ref"):
            if not np.all(np.isfinite(getattr(self, name))):
                errs.append(f"{name} has non-finite entries")
        return errs


@dataclass(frozen=True)
class LyapunovWeight:
    """Diagonal spatial weight P(s) with its certification constants.

    The weight family is P_i(s) = p_i * exp(-sign(lambda_i) * mu * s); the
    parametrization is kept in `param` so P can be re-evaluated analytically
    on any grid.
    """

    samples: np.ndarray  # (grid_points, n) diagonal entries
    s_grid: np.ndarray
    mu: float
    P_lower: float
    P_upper: float
    S_margin: float
    param: dict = field(default_factory=dict)

    def diag_at(self, s) -> np.ndarray:
        """Diagonal entries of P at points s (analytic when param is set)."""
        s = np.asarray(s, dtype=float)
        if self.param:
            p = np.asarray(self.param["p"], dtype=float)
            signs = np.asarray(self.param["signs"], dtype=float)
            return p[None, :] * np.exp(-signs[None, :] * self.mu * s[..., None])
        out = np.empty(s.shape + (self.samples.shape[1],))
        for i in range(self.samples.shape[1]):
            out[..., i] = np.interp(s, self.s_grid, self.samples[:, i])
        return out


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def validate_hyperbolic(system: HyperbolicSystem) -> list[str]:
    """Check the structural invariants; returns a list of violations (empty if valid)."""
    report = []
    n, ell, m = system.n, system.ell, system.m
    if n < 1:
        report.append(f"state dimension n={n} must be positive")
        return report
    if not (0 <= ell <= n):
        report.append(f"ell={ell} outside [0, n={n}]")
        return report
    if m < 1:
        report.append(f"input dimension m={m} must be positive")
    if system.grid_points < 2:
        report.append(f"grid_points={system.grid_points} must be at least 2")
        return report

    lam0 = system.lambda0_samples
    if lam0.shape != (system.grid_points, n):
        report.append(f"lambda0 samples have shape {lam0.shape}, expected {(system.grid_points, n)}")
        return report
    if system.lambda1_samples.shape != (system.grid_points, n, n):
        report.append(
            f"lambda1 samples have shape {system.lambda1_samples.shape}, "
            f"expected {(system.grid_points, n, n)}"
        )
        return report

    if not np.all(np.isfinite(lam0)):
        g, i = np.argwhere(~np.isfinite(lam0))[0]
        report.append(f"lambda0 non-finite at grid index {g}, component {i}")
    if not np.all(np.isfinite(system.lambda1_samples)):
        g = np.argwhere(~np.isfinite(system.lambda1_samples))[0]
        report.append(f"lambda1 non-finite at grid index {g[0]}, entry ({g[1]}, {g[2]})")

    # Sign pattern: lambda_i > 0 for i < ell, lambda_i < 0 for i >= ell.
    for i in range(n):
        col = lam0[:, i]
        if i < ell:
            bad = np.flatnonzero(~(col > 0))
            if bad.size:
                report.append(
                    f"sign pattern: lambda_{i + 1}(s) must be > 0 (component {i} is in the "
                    f"positive-speed block) but fails at grid index {bad[0]}"
                )
        else:
            bad = np.flatnonzero(~(col < 0))
            if bad.size:
                report.append(
                    f"sign pattern: lambda_{i + 1}(s) must be < 0 (component {i} is in the "
                    f"negative-speed block) but fails at grid index {bad[0]}"
                )

    for name, mat, shape in (
        ("K", system.K, (n, n)),
        ("B", system.B, (n, m)),
        ("L1", system.L1, (m, n)),
        ("L2", system.L2, (m, n)),
    ):
        if mat.shape != shape:
            report.append(f"{name} has shape {mat.shape}, expected {shape}")
        elif not np.all(np.isfinite(mat)):
            report.append(f"{name} has non-finite entries")
    return report


def eval_coefficients(system: HyperbolicSystem, s: float):
    """Interpolated (Lambda0(s), Lambda1(s), dLambda0/ds(s)) as n x n matrices.

    Raises ValueError for s outside [0, 1].
    """
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"s={s} outside the spatial domain [0, 1]")
    lam0, lam1, dlam0 = _coeffs_at(system, s)
    return np.diag(lam0), lam1, np.diag(dlam0)


def _coeffs_at(system: HyperbolicSystem, s: float):
    """Fast path: diagonal of Lambda0, Lambda1 matrix and diagonal of dLambda0/ds."""
    grid = system.s_grid
    x = np.clip(s, 0.0, 1.0)
    j = min(int(x * (system.grid_points - 1)), system.grid_points - 2)
    t = (x - grid[j]) / (grid[j + 1] - grid[j])
    lam0 = (1 - t) * system.lambda0_samples[j] + t * system.lambda0_samples[j + 1]
    lam1 = (1 - t) * system.lambda1_samples[j] + t * system.lambda1_samples[j + 1]
    d = system.lambda0_derivative_samples
    dlam0 = (1 - t) * d[j] + t * d[j + 1]
    return lam0, lam1, dlam0


def lambda0_inverse_diag(system: HyperbolicSystem, s: float) -> np.ndarray:
    """Entrywise inverse of the diagonal of Lambda0(s); guards against zeros."""
    lam0, _, _ = _coeffs_at(system, s)
    if np.any(np.abs(lam0) < 1e-14):
        raise CoefficientError(f"Lambda0 singular near s={s}")
    return 1.0 / lam0


def max_speed(system: HyperbolicSystem) -> float:
    return float(np.max(np.abs(system.lambda0_samples)))


# ---------------------------------------------------------------------------
# Reference systems
# ---------------------------------------------------------------------------

def transport_system(grid_points=DEFAULT_GRID_POINTS) -> HyperbolicSystem:
    """Scalar transport phi_t + phi_s = 0 with control at s=0 and output phi(t,1).

    Stored with lambda = +1 and ell = 1 so the sign-pattern invariant holds;
    this matches the stated dynamics and boundary/output structure and gives
    T1 = 1, T2 = -1.
    """
    return HyperbolicSystem.from_constant(
        lambda0=[1.0], lambda1=[[0.0]], K=[[0.0]], B=[[1.0]],
        L1=[[0.0]], L2=[[1.0]], ell=1, grid_points=grid_points,
    )


def saint_venant_system(c=1.0, d=1.0, k0=0.5, k1=0.5, b0=1.0, b1=1.0,
                        grid_points=DEFAULT_GRID_POINTS) -> HyperbolicSystem:
    """Linearized 2x2 shallow-water system in characteristic coordinates."""
    L1 = [[c / (c + d), 0.0], [0.0, -1.0 / (c + d)]]
    L2 = [[0.0, d / (c + d)], [1.0 / (c + d), 0.0]]
    return HyperbolicSystem.from_constant(
        lambda0=[c, -d], lambda1=np.zeros((2, 2)),
        K=[[0.0, k0], [k1, 0.0]], B=[[b0, 0.0], [0.0, b1]],
        L1=L1, L2=L2, ell=1, grid_points=grid_points,
    )


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------

def _coefficient_from_json(spec, n, width, s_grid, name):
    """Decode {"constant": [...]} or {"samples": [[s, values...], ...]}."""
    if "constant" in spec:
        vals = np.asarray(spec["constant"], dtype=float).reshape(width)
        return np.broadcast_to(vals, (len(s_grid),) + ((width,) if np.isscalar(width) else width)).copy()
    if "samples" in spec:
        rows = np.asarray(spec["samples"], dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 1 + int(np.prod(width)):
            raise ValueError(f"{name} samples must be rows [s, {int(np.prod(width))} values]")
        s_in = rows[:, 0]
        if np.any(np.diff(s_in) <= 0):
            raise ValueError(f"{name} sample abscissae must be strictly increasing")
        vals = rows[:, 1:]
        out = np.empty((len(s_grid), vals.shape[1]))
        for k in range(vals.shape[1]):
            out[:, k] = np.interp(s_grid, s_in, vals[:, k])
        return out.reshape((len(s_grid),) + (width if isinstance(width, tuple) else (width,)))
    raise ValueError(f'{name} must provide "constant" or "samples"')


def system_from_dict(doc: dict):
    """Build (HyperbolicSystem, DisturbanceScenario | None) from a JSON document."""
    try:
        n = int(doc["n"])
        ell = int(doc["ell"])
        m = int(doc["m"])
    except KeyError as exc:
        raise ValueError(f"missing required key {exc}") from exc
    grid_points = int(doc.get("grid_points", DEFAULT_GRID_POINTS))
    s_grid = np.linspace(0.0, 1.0, grid_points)
    lam0 = _coefficient_from_json(doc["lambda0"], n, n, s_grid, "lambda0")
    lam1 = _coefficient_from_json(doc["lambda1"], n, (n, n), s_grid, "lambda1")
    system = HyperbolicSystem(
        n=n, ell=ell, m=m,
        lambda0_samples=lam0, lambda1_samples=lam1,
        K=np.asarray(doc["K"], dtype=float),
        B=np.asarray(doc["B"], dtype=float),
        L1=np.asarray(doc["L1"], dtype=float),
        L2=np.asarray(doc["L2"], dtype=float),
        grid_points=grid_points,
    )
    scenario = None
    if "scenario" in doc:
        sc = doc["scenario"]
        scenario = DisturbanceScenario(
            w_b=np.asarray(sc.get("w_b", np.zeros(n)), dtype=float),
            w_y=np.asarray(sc.get("w_y", np.zeros(m)), dtype=float),
            y_ref=np.asarray(sc.get("y_ref", np.zeros(m)), dtype=float),
        )
    return system, scenario


def load_system(path):
    with open(path, "r", encoding="utf-8") as fh:
        return system_from_dict(json.load(fh))


def system_to_dict(system: HyperbolicSystem, scenario: Optional[DisturbanceScenario] = None) -> dict:
    doc = {
        "n": system.n,
        "ell": system.ell,
        "m": system.m,
        "grid_points": system.grid_points,
        "lambda0": {"samples": np.column_stack([system.s_grid, system.lambda0_samples]).tolist()},
        "lambda1": {
            "samples": np.column_stack(
                [system.s_grid, system.lambda1_samples.reshape(system.grid_points, -1)]
            ).tolist()
        },
        "K": system.K.tolist(),
        "B": system.B.tolist(),
        "L1": system.L1.tolist(),
        "L2": system.L2.tolist(),
    }
    if scenario is not None:
        doc["scenario"] = {
            "w_b": scenario.w_b.tolist(),
            "w_y": scenario.w_y.tolist(),
            "y_ref": scenario.y_ref.tolist(),
        }
    return doc
