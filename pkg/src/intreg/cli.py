"""Command-line front end.

Subcommands: design, forward, simulate, verify, reproduce.  All numeric
output uses 9 significant digits, every command writes a run_manifest.json
next to its artifacts, and outputs are byte-identical across repeated runs
with the same configuration (no timestamps, fixed seeds).

Exit codes: 1 invalid configuration, 2 assumption/certification failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import heat_example, model_core, pde_sim
from .abstract_forwarding import forwarding_design, lyapunov_P, verify_theorem2
from .errors import AssumptionError, ConfigError, NumericalFailure
from .gain_design import (DesignOptions, GainCertificate, IssCertificate,
                          RankReport, WeightSearchConfig, check_Ki_candidate,
                          design, design_sweep, spectral_norm)
from .model_core import (RANK_TOL, AbstractLinearSystem, DisturbanceScenario,
                         LyapunovWeight, saint_venant_system, transport_system)

TOLERANCES = {
    "rank_tol": RANK_TOL,
    "interior_tol": WeightSearchConfig().interior_tol,
    "boundary_margin": WeightSearchConfig().boundary_margin,
    "float_format": ".9g",
}


def fmt(x) -> str:
    return f"{float(x):.9g}"


def _round9(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round9(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(fmt(float(obj)))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_round9(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_manifest(out_dir, command, options, derived):
    doc = {
        "command": command,
        "options": options,
        "tolerances": TOLERANCES,
        "derived": derived,
    }
    write_json(Path(out_dir) / "run_manifest.json", doc)


@dataclass
class ExperimentConfig:
    """Validated CLI invocation: command, input paths, numeric options."""

    command: str
    system_path: str = ""
    cert_path: str = ""
    scenario_path: str = ""
    out: str = ""
    out_dir: str = "."
    grid: int | None = None
    steps: int = 1000
    T: float | None = None
    cfl: float = 0.9
    ki: float | None = None
    mu: float | None = None
    seed: int = 0
    target: str = ""
    matrix_paths: dict = field(default_factory=dict)

    def require_files(self, *paths):
        for p in paths:
            if p and not Path(p).is_file():
                raise ConfigError(f"input file not found: {p}")

    def check_ranges(self):
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if (self.grid is not None and self.grid < 2) or self.steps < 10:
            raise ConfigError("need grid >= 2 and steps >= 10")
        if self.T is not None and self.T <= 0:
            raise ConfigError("need T > 0")


# ---------------------------------------------------------------------------
# Certificate (de)serialization
# ---------------------------------------------------------------------------

def certificate_to_dict(cert: GainCertificate) -> dict:
    r = cert.rank_report
    w = cert.iss.weight
    return {
        "ki": cert.ki,
        "ki_star": cert.ki_star,
        "ki_certifiable": cert.ki_certifiable,
        "p": cert.p,
        "p_max": cert.p_max,
        "mu_e": cert.mu_e,
        "Ki": cert.Ki.tolist(),
        "psi_bar": cert.psi_bar,
        "m_norm": cert.m_norm,
        "iss": {
            "mu": w.mu,
            "P_lower": w.P_lower,
            "P_upper": w.P_upper,
            "S_margin": w.S_margin,
            "weight_p": w.param.get("p", []),
            "weight_signs": w.param.get("signs", []),
            "c": cert.iss.c,
            "S": cert.iss.S.tolist(),
            "Q": cert.iss.Q.tolist(),
            "R": cert.iss.R.tolist(),
        },
        "rank": {
            "t1": r.t1.tolist(),
            "t2": r.t2.tolist(),
            "m_matrix": r.m_matrix.tolist(),
            "inner1": r.inner1.tolist(),
            "inner2": r.inner2.tolist(),
            "phi_plus": r.phi_plus.tolist(),
            "phi_minus": r.phi_minus.tolist(),
            "cond_inner1": r.cond_inner1,
            "cond_inner2": r.cond_inner2,
            "cond_t1": r.cond_t1,
            "cond_t2": r.cond_t2,
        },
    }


def certificate_from_dict(doc: dict, grid_points: int = model_core.DEFAULT_GRID_POINTS) -> GainCertificate:
    r = doc["rank"]
    i = doc["iss"]
    mu = float(i["mu"])
    p_vec = np.asarray(i["weight_p"], dtype=float)
    signs = np.asarray(i["weight_signs"], dtype=float)
    s_grid = np.linspace(0.0, 1.0, grid_points)
    samples = p_vec[None, :] * np.exp(-signs[None, :] * mu * s_grid[:, None])
    weight = LyapunovWeight(
        samples=samples, s_grid=s_grid, mu=mu,
        P_lower=float(i["P_lower"]), P_upper=float(i["P_upper"]),
        S_margin=float(i["S_margin"]),
        param={"p": list(p_vec), "signs": list(signs)},
    )
    iss = IssCertificate(
        weight=weight, c=float(i["c"]),
        S=np.asarray(i["S"], dtype=float),
        Q=np.asarray(i["Q"], dtype=float),
        R=np.asarray(i["R"], dtype=float),
        valid=True,
    )
    rank = RankReport(
        t1=np.asarray(r["t1"], dtype=float),
        t2=np.asarray(r["t2"], dtype=float),
        m_matrix=np.asarray(r["m_matrix"], dtype=float),
        inner1=np.asarray(r["inner1"], dtype=float),
        inner2=np.asarray(r["inner2"], dtype=float),
        phi_plus=np.asarray(r["phi_plus"], dtype=float),
        phi_minus=np.asarray(r["phi_minus"], dtype=float),
        cond_inner1=float(r["cond_inner1"]),
        cond_inner2=float(r["cond_inner2"]),
        cond_t1=float(r["cond_t1"]),
        cond_t2=float(r["cond_t2"]),
        passes_A3=True,
        passes_A4=True,
    )
    return GainCertificate(
        Ki=np.asarray(doc["Ki"], dtype=float),
        ki=float(doc["ki"]), ki_star=float(doc["ki_star"]),
        ki_certifiable=float(doc.get("ki_certifiable", doc["ki_star"])),
        p=float(doc["p"]), p_max=float(doc["p_max"]), mu_e=float(doc["mu_e"]),
        rank_report=rank, iss=iss,
        psi_bar=float(doc["psi_bar"]), m_norm=float(doc["m_norm"]),
    )


def _derived_scalars(cert: GainCertificate) -> dict:
    return {
        "mu": cert.mu, "c": cert.c, "ki_star": cert.ki_star, "ki": cert.ki,
        "p": cert.p, "p_max": cert.p_max, "mu_e": cert.mu_e,
        "psi_bar": cert.psi_bar, "m_norm": cert.m_norm,
        "P_lower": cert.iss.weight.P_lower, "P_upper": cert.iss.weight.P_upper,
        "S_margin": cert.iss.weight.S_margin,
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_design(cfg: ExperimentConfig) -> int:
    cfg.require_files(cfg.system_path)
    system, _ = model_core.load_system(cfg.system_path)
    options = DesignOptions(steps=cfg.steps, mu=cfg.mu)
    cert = design(system, options)
    out = Path(cfg.out or "cert.json")
    write_json(out, certificate_to_dict(cert))
    write_manifest(out.parent, "design",
                   {"system": cfg.system_path, "mu": cfg.mu, "steps": cfg.steps,
                    "out": str(out)},
                   _derived_scalars(cert))
    print(f"ki_star = {fmt(cert.ki_star)} (mu = {fmt(cert.mu)}, c = {fmt(cert.c)})")
    print(f"certificate written to {out}")
    return 0


def _load_matrix_csv(path):
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except Exception as exc:
        raise ConfigError(f"cannot parse matrix CSV {path}: {exc}") from exc


def cmd_forward(cfg: ExperimentConfig) -> int:
    paths = cfg.matrix_paths
    cfg.require_files(paths["A"], paths["B"], paths["C"])
    triple = AbstractLinearSystem(
        A=_load_matrix_csv(paths["A"]),
        B=_load_matrix_csv(paths["B"]),
        C=_load_matrix_csv(paths["C"]),
    )
    A, B, C = triple.A, triple.B, triple.C
    P, mu = lyapunov_P(A)
    fd = forwarding_design(A, B, C, P, mu)
    report = verify_theorem2(fd, A, B, fd.ki, C=C)
    doc = {
        "Ki": fd.Ki.tolist(),
        "M": fd.M.tolist(),
        "alpha": fd.alpha,
        "p": fd.p,
        "ki": fd.ki,
        "ki_star": fd.ki_star,
        "mu": fd.mu,
        "mu_e": fd.mu_e,
        "m_norm": float(np.linalg.norm(fd.M, 2)),
        "check": {
            "lambda_max_sym": report.lambda_max_sym,
            "lambda_min_Pe": report.lambda_min_Pe,
            "passed": report.passed,
        },
    }
    out = Path(cfg.out or "forward_design.json")
    write_json(out, doc)
    write_manifest(out.parent, "forward",
                   {"A": paths["A"], "B": paths["B"], "C": paths["C"], "out": str(out)},
                   {"ki_star": fd.ki_star, "alpha": fd.alpha, "p": fd.p,
                    "mu": fd.mu, "mu_e": fd.mu_e})
    print(f"ki_star = {fmt(fd.ki_star)}")
    print(f"design report written to {out}")
    return 0


def _load_scenario(path, system):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    sc = doc.get("scenario", doc)
    return DisturbanceScenario(
        w_b=np.asarray(sc.get("w_b", np.zeros(system.n)), dtype=float),
        w_y=np.asarray(sc.get("w_y", np.zeros(system.m)), dtype=float),
        y_ref=np.asarray(sc.get("y_ref", np.zeros(system.m)), dtype=float),
    )


def trajectory_rows(traj: pde_sim.Trajectory):
    m = traj.z.shape[1]
    header = (["t"] + [f"y_{j + 1}" for j in range(m)] + [f"z_{j + 1}" for j in range(m)]
              + ["norm_phi", "V", "Ve"])
    rows = [
        [traj.times[k], *traj.outputs[k], *traj.z[k], traj.norm_phi[k], traj.V[k], traj.Ve[k]]
        for k in range(len(traj.times))
    ]
    return header, rows


def cmd_simulate(cfg: ExperimentConfig) -> int:
    cfg.require_files(cfg.system_path, cfg.cert_path, cfg.scenario_path)
    cfg.check_ranges()
    system, embedded = model_core.load_system(cfg.system_path)
    with open(cfg.cert_path, "r", encoding="utf-8") as fh:
        cert = certificate_from_dict(json.load(fh), grid_points=system.grid_points)
    scenario = (_load_scenario(cfg.scenario_path, system) if cfg.scenario_path
                else (embedded or DisturbanceScenario.quiescent(system)))
    if cfg.ki is not None:
        cert = GainCertificate(
            Ki=cert.Ki, ki=cfg.ki, ki_star=cert.ki_star,
            ki_certifiable=cert.ki_certifiable, p=cert.p, p_max=cert.p_max,
            mu_e=cert.mu_e, rank_report=cert.rank_report, iss=cert.iss,
            psi_bar=cert.psi_bar, m_norm=cert.m_norm)
    T = cfg.T if cfg.T is not None else 60.0
    grid = cfg.grid if cfg.grid is not None else 400
    traj = pde_sim.simulate(system, cert, scenario, T=T, cfl=cfg.cfl,
                            n_cells=grid, store_states=False)
    out = Path(cfg.out or "traj.csv")
    header, rows = trajectory_rows(traj)
    write_csv(out, header, rows)
    write_manifest(out.parent, "simulate",
                   {"system": cfg.system_path, "cert": cfg.cert_path,
                    "scenario": cfg.scenario_path, "T": T, "grid": grid,
                    "cfl": cfg.cfl, "ki": cfg.ki, "out": str(out)},
                   {**_derived_scalars(cert),
                    "final_output_error": float(np.max(np.abs(traj.outputs[-1] - scenario.y_ref)))})
    print(f"trajectory written to {out} ({len(traj.times)} frames)")
    return 0


def cmd_verify(cfg: ExperimentConfig) -> int:
    cfg.require_files(cfg.system_path, cfg.cert_path)
    system, _ = model_core.load_system(cfg.system_path)
    with open(cfg.cert_path, "r", encoding="utf-8") as fh:
        stored = certificate_from_dict(json.load(fh), grid_points=system.grid_points)

    checks = []

    def check(name, ok, detail=""):
        checks.append(ok)
        print(f"{'PASS' if ok else 'FAIL'} {name}{(' ' + detail) if detail else ''}")

    violations = model_core.validate_hyperbolic(system)
    check("system invariants", not violations, "; ".join(violations))

    fresh = design(system, DesignOptions(mu=stored.mu))
    rel = lambda a, b: float(abs(a - b) / max(1.0, abs(b)))
    check("ki_star matches redesign", rel(stored.ki_star, fresh.ki_star) < 1e-6,
          f"stored {fmt(stored.ki_star)} vs {fmt(fresh.ki_star)}")
    check("Ki matches redesign",
          float(np.max(np.abs(stored.Ki - fresh.Ki))) < 1e-6 * (1 + spectral_norm(fresh.Ki)))
    check("T1/T2 match redesign",
          float(np.max(np.abs(stored.rank_report.t1 - fresh.rank_report.t1))
                + np.max(np.abs(stored.rank_report.t2 - fresh.rank_report.t2))) < 1e-6)

    w = stored.iss.weight
    expected_star = np.sqrt(w.mu * w.P_lower) / (stored.m_norm * stored.psi_bar
                                                 * np.sqrt(stored.iss.c * spectral_norm(np.linalg.inv(stored.rank_report.t2))))
    check("ki_star formula consistent", rel(stored.ki_star, float(expected_star)) < 1e-6)
    expected_pmax = w.mu * w.P_lower / (stored.ki * stored.m_norm**2 * stored.psi_bar**2)
    check("p_max formula consistent", rel(stored.p_max, float(expected_pmax)) < 1e-6)
    check("operating gain inside certified interval", 0.0 < stored.ki < stored.ki_star)
    check("forwarding weight inside bound", 0.0 < stored.p <= stored.p_max * (1 + 1e-9))
    check("Ki passes the definiteness test", check_Ki_candidate(stored.rank_report.t2, stored.Ki))
    check("boundary matrix S positive definite", stored.iss.weight.S_margin > 0.0
          and float(np.min(np.linalg.eigvalsh(stored.iss.S))) > 0.0)

    write_manifest(Path(cfg.out_dir), "verify",
                   {"system": cfg.system_path, "cert": cfg.cert_path, "seed": cfg.seed},
                   {**_derived_scalars(stored), "checks_passed": int(sum(checks)),
                    "checks_total": len(checks)})
    if all(checks):
        print("all checks passed")
        return 0
    return 2


# ---------------------------------------------------------------------------
# Reproduction recipes
# ---------------------------------------------------------------------------

def _print_matrix(name, M):
    M = np.atleast_2d(M)
    print(f"{name} =")
    for row in M:
        print("  [" + ", ".join(fmt(v) for v in row) + "]")


def reproduce_heat(cfg: ExperimentConfig) -> int:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    N = cfg.grid if cfg.grid is not None else 2000
    T = cfg.T if cfg.T is not None else 5000.0
    problem = heat_example.HeatProblem.build(N)
    exact = heat_example.exact_CAinvB()
    gain = heat_example.heat_gain(problem)
    _print_matrix("C A^-1 B (closed form)", exact)
    _print_matrix("K_i", gain.Ki)
    print(f"|K_i| = {fmt(gain.ki_norm)}")
    print(f"|C A^-1| = {fmt(gain.cainv_norm)}")
    print(f"ki_star = {fmt(gain.ki_star)}")
    ki = 2.0e-3 if cfg.ki is None else cfg.ki
    traj = heat_example.simulate_heat(problem, ki=ki, T=T, dt=1.0, gain=gain)
    rows = [
        [traj.times[k], *traj.outputs[k], *traj.z[k], traj.V[k], traj.Ve[k]]
        for k in range(len(traj.times))
    ]
    write_csv(out_dir / "heat_trajectory.csv",
              ["t", "y1", "y2", "y3", "z1", "z2", "z3", "V", "Ve"], rows)
    write_manifest(out_dir, "reproduce heat",
                   {"N": N, "T": T, "dt": 1.0, "ki": ki},
                   {"ki_star": gain.ki_star, "ki_norm": gain.ki_norm,
                    "cainv_norm": gain.cainv_norm, "mu": gain.mu,
                    "final_output_error": float(np.max(np.abs(traj.outputs[-1] - problem.y_ref)))})
    print(f"trajectory written to {out_dir / 'heat_trajectory.csv'}")
    return 0


def reproduce_transport(cfg: ExperimentConfig) -> int:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    system = transport_system()
    sweep, best = design_sweep(system, DesignOptions())
    _print_matrix("T1", best.rank_report.t1)
    _print_matrix("T2", best.rank_report.t2)
    for mu, star in sweep:
        print(f"mu = {fmt(mu)}  ki_star = {fmt(star)}")
    print(f"max ki_star = {fmt(best.ki_star)} at mu = {fmt(best.mu)}")
    write_csv(out_dir / "transport_gain_sweep.csv", ["mu", "ki_star"], sweep)

    scenario = DisturbanceScenario.quiescent(system, y_ref=[1.0])
    grid = cfg.grid if cfg.grid is not None else 200
    T = cfg.T if cfg.T is not None else 60.0
    traj = pde_sim.simulate(system, best, scenario, T=T, cfl=cfg.cfl,
                            n_cells=grid, store_states=False)
    header, rows = trajectory_rows(traj)
    write_csv(out_dir / "transport_trajectory.csv", header, rows)
    write_manifest(out_dir, "reproduce transport",
                   {"grid": grid, "T": T, "cfl": cfg.cfl},
                   {**_derived_scalars(best),
                    "final_output_error": float(np.max(np.abs(traj.outputs[-1] - scenario.y_ref)))})
    print(f"trajectory written to {out_dir / 'transport_trajectory.csv'}")
    return 0


def reproduce_saintvenant(cfg: ExperimentConfig) -> int:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    system = saint_venant_system(c=1.0, d=1.0, k0=0.5, k1=0.5, b0=1.0, b1=1.0)
    cert = design(system, DesignOptions())
    _print_matrix("T1", cert.rank_report.t1)
    _print_matrix("T2", cert.rank_report.t2)
    _print_matrix("K_i", cert.Ki)
    print(f"ki_star = {fmt(cert.ki_star)} (mu = {fmt(cert.mu)}, c = {fmt(cert.c)})")

    scenario = DisturbanceScenario.quiescent(system, y_ref=[1.0, 0.5])
    grid = cfg.grid if cfg.grid is not None else 200
    T = cfg.T if cfg.T is not None else 60.0
    traj = pde_sim.simulate(system, cert, scenario, T=T, cfl=cfg.cfl,
                            n_cells=grid, store_states=False)
    header, rows = trajectory_rows(traj)
    write_csv(out_dir / "saintvenant_trajectory.csv", header, rows)
    write_manifest(out_dir, "reproduce saintvenant",
                   {"grid": grid, "T": T, "cfl": cfg.cfl},
                   {**_derived_scalars(cert),
                    "final_output_error": float(np.max(np.abs(traj.outputs[-1] - scenario.y_ref)))})
    print(f"trajectory written to {out_dir / 'saintvenant_trajectory.csv'}")
    return 0


def cmd_reproduce(cfg: ExperimentConfig) -> int:
    if cfg.target == "heat":
        return reproduce_heat(cfg)
    if cfg.target == "transport":
        return reproduce_transport(cfg)
    if cfg.target == "saintvenant":
        return reproduce_saintvenant(cfg)
    raise ConfigError(f"unknown reproduction target {cfg.target!r}")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intreg",
        description="Integral-action regulator design and simulation for "
                    "exponentially stable systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="certify and design the integral gain for a hyperbolic system")
    p.add_argument("--system", required=True, help="system JSON file")
    p.add_argument("--out", default="cert.json", help="certificate JSON output path")
    p.add_argument("--mu", type=float, default=None, help="fix the certified decay rate")
    p.add_argument("--steps", type=int, default=1000, help="ODE integration steps")

    p = sub.add_parser("forward", help="forwarding design for a dense (A, B, C) triple")
    p.add_argument("--A", required=True, help="CSV matrix, comma-separated rows")
    p.add_argument("--B", required=True)
    p.add_argument("--C", required=True)
    p.add_argument("--out", default="forward_design.json")

    p = sub.add_parser("simulate", help="closed-loop upwind simulation")
    p.add_argument("--system", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--scenario", default="", help="scenario JSON (defaults to the system file's scenario)")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--grid", type=int, default=None, help="number of spatial cells (default 400)")
    p.add_argument("--cfl", type=float, default=0.9)
    p.add_argument("--ki", type=float, default=None, help="override the certificate's operating gain")
    p.add_argument("--out", default="traj.csv")

    p = sub.add_parser("verify", help="re-run the invariant checks against stored artifacts")
    p.add_argument("--system", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("reproduce", help="reproduce a worked example end to end")
    p.add_argument("target", choices=["heat", "transport", "saintvenant"])
    p.add_argument("--out-dir", default=".")
    p.add_argument("--grid", type=int, default=None,
                   help="spatial resolution override (heat: intervals on (0,10); PDE runs: cells)")
    p.add_argument("--T", type=float, default=None, help="horizon override")
    p.add_argument("--cfl", type=float, default=0.9)
    p.add_argument("--ki", type=float, default=None)
    return parser


def config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig(command=args.command)
    for name in ("system", "cert", "scenario"):
        if hasattr(args, name):
            setattr(cfg, f"{name}_path", getattr(args, name))
    for name in ("out", "grid", "steps", "T", "cfl", "ki", "mu", "seed", "target"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "out_dir"):
        cfg.out_dir = args.out_dir
    if args.command == "forward":
        cfg.matrix_paths = {"A": args.A, "B": args.B, "C": args.C}
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    handlers = {
        "design": cmd_design,
        "forward": cmd_forward,
        "simulate": cmd_simulate,
        "verify": cmd_verify,
        "reproduce": cmd_reproduce,
    }
    try:
        return handlers[cfg.command](cfg)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AssumptionError as exc:
        print(f"assumption failure: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
