"""Reproducible experiment runner.

Every subcommand reads a JSON config, writes CSV/JSON data plus a manifest
(config echo, library versions, seed, thread count) into the output
directory, and exits 0 on success, 2 on an invalid config, 3 on a module
precondition failure, and 4 when a solve fails to converge.  Data outputs are
byte-identical across runs with the same config, seed, and thread count;
wall-clock timestamps appear only in the manifest.

Grid fields are stored as flat binary: a 32-byte header (8-byte magic
``TORUSFLD``, unsigned 64-bit resolution, two 64-bit periods, all
little-endian) followed by the row-major float64 samples, with a JSON sidecar
describing the layout.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import struct
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy

from . import __version__
from .functionals import RhoPair, mt_ratio, mt_system_gap
from .geometry import (
    CurveSystem,
    FlatTorus,
    GridField,
    Point,
    SingularData,
    random_smooth_field,
    validate_singular_clearance,
)
from .joins import (
    JoinElement,
    energy_curve,
    homotopy_identity_check,
    kr_scaling_check,
    scalar_energy_curve,
    scalar_test_function,
    test_function,
    validate_on_curves,
)
from .measures import BarycenterMeasure
from .quantization import (
    blowup_candidates,
    global_lambda,
    global_membership,
    local_lambda,
    scalar_forbidden,
)
from .solver import (
    SolverConfig,
    blowup_masses,
    continuation_sweep,
    minimize,
    pde_residual,
)

FIELD_MAGIC = b"TORUSFLD"
SUBCOMMANDS = ("quantization", "test-energy", "kr-scaling", "projection",
               "mt-check", "solve", "continuation")


class ConfigError(ValueError):
    """Raised when the experiment config cannot be interpreted."""


# ----- grid field file format ---------------------------------------------------

def write_field(path: Path, field: GridField, label: str) -> None:
    """Binary dump (32-byte header + row-major float64) with a JSON sidecar."""
    torus = field.torus
    header = struct.pack("<8sQdd", FIELD_MAGIC, torus.n, torus.L1, torus.L2)
    path.write_bytes(header + field.values.astype("<f8").tobytes(order="C"))
    sidecar = {
        "magic": FIELD_MAGIC.decode(),
        "resolution": torus.n,
        "periods": [torus.L1, torus.L2],
        "dtype": "<f8",
        "order": "row-major",
        "header_bytes": 32,
        "label": label,
    }
    _write_json(path.with_suffix(path.suffix + ".json"), sidecar)


def read_field(path: Path) -> GridField:
    blob = Path(path).read_bytes()
    if len(blob) < 32:
        raise ValueError(f"{path} is too short to hold a field header")
    magic, n, l1, l2 = struct.unpack("<8sQdd", blob[:32])
    if magic != FIELD_MAGIC:
        raise ValueError(f"{path} does not start with the field magic {FIELD_MAGIC!r}")
    values = np.frombuffer(blob[32:], dtype="<f8")
    if values.size != n * n:
        raise ValueError(f"{path} holds {values.size} samples, expected {n * n}")
    return GridField(FlatTorus(int(n), l1, l2), values.reshape(int(n), int(n)).copy())


# ----- weight profiles -----------------------------------------------------------

def h_profile(torus: FlatTorus, config: dict) -> GridField:
    """Named weight profiles: `constant`, `sin-bump`, `gauss-bump` (periodicized)."""
    profile = config.get("profile", "constant")
    if profile == "constant":
        return torus.constant_field(float(config.get("value", 1.0)))
    if profile == "sin-bump":
        a = float(config.get("amplitude", 0.3))
        if not -1.0 < a < 1.0:
            raise ConfigError(f"sin-bump amplitude must lie in (-1, 1), got {a}")
        x1, x2 = torus.grids()
        return torus.field(1.0 + a * np.sin(2.0 * np.pi * x1 / torus.L1)
                           * np.sin(2.0 * np.pi * x2 / torus.L2))
    if profile == "gauss-bump":
        a = float(config.get("amplitude", 0.5))
        w = float(config.get("width", 0.1))
        cx, cy = config.get("center", [0.5, 0.5])
        if a <= -1.0 or w <= 0.0:
            raise ConfigError("gauss-bump needs amplitude > -1 and width > 0")
        x1, x2 = torus.grids()
        bump = np.zeros_like(x1)
        for m1 in (-1, 0, 1):  # nearest periodic images; farther ones are negligible
            for m2 in (-1, 0, 1):
                d2 = (x1 - cx - m1 * torus.L1) ** 2 + (x2 - cy - m2 * torus.L2) ** 2
                bump += np.exp(-d2 / (2.0 * w * w))
        return torus.field(1.0 + a * bump)
    raise ConfigError(f"unknown weight profile {profile!r}")


# ----- configuration --------------------------------------------------------------

def _expect(mapping: dict, key: str, kind, default):
    value = mapping.get(key, default)
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r} is invalid: {exc}") from exc


def _lambda_grid(config) -> list[float]:
    if isinstance(config, dict):
        start = float(config.get("start", 10.0))
        stop = float(config.get("stop", 1000.0))
        count = int(config.get("count", 9))
        if config.get("spacing", "log") == "log":
            return list(np.geomspace(start, stop, count))
        return list(np.linspace(start, stop, count))
    return [float(v) for v in config]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs, validated up front and echoed into the manifest."""

    torus: FlatTorus
    curves: CurveSystem
    singular: SingularData
    h1: GridField
    h2: GridField
    rho: RhoPair
    lambdas: tuple[float, ...]
    k: int
    l: int
    r: float
    solver: SolverConfig
    seed: int
    threads: int
    tol: Optional[float]
    out: Path
    resolved: dict  # the full parameter set, for the manifest

    @staticmethod
    def load(config_path: Optional[str], out: str, seed: Optional[int],
             threads: Optional[int], tol: Optional[float]) -> "ExperimentConfig":
        raw = {}
        if config_path is not None:
            try:
                raw = json.loads(Path(config_path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
            if not isinstance(raw, dict):
                raise ConfigError("config root must be a JSON object")

        grid = raw.get("grid", {})
        n = _expect(grid, "n", int, 64)
        periods = grid.get("periods", [1.0, 1.0])
        curves_raw = raw.get("curves", {})
        singular_raw = raw.get("singular", {})
        solver_raw = raw.get("solver", {})
        try:
            torus = FlatTorus(n, float(periods[0]), float(periods[1]))
            curves = CurveSystem(_expect(curves_raw, "c1", float, 0.25),
                                 _expect(curves_raw, "c2", float, 0.75))
            singular = SingularData.of(
                [tuple(p) for p in singular_raw.get("points", [])],
                singular_raw.get("alpha1", []), singular_raw.get("alpha2", []), torus)
            solver = SolverConfig(
                max_iterations=_expect(solver_raw, "max_iterations", int, 2000),
                gradient_tolerance=_expect(solver_raw, "gradient_tolerance", float, 1e-8),
                shrink=_expect(solver_raw, "shrink", float, 0.5),
                sufficient_decrease=_expect(solver_raw, "sufficient_decrease", float, 1e-4),
                preconditioner_shift=_expect(solver_raw, "preconditioner_shift", float, 1.0))
            h_config = raw.get("h", {"profile": "constant"})
            h1 = h_profile(torus, h_config)
            h2 = h_profile(torus, raw.get("h2", h_config))
            rho_raw = raw.get("rho", [2.0 * np.pi, 2.0 * np.pi])
            rho = RhoPair(float(rho_raw[0]), float(rho_raw[1]))
        except ConfigError:
            raise
        except (ValueError, TypeError, IndexError) as exc:
            raise ConfigError(str(exc)) from exc

        lambdas = tuple(_lambda_grid(raw.get("lambdas", {"start": 10.0, "stop": 1000.0,
                                                         "count": 9})))
        resolved = {
            "grid": {"n": torus.n, "periods": [torus.L1, torus.L2]},
            "curves": {"c1": curves.c1, "c2": curves.c2},
            "singular": {"points": [[p.x1, p.x2] for p in singular.points],
                         "alpha1": list(singular.alpha1), "alpha2": list(singular.alpha2)},
            "h": h_config, "h2": raw.get("h2", h_config),
            "rho": [rho.rho1, rho.rho2],
            "lambdas": list(lambdas),
            "k": _expect(raw, "k", int, 1), "l": _expect(raw, "l", int, 1),
            "r": _expect(raw, "r", float, 0.5),
            "solver": {"max_iterations": solver.max_iterations,
                       "gradient_tolerance": solver.gradient_tolerance,
                       "shrink": solver.shrink,
                       "sufficient_decrease": solver.sufficient_decrease,
                       "preconditioner_shift": solver.preconditioner_shift},
            "seed": seed if seed is not None else _expect(raw, "seed", int, 0),
            "threads": threads if threads is not None else _expect(raw, "threads", int, 1),
            "tol": tol if tol is not None else raw.get("tol"),
        }
        for key in ("problem", "initial", "components", "r_values", "lam", "box",
                    "rho_samples", "alpha", "nu", "steps", "coarse_n", "subsamples",
                    "fit_floor", "random_fields", "mass_centers", "mass_radius"):
            if key in raw:
                resolved[key] = raw[key]
        if not 0.0 <= resolved["r"] <= 1.0:
            raise ConfigError(f"join coordinate r must lie in [0, 1], got {resolved['r']}")
        if resolved["k"] < 1 or resolved["l"] < 1:
            raise ConfigError("atom budgets k and l must be at least 1")
        if resolved["threads"] < 1:
            raise ConfigError("thread count must be at least 1")
        if resolved["tol"] is not None and float(resolved["tol"]) <= 0:
            raise ConfigError("tolerance must be positive when given")

        return ExperimentConfig(
            torus=torus, curves=curves, singular=singular, h1=h1, h2=h2, rho=rho,
            lambdas=lambdas, k=resolved["k"], l=resolved["l"], r=resolved["r"],
            solver=solver, seed=int(resolved["seed"]), threads=int(resolved["threads"]),
            tol=None if resolved["tol"] is None else float(resolved["tol"]),
            out=Path(out), resolved=resolved)

    def option(self, key: str, default):
        return self.resolved.get(key, default)

    def join_element(self) -> JoinElement:
        """Atoms spread evenly along each marked circle, snapped to grid nodes."""
        def atoms(count: int, level: float) -> BarycenterMeasure:
            pts = [self.torus.snap(Point((i + 0.5) * self.torus.L1 / count, level))
                   for i in range(count)]
            return BarycenterMeasure.of([1.0 / count] * count, pts, capacity=count)
        return JoinElement(atoms(self.k, self.curves.c1),
                           atoms(self.l, self.curves.c2), self.r)


# ----- serialization helpers ------------------------------------------------------

def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, Point):
        return [value.x1, value.x2]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating))
                             else v for v in row])


def _write_manifest(cfg: ExperimentConfig, subcommand: str) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": cfg.resolved,
        "seed": cfg.seed,
        "threads": cfg.threads,
        "versions": {
            "torusvar": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    _write_json(cfg.out / "manifest.json", manifest)


# ----- subcommands ----------------------------------------------------------------

def _run_quantization(cfg: ExperimentConfig) -> int:
    alpha = cfg.option("alpha", None)
    if alpha is not None:
        a1, a2 = float(alpha[0]), float(alpha[1])
        singular = SingularData.of([(0.5, 0.5)], [a1], [a2], cfg.torus)
    else:
        singular = cfg.singular
    pairs = list(zip(singular.alpha1, singular.alpha2)) or [(0.0, 0.0)]
    box = cfg.option("box", [40.0, 40.0])
    gs = global_lambda(singular, (float(box[0]), float(box[1])))
    report = {
        "local": [{"alpha": [a1, a2],
                   "points": [list(p) for p in local_lambda(a1, a2).points]}
                  for a1, a2 in pairs],
        "candidates": [list(c) for c in blowup_candidates(singular)],
        "global": {
            "box": [float(box[0]), float(box[1])],
            "lambda1": sorted(gs.lambda1),
            "lambda2": sorted(gs.lambda2),
            "lambda0": sorted(map(list, gs.lambda0)),
        },
    }
    membership = []
    for pair in cfg.option("rho_samples", []):
        rho = RhoPair(float(pair[0]), float(pair[1]))
        verdict = global_membership(rho, singular, cfg.tol if cfg.tol else 1e-9)
        membership.append({"rho": [rho.rho1, rho.rho2], "inside": verdict.inside,
                           "distance": verdict.nearest_distance,
                           "witness": _jsonable(verdict.witness)})
    report["membership"] = membership
    _write_json(cfg.out / "quantization.json", report)
    return 0


def _run_test_energy(cfg: ExperimentConfig) -> int:
    problem = cfg.option("problem", "toda")
    subsamples = int(cfg.option("subsamples", 8))
    zeta = cfg.join_element()
    jobs = []
    if problem in ("toda", "both"):
        jobs.append(("toda", lambda: energy_curve(cfg.torus, zeta, cfg.rho, cfg.lambdas,
                                                  cfg.h1, cfg.h2, subsamples)))
    if problem in ("scalar", "both"):
        jobs.append(("scalar", lambda: scalar_energy_curve(cfg.torus, zeta, cfg.rho,
                                                           cfg.lambdas, cfg.h1, subsamples)))
    if not jobs:
        raise ConfigError(f"problem must be 'toda', 'scalar' or 'both', got {problem!r}")
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        curves = [(name, fut.result()) for name, fut in
                  [(name, pool.submit(job)) for name, job in jobs]]
    rows = [(name, lam, s1, s2, val) for name, curve in curves
            for lam, s1, s2, val in curve.rows()]
    _write_csv(cfg.out / "energy.csv",
               ["problem", "lambda", "scale1", "scale2", "value"], rows)
    slopes = {}
    for name, curve in curves:
        per_bubble = 8.0 * np.pi if name == "toda" else 16.0 * np.pi
        predicted = 0.0
        if cfg.r < 1.0:  # the first family only contributes while its scale grows
            predicted += per_bubble * cfg.k - 2.0 * cfg.rho.rho1
        if cfg.r > 0.0:
            predicted += per_bubble * cfg.l - 2.0 * cfg.rho.rho2
        slopes[name] = {"slope": curve.slope, "predicted": predicted}
    _write_json(cfg.out / "slopes.json", slopes)
    return 0


def _run_kr_scaling(cfg: ExperimentConfig) -> int:
    components = [int(c) for c in cfg.option("components", [1, 2])]
    zeta = cfg.join_element()
    coarse_n = int(cfg.option("coarse_n", 48))
    subsamples = int(cfg.option("subsamples", 8))
    fit_floor = float(cfg.option("fit_floor", 10.0))

    def job(component: int):
        return kr_scaling_check(cfg.torus, zeta, cfg.lambdas, component, cfg.h1, cfg.h2,
                                subsamples=subsamples, coarse_n=coarse_n,
                                fit_floor=fit_floor)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        curves = list(zip(components, pool.map(job, components)))
    rows = [(c, lam, s1, s2, d) for c, curve in curves
            for lam, s1, s2, d in curve.rows()]
    _write_csv(cfg.out / "kr.csv",
               ["component", "lambda", "scale1", "scale2", "distance"], rows)
    _write_json(cfg.out / "kr.json",
                {f"component{c}": {"slope": curve.slope} for c, curve in curves})
    return 0


def _run_projection(cfg: ExperimentConfig) -> int:
    validate_singular_clearance(cfg.torus, cfg.singular, cfg.curves)
    lam = float(cfg.option("lam", 1000.0))
    r_values = [float(r) for r in cfg.option("r_values", [0.0, 0.5, 1.0])]
    subsamples = int(cfg.option("subsamples", 8))
    coarse_n = int(cfg.option("coarse_n", 48))
    base = cfg.join_element()

    def job(r: float):
        zeta = JoinElement(base.sigma1, base.sigma2, r)
        validate_on_curves(zeta, cfg.curves, cfg.torus)
        return homotopy_identity_check(cfg.torus, zeta, lam, cfg.h1, cfg.h2, cfg.curves,
                                       subsamples=subsamples, coarse_n=coarse_n)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        reports = list(zip(r_values, pool.map(job, r_values)))
    _write_csv(cfg.out / "projection.csv",
               ["r", "displacement1", "displacement2", "r_deviation"],
               [(r, rep.atom_displacement_1, rep.atom_displacement_2, rep.r_deviation)
                for r, rep in reports])
    _write_json(cfg.out / "projection.json",
                {"lambda": lam,
                 "worst_displacement": max(max(rep.atom_displacement_1,
                                               rep.atom_displacement_2)
                                           for _, rep in reports),
                 "worst_r_deviation": max(rep.r_deviation for _, rep in reports)})
    return 0


def _run_mt_check(cfg: ExperimentConfig) -> int:
    subsamples = int(cfg.option("subsamples", 8))
    zeta = cfg.join_element()
    pure = JoinElement(zeta.sigma1, zeta.sigma2, 0.0)  # single-family bubble for the ratio
    rows = []
    ratios = []
    gaps = []
    for lam in cfg.lambdas:
        u = scalar_test_function(cfg.torus, pure, lam, subsamples)
        ratio = mt_ratio(u)
        ratios.append(ratio)
        rows.append(("bubble-ratio", lam, ratio))
        phi1, phi2 = test_function(cfg.torus, zeta, lam, subsamples)
        gap = mt_system_gap(phi1, phi2, cfg.h1, cfg.h2)
        gaps.append(gap)
        rows.append(("system-gap", lam, gap))
    rng = np.random.default_rng(cfg.seed)
    random_ratios = []
    for index in range(int(cfg.option("random_fields", 5))):
        u = random_smooth_field(cfg.torus, rng, modes=4, scale=1.5)
        ratio = mt_ratio(u)
        random_ratios.append(ratio)
        rows.append(("random-ratio", float(index), ratio))
    _write_csv(cfg.out / "mt.csv", ["case", "lambda", "value"], rows)
    _write_json(cfg.out / "mt.json", {
        "max_bubble_ratio": max(ratios),
        "min_system_gap": min(gaps),
        "max_random_ratio": max(random_ratios) if random_ratios else None,
    })
    return 0


def _gate_on_forbidden_set(cfg: ExperimentConfig, problem: str) -> None:
    """Refuse interaction strengths within tol of the forbidden set (when gated)."""
    if cfg.tol is None:
        return
    if problem == "toda":
        verdict = global_membership(cfg.rho, cfg.singular, cfg.tol)
        if verdict.inside:
            raise ValueError(
                f"rho = ({cfg.rho.rho1:.6f}, {cfg.rho.rho2:.6f}) lies within "
                f"{cfg.tol} of the forbidden set (witness: {verdict.witness})")
    elif scalar_forbidden(cfg.rho, cfg.tol):
        raise ValueError(
            f"rho = ({cfg.rho.rho1:.6f}, {cfg.rho.rho2:.6f}) lies within "
            f"{cfg.tol} of a multiple of 8 pi")


def _run_solve(cfg: ExperimentConfig) -> int:
    problem = cfg.option("problem", "toda")
    if problem not in ("toda", "meanfield"):
        raise ConfigError(f"problem must be 'toda' or 'meanfield', got {problem!r}")
    _gate_on_forbidden_set(cfg, problem)
    weights = (cfg.h1, cfg.h2) if problem == "toda" else cfg.h1
    initial = None
    if cfg.option("initial", "zero") == "random":
        rng = np.random.default_rng(cfg.seed)
        count = 2 if problem == "toda" else 1
        initial = tuple(random_smooth_field(cfg.torus, rng, modes=4, scale=0.5)
                        for _ in range(count))
    result = minimize(problem, weights, cfg.rho, cfg.singular, cfg.solver, initial)
    residual = pde_residual(result.u, weights, cfg.rho, cfg.singular)
    names = ("u1", "u2") if problem == "toda" else ("u",)
    for name, component in zip(names, result.u):
        write_field(cfg.out / f"solution_{name}.bin", component, name)
    report = {
        "problem": problem,
        "rho": [cfg.rho.rho1, cfg.rho.rho2],
        "energy": result.energy,
        "residual_norm": result.residual_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "coercive": result.coercive,
        "pde_residual": residual,
    }
    centers = [Point(float(p[0]), float(p[1])) for p in cfg.option("mass_centers", [])]
    if centers:
        radius = float(cfg.option("mass_radius", 5.0 * cfg.torus.max_spacing))
        masses = blowup_masses(result.u, weights, cfg.rho, centers, radius, cfg.singular)
        report["mass_report"] = [{
            "center": [m.center.x1, m.center.x2],
            "masses": list(m.masses),
            "nearest_candidate": list(m.nearest_candidate),
            "candidate_distance": m.candidate_distance,
        } for m in masses]
    _write_json(cfg.out / "solve.json", report)
    return 0 if result.converged else 4


def _run_continuation(cfg: ExperimentConfig) -> int:
    problem = cfg.option("problem", "toda")
    if problem not in ("toda", "meanfield"):
        raise ConfigError(f"problem must be 'toda' or 'meanfield', got {problem!r}")
    nu = float(cfg.option("nu", 0.5))
    steps = int(cfg.option("steps", 5))
    weights = (cfg.h1, cfg.h2) if problem == "toda" else cfg.h1
    results = continuation_sweep(problem, cfg.rho, nu, steps, weights, cfg.singular,
                                 cfg.solver)
    mus = np.linspace(-nu, nu, steps)
    _write_csv(cfg.out / "continuation.csv",
               ["mu", "rho1", "rho2", "energy", "iterations", "residual_norm",
                "converged"],
               [(float(mu), cfg.rho.rho1 + float(mu), cfg.rho.rho2 + float(mu),
                 r.energy, r.iterations, r.residual_norm, int(r.converged))
                for mu, r in zip(mus, results)])
    _write_json(cfg.out / "continuation.json", {
        "nu": nu, "steps": steps,
        "all_converged": all(r.converged for r in results),
        "energies": [r.energy for r in results],
    })
    return 0 if all(r.converged for r in results) else 4


_RUNNERS = {
    "quantization": _run_quantization,
    "test-energy": _run_test_energy,
    "kr-scaling": _run_kr_scaling,
    "projection": _run_projection,
    "mt-check": _run_mt_check,
    "solve": _run_solve,
    "continuation": _run_continuation,
}


def run(subcommand: str, cfg: ExperimentConfig) -> int:
    """Dispatch a subcommand; the manifest is written before any work starts."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    _write_manifest(cfg, subcommand)
    return _RUNNERS[subcommand](cfg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="torusvar",
        description="Variational experiments on the flat torus: energies on bubble "
                    "families, transport projections, quantization tables, solves.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
        p.add_argument("--threads", type=int, help="worker threads (overrides config)")
        p.add_argument("--tol", type=float,
                       help="forbidden-set gate tolerance (overrides config)")
    args = parser.parse_args(argv)

    try:
        cfg = ExperimentConfig.load(args.config, args.out, args.seed, args.threads,
                                    args.tol)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(args.subcommand, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"precondition failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
