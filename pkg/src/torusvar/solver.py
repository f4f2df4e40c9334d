"""Energy minimization in coercive regimes, residual certification, continuation.

The descent direction is the L2 gradient smoothed by the spectral inverse of
(-Laplacian + tau) — the natural H1-type preconditioner on the torus — with
Armijo backtracking and a mean-zero gauge applied to every iterate (the
energies only see mean-free fields).  Convergence is declared on the L2 norm
of the preconditioned gradient.

`pde_residual` assembles the strong-form equations directly (its own density
normalization, not the energy-gradient code path) so a converged result can
be certified independently.  `continuation_sweep` walks a diagonal segment of
interaction strengths, warm-starting each solve from the previous one, after
checking that the surrounding box stays clear of the forbidden quantization
set.  `blowup_masses` reports local exponential masses around candidate
concentration points against the quantization tables — a diagnostic, never an
assertion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .functionals import (
    RhoPair,
    meanfield_energy,
    meanfield_gradient,
    toda_energy,
    toda_gradient,
)
from .geometry import (
    FlatTorus,
    GridField,
    Point,
    SingularData,
    desingularized_weight,
    helmholtz_solve,
    integrate,
    laplacian_array,
)
from .quantization import blowup_candidates, global_lambda


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 2000
    gradient_tolerance: float = 1e-8
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    preconditioner_shift: float = 1.0

    def __post_init__(self) -> None:
        if self.gradient_tolerance <= 0:
            raise ValueError("gradient tolerance must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("backtracking shrink factor must lie in (0, 1)")
        if self.preconditioner_shift <= 0:
            raise ValueError("preconditioner shift must be positive")


@dataclass(frozen=True)
class SolveResult:
    u: tuple[GridField, ...]
    energy: float
    residual_norm: float
    iterations: int
    converged: bool
    coercive: bool
    mass_report: tuple = ()


def _weights(problem: str, h, singular: SingularData) -> tuple[GridField, GridField]:
    """Resolve the (possibly singular) weights for either problem.

    The two-component problem desingularizes each component with its own
    weight list; the scalar problem uses the first list for both exponential
    terms (its marked points carry a single weight)."""
    if problem == "toda":
        h1, h2 = h if isinstance(h, (tuple, list)) else (h, h)
        return (desingularized_weight(h1, singular, 1),
                desingularized_weight(h2, singular, 2))
    if problem == "meanfield":
        if isinstance(h, (tuple, list)):
            raise ValueError("the scalar problem takes a single weight field")
        ht = desingularized_weight(h, singular, 1)
        return (ht, ht)
    raise ValueError(f"unknown problem {problem!r} (expected 'toda' or 'meanfield')")


def _is_coercive(problem: str, rho: RhoPair) -> bool:
    limit = 4.0 * np.pi if problem == "toda" else 8.0 * np.pi
    return rho.rho1 < limit and rho.rho2 < limit


def minimize(problem: str, h, rho: RhoPair, singular: SingularData,
             config: SolverConfig = SolverConfig(),
             initial: Optional[tuple[GridField, ...]] = None) -> SolveResult:
    """Preconditioned descent on the chosen energy from the given (or zero) state."""
    h1, h2 = _weights(problem, h, singular)
    torus = h1.torus
    tau = config.preconditioner_shift
    ncomp = 2 if problem == "toda" else 1
    if initial is None:
        state = [np.zeros((torus.n, torus.n)) for _ in range(ncomp)]
    else:
        if len(initial) != ncomp:
            raise ValueError(f"initial guess must have {ncomp} component(s)")
        state = [f.values - f.values.mean() for f in initial]

    def energy(vals: list[np.ndarray]) -> float:
        if problem == "toda":
            return toda_energy(GridField(torus, vals[0]), GridField(torus, vals[1]),
                               h1, h2, rho).total
        return meanfield_energy(GridField(torus, vals[0]), h1, rho).total

    def grad(vals: list[np.ndarray]) -> list[np.ndarray]:
        if problem == "toda":
            g1, g2 = toda_gradient(GridField(torus, vals[0]), GridField(torus, vals[1]),
                                   h1, h2, rho)
            return [g1.values, g2.values]
        return [meanfield_gradient(GridField(torus, vals[0]), h1, rho).values]

    current = energy(state)
    converged = False
    residual = np.inf
    iterations = 0
    for iterations in range(config.max_iterations + 1):
        g = grad(state)
        direction = [-helmholtz_solve(torus, gi, tau) for gi in g]
        residual = float(np.sqrt(sum((d * d).sum() for d in direction) * torus.cell_area))
        if residual <= config.gradient_tolerance:
            converged = True
            break
        if iterations == config.max_iterations:
            break
        slope = float(sum((gi * di).sum() for gi, di in zip(g, direction)) * torus.cell_area)
        if slope >= 0.0:
            break  # no descent available: stagnate honestly
        step = 1.0
        accepted = False
        while step > 1e-16:
            trial = [s + step * d for s, d in zip(state, direction)]
            trial = [t - t.mean() for t in trial]
            value = energy(trial)
            if value <= current + config.sufficient_decrease * step * slope:
                accepted = True
                break
            step *= config.shrink
        if not accepted:
            break
        if value > current + 1e-12:
            raise RuntimeError("line search accepted an energy increase")
        stalled = current - value <= 4.0 * np.finfo(float).eps * (1.0 + abs(current))
        state, current = trial, value
        if stalled:
            break  # energy is at the floating-point floor; no further progress

    if not converged:
        g = grad(state)
        direction = [-helmholtz_solve(torus, gi, tau) for gi in g]
        residual = float(np.sqrt(sum((d * d).sum() for d in direction) * torus.cell_area))
        converged = residual <= config.gradient_tolerance

    fields = tuple(GridField(torus, s) for s in state)
    return SolveResult(fields, current, residual, iterations, converged,
                       _is_coercive(problem, rho))


def pde_residual(u: Sequence[GridField], h, rho: RhoPair, singular: SingularData) -> float:
    """L2 norm of the strong-form equations, assembled from scratch.

    Two components: -Lap u1 = 2 rho1 (f1 - 1) - rho2 (f2 - 1) and its mirror.
    One component: -Lap u = rho1 (f+ - 1) - rho2 (f- - 1)."""
    problem = "toda" if len(u) == 2 else "meanfield"
    h1, h2 = _weights(problem, h, singular)
    torus = u[0].torus

    def density(vals: np.ndarray, weight: np.ndarray) -> np.ndarray:
        shift = vals.max()
        raw = weight * np.exp(vals - shift)
        return raw / (raw.sum() * torus.cell_area)

    if problem == "toda":
        f1 = density(u[0].values, h1.values)
        f2 = density(u[1].values, h2.values)
        r1 = -laplacian_array(torus, u[0].values) \
            - 2.0 * rho.rho1 * (f1 - 1.0) + rho.rho2 * (f2 - 1.0)
        r2 = -laplacian_array(torus, u[1].values) \
            - 2.0 * rho.rho2 * (f2 - 1.0) + rho.rho1 * (f1 - 1.0)
        return float(np.sqrt(((r1 * r1 + r2 * r2).sum()) * torus.cell_area))
    f_plus = density(u[0].values, h1.values)
    f_minus = density(-u[0].values, h1.values)
    r = -laplacian_array(torus, u[0].values) \
        - rho.rho1 * (f_plus - 1.0) + rho.rho2 * (f_minus - 1.0)
    return float(np.sqrt((r * r).sum() * torus.cell_area))


def check_continuation_box(problem: str, rho_center: RhoPair, nu: float,
                           singular: SingularData) -> None:
    """Require the 2-nu box around rho_center to avoid the forbidden set;
    raises naming the offending line or point."""
    r1, r2 = rho_center.rho1, rho_center.rho2
    if problem == "meanfield":
        step = 8.0 * np.pi
        for label, value in (("first", r1), ("second", r2)):
            n = max(1, int(round(value / step)))
            if abs(value - n * step) <= 2.0 * nu:
                raise ValueError(
                    f"continuation box hits the scalar forbidden line {n}*8pi"
                    f" = {n * step:.6f} in the {label} coordinate")
        return
    gs = global_lambda(singular, (r1 + 2.0 * nu, r2 + 2.0 * nu))
    for v in gs.lambda1:
        if abs(r1 - v) <= 2.0 * nu:
            raise ValueError(f"continuation box crosses the vertical line rho1 = {v:.6f}")
    for v in gs.lambda2:
        if abs(r2 - v) <= 2.0 * nu:
            raise ValueError(f"continuation box crosses the horizontal line rho2 = {v:.6f}")
    for p in gs.lambda0:
        if abs(r1 - p[0]) <= 2.0 * nu and abs(r2 - p[1]) <= 2.0 * nu:
            raise ValueError(f"continuation box contains the forbidden point {p}")


def continuation_sweep(problem: str, rho_center: RhoPair, nu: float, steps: int,
                       h, singular: SingularData,
                       config: SolverConfig = SolverConfig()) -> list[SolveResult]:
    """Solve along rho_center + (mu, mu), mu in [-nu, nu], warm-starting each
    step from the previous solution."""
    if steps < 1:
        raise ValueError("need at least one continuation step")
    check_continuation_box(problem, rho_center, nu, singular)
    mus = np.linspace(-nu, nu, steps)
    results = []
    warm: Optional[tuple[GridField, ...]] = None
    for mu in mus:
        rho = RhoPair(rho_center.rho1 + mu, rho_center.rho2 + mu)
        result = minimize(problem, h, rho, singular, config, initial=warm)
        results.append(result)
        if result.converged:
            warm = result.u
    return results


@dataclass(frozen=True)
class MassReport:
    center: Point
    masses: tuple[float, ...]
    nearest_candidate: tuple[float, ...]
    candidate_distance: float


def blowup_masses(u: Sequence[GridField], h, rho: RhoPair, centers: Sequence[Point],
                  r: float, singular: SingularData = SingularData.empty()) -> list[MassReport]:
    """Local exponential masses rho_i * (f_i mass in B_r(center)) per center,
    with the nearest quantization-table entry for reference."""
    problem = "toda" if len(u) == 2 else "meanfield"
    h1, h2 = _weights(problem, h, singular)
    torus = u[0].torus
    if r <= 2.0 * torus.max_spacing:
        raise ValueError(f"ball radius {r} must exceed two grid spacings")

    def local_fraction(vals: np.ndarray, weight: np.ndarray, ball: np.ndarray) -> float:
        shift = vals.max()
        raw = weight * np.exp(vals - shift)
        return float(raw[ball].sum() / raw.sum())

    reports = []
    for center in centers:
        ball = torus.distance_field(center) <= r
        if problem == "toda":
            masses = (rho.rho1 * local_fraction(u[0].values, h1.values, ball),
                      rho.rho2 * local_fraction(u[1].values, h2.values, ball))
        else:
            masses = (rho.rho1 * local_fraction(u[0].values, h1.values, ball),
                      rho.rho2 * local_fraction(-u[0].values, h1.values, ball))
        # candidate table at the nearest marked point if the ball reaches it
        index = None
        for j, p in enumerate(singular.points):
            if torus.distance(center, p) <= r:
                index = j
                break
        if problem == "toda":
            table = blowup_candidates(singular, index)
        else:
            values = [8.0 * np.pi * n for n in range(1, 6)]
            if index is not None:
                values.append(4.0 * np.pi * (1.0 + singular.alpha1[index]))
            table = tuple((v, w) for v in values for w in values)
        best = min(table, key=lambda c: np.hypot(c[0] - masses[0], c[1] - masses[1]))
        dist = float(np.hypot(best[0] - masses[0], best[1] - masses[1]))
        reports.append(MassReport(center, masses, best, dist))
    return reports
