"""Energy functionals on the torus and their L2 gradients.

Two variational problems share this module:

* the two-component system energy
      J_rho(u1, u2) = int Q(u1, u2) + sum_i rho_i (int u_i - log int h_i e^{u_i}),
  with Q = (1/3)(|grad u1|^2 + |grad u2|^2 + grad u1 . grad u2);
* the scalar sinh-type energy
      I_rho(u) = 1/2 int |grad u|^2 - rho_1 (log int h e^u - int u)
                                    - rho_2 (log int h e^{-u} + int u).

Both are invariant under adding constants to the unknowns, so every
exponential integral is evaluated with a max-shifted log-sum-exp and the
returned gradients have zero mean.  Diagnostic ratios for the sharp
exponential-integrability (Moser-Trudinger type) constants live here too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    GridField,
    dirichlet_energy,
    gradient_arrays,
    integrate,
    laplacian_array,
)


@dataclass(frozen=True)
class RhoPair:
    """The two interaction strengths (rho1, rho2)."""

    rho1: float
    rho2: float

    def __post_init__(self) -> None:
        if self.rho1 < 0 or self.rho2 < 0:
            raise ValueError(f"interaction strengths must be non-negative, got {self}")

    def __iter__(self):
        return iter((self.rho1, self.rho2))


@dataclass(frozen=True)
class EnergyReport:
    """Decomposed energy value: total = dirichlet + sum_i rho_i (average_i - logexp_i)."""

    dirichlet: float
    average_terms: tuple[float, float]
    logexp_terms: tuple[float, float]
    total: float

    @staticmethod
    def assemble(dirichlet: float, averages: tuple[float, float],
                 logexps: tuple[float, float], rho: RhoPair) -> "EnergyReport":
        total = dirichlet + rho.rho1 * (averages[0] - logexps[0]) \
            + rho.rho2 * (averages[1] - logexps[1])
        return EnergyReport(dirichlet, averages, logexps, total)


def log_integral_exp(u: GridField, weight: GridField) -> float:
    """log int( weight * e^u ) with a max shift; weight >= 0, positive integral."""
    if u.torus is not weight.torus and u.torus != weight.torus:
        raise ValueError("field and weight live on different grids")
    w = weight.values
    if w.min() < 0 or w.max() <= 0:
        raise ValueError("weight must be non-negative with positive integral")
    with np.errstate(divide="ignore"):
        t = u.values + np.log(w)
    m = t.max()
    return float(m + np.log(np.exp(t - m).sum() * u.torus.cell_area))


def normalized_density(u: GridField, weight: GridField) -> GridField:
    """The probability density weight * e^u / int(weight * e^u)."""
    logint = log_integral_exp(u, weight)
    with np.errstate(divide="ignore"):
        t = u.values + np.log(weight.values)
    return GridField(u.torus, np.exp(t - logint))


# ----- two-component system -------------------------------------------------

def q_density(u1: GridField, u2: GridField) -> GridField:
    """Pointwise interaction density (1/3)(|grad u1|^2 + |grad u2|^2 + grad u1 . grad u2).

    The underlying quadratic form has eigenvalues 1/6 and 1/2, so the output is
    non-negative up to round-off."""
    a1, a2 = gradient_arrays(u1.torus, u1.values)
    b1, b2 = gradient_arrays(u2.torus, u2.values)
    q = (a1 * a1 + a2 * a2 + b1 * b1 + b2 * b2 + a1 * b1 + a2 * b2) / 3.0
    return GridField(u1.torus, q)


def toda_energy(u1: GridField, u2: GridField, h1: GridField, h2: GridField,
                rho: RhoPair) -> EnergyReport:
    """J_rho(u1, u2) = int Q + sum_i rho_i (int u_i - log int h_i e^{u_i})."""
    dirichlet = integrate(q_density(u1, u2))
    averages = (integrate(u1), integrate(u2))
    logexps = (log_integral_exp(u1, h1), log_integral_exp(u2, h2))
    return EnergyReport.assemble(dirichlet, averages, logexps, rho)


def toda_gradient(u1: GridField, u2: GridField, h1: GridField, h2: GridField,
                  rho: RhoPair) -> tuple[GridField, GridField]:
    """L2 gradient of J_rho; both components returned with exactly zero mean.

    A zero of this pair solves the strong system
        -Lap u1 = 2 rho1 (f1 - 1) - rho2 (f2 - 1),
        -Lap u2 = 2 rho2 (f2 - 1) - rho1 (f1 - 1),
    with f_i = h_i e^{u_i} / int h_i e^{u_i}."""
    lap1 = laplacian_array(u1.torus, u1.values)
    lap2 = laplacian_array(u2.torus, u2.values)
    f1 = normalized_density(u1, h1).values
    f2 = normalized_density(u2, h2).values
    g1 = -(2.0 / 3.0) * lap1 - (1.0 / 3.0) * lap2 + rho.rho1 * (1.0 - f1)
    g2 = -(1.0 / 3.0) * lap1 - (2.0 / 3.0) * lap2 + rho.rho2 * (1.0 - f2)
    g1 -= g1.mean()
    g2 -= g2.mean()
    return GridField(u1.torus, g1), GridField(u2.torus, g2)


# ----- scalar sinh-type functional ------------------------------------------

def meanfield_energy(u: GridField, h: GridField, rho: RhoPair) -> EnergyReport:
    """I_rho(u) with the two exponential terms carrying opposite signs of u."""
    dirichlet = 0.5 * dirichlet_energy(u)
    avg = integrate(u)
    minus_u = GridField(u.torus, -u.values)
    logexps = (log_integral_exp(u, h), log_integral_exp(minus_u, h))
    return EnergyReport.assemble(dirichlet, (avg, -avg), logexps, rho)


def meanfield_gradient(u: GridField, h: GridField, rho: RhoPair) -> GridField:
    """L2 gradient of I_rho, zero exactly when
    -Lap u = rho1 (f+ - 1) - rho2 (f- - 1), f+- = h e^{+-u} / int h e^{+-u}."""
    lap = laplacian_array(u.torus, u.values)
    f_plus = normalized_density(u, h).values
    f_minus = normalized_density(GridField(u.torus, -u.values), h).values
    g = -lap - rho.rho1 * (f_plus - 1.0) + rho.rho2 * (f_minus - 1.0)
    g -= g.mean()
    return GridField(u.torus, g)


# ----- sharp-constant diagnostics -------------------------------------------

def mt_ratio(u: GridField) -> float:
    """Saturation ratio log int e^{u - mean(u)} over (1/16pi) int |grad u|^2.

    The exponential-integrability inequality bounds the numerator by the
    denominator plus a constant, so concentrated peaks push the ratio
    toward 1 while smooth small fields keep it near 0."""
    dirichlet = dirichlet_energy(u)
    if dirichlet < 1e-14:
        raise ValueError("ratio undefined for (numerically) constant fields")
    mean = integrate(u) / (u.torus.L1 * u.torus.L2)
    centered = GridField(u.torus, u.values - mean)
    ones = u.torus.constant_field(1.0)
    numer = log_integral_exp(centered, ones)
    return float(numer / (dirichlet / (16.0 * np.pi)))


def mt_system_gap(u1: GridField, u2: GridField, h1: GridField, h2: GridField) -> float:
    """int Q - 4 pi sum_i (log int h_i e^{u_i} - int u_i); bounded below over all pairs."""
    dirichlet = integrate(q_density(u1, u2))
    gap = dirichlet
    for u, h in ((u1, h1), (u2, h2)):
        gap -= 4.0 * np.pi * (log_integral_exp(u, h) - integrate(u))
    return float(gap)
