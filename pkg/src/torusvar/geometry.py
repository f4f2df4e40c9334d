"""Flat-torus discretization: metric, quadrature, spectral calculus, Green's functions.

Everything lives on a periodic n-by-n grid over [0, L1) x [0, L2) with
L1 * L2 = 1 (unit total area).  Fields are sampled at the nodes
(i * L1/n, j * L2/n); axis 0 of a value array runs along x1, axis 1 along x2.
Derivatives and Poisson solves are spectral (discrete Fourier), so smooth
periodic fields are differentiated to near machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np


class Point(NamedTuple):
    """A point on the torus; coordinates are kept reduced to [0, L1) x [0, L2)."""

    x1: float
    x2: float


@dataclass(frozen=True)
class FlatTorus:
    """Unit-area flat torus R^2 / (L1*Z x L2*Z) discretized on an n x n node grid."""

    n: int
    L1: float = 1.0
    L2: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 16 or self.n % 2 != 0:
            raise ValueError(f"grid resolution must be even and >= 16, got n={self.n}")
        if abs(self.L1 * self.L2 - 1.0) > 1e-12:
            raise ValueError(f"periods must have unit area, got L1*L2={self.L1 * self.L2!r}")

    @property
    def spacing(self) -> tuple[float, float]:
        """Grid spacing per axis, (L1/n, L2/n)."""
        return (self.L1 / self.n, self.L2 / self.n)

    @property
    def max_spacing(self) -> float:
        return max(self.spacing)

    @property
    def cell_area(self) -> float:
        return (self.L1 * self.L2) / (self.n * self.n)

    # ----- points and nodes -------------------------------------------------

    def point(self, x1: float, x2: float) -> Point:
        """Reduce raw coordinates into the fundamental domain."""
        return Point(float(x1) % self.L1, float(x2) % self.L2)

    def node_point(self, i: int, j: int) -> Point:
        h1, h2 = self.spacing
        return self.point(i * h1, j * h2)

    def nearest_node(self, p: Point) -> tuple[int, int]:
        """Indices of the grid node closest to p."""
        h1, h2 = self.spacing
        return (int(round(p.x1 / h1)) % self.n, int(round(p.x2 / h2)) % self.n)

    def snap(self, p: Point) -> Point:
        """The grid node closest to p, as a Point."""
        return self.node_point(*self.nearest_node(p))

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates along each axis."""
        h1, h2 = self.spacing
        return (np.arange(self.n) * h1, np.arange(self.n) * h2)

    def grids(self) -> tuple[np.ndarray, np.ndarray]:
        """Full coordinate meshes X1, X2 with indexing (x1-axis, x2-axis)."""
        x1, x2 = self.axes()
        return np.meshgrid(x1, x2, indexing="ij")

    # ----- metric -----------------------------------------------------------

    def distance(self, a: Point, b: Point) -> float:
        """Flat distance: minimum over lattice translates of the Euclidean distance."""
        d1 = _min_image(a.x1 - b.x1, self.L1)
        d2 = _min_image(a.x2 - b.x2, self.L2)
        return float(np.hypot(d1, d2))

    def distance_field(self, p: Point, offset: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
        """Distances d(node + offset, p) for all grid nodes, as a raw n x n array."""
        x1, x2 = self.axes()
        d1 = _min_image(x1 + offset[0] - p.x1, self.L1)
        d2 = _min_image(x2 + offset[1] - p.x2, self.L2)
        return np.hypot(d1[:, None], d2[None, :])

    def displacement(self, a: np.ndarray, b: np.ndarray, axis_length: float) -> np.ndarray:
        """Signed minimum-image displacement a - b along one axis (vectorized)."""
        return (np.asarray(a) - np.asarray(b) + axis_length / 2.0) % axis_length - axis_length / 2.0

    # ----- fields -----------------------------------------------------------

    def field(self, values: np.ndarray) -> "GridField":
        return GridField(self, values)

    def constant_field(self, c: float = 0.0) -> "GridField":
        return GridField(self, np.full((self.n, self.n), float(c)))

    def field_from_function(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                            subsamples: int = 1) -> "GridField":
        """Sample fn(x1, x2) on the nodes; subsamples > 1 averages fn over an
        m x m midpoint refinement of each cell (useful for under-resolved peaks)."""
        if subsamples == 1:
            X1, X2 = self.grids()
            return GridField(self, np.asarray(fn(X1, X2), dtype=float))
        acc = np.zeros((self.n, self.n))
        X1, X2 = self.grids()
        for o1, o2 in subcell_offsets(self, subsamples):
            acc += fn(X1 + o1, X2 + o2)
        return GridField(self, acc / subsamples**2)


def _min_image(delta, length: float):
    """Reduce a coordinate difference to the minimum-image magnitude in [0, length/2].

    Works on |delta| so that swapping the arguments gives the bit-identical
    magnitude (adding the half-period first is one ulp short of symmetric)."""
    folded = np.abs(np.asarray(delta)) % length
    return np.minimum(folded, length - folded)


def subcell_offsets(torus: FlatTorus, m: int) -> list[tuple[float, float]]:
    """Midpoint offsets of an m x m refinement of one grid cell, centered on the node."""
    h1, h2 = torus.spacing
    a1 = ((np.arange(m) + 0.5) / m - 0.5) * h1
    a2 = ((np.arange(m) + 0.5) / m - 0.5) * h2
    return [(float(o1), float(o2)) for o1 in a1 for o2 in a2]


@dataclass
class GridField:
    """A real scalar field sampled on the torus grid."""

    torus: FlatTorus
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        n = self.torus.n
        if self.values.shape != (n, n):
            raise ValueError(f"field shape {self.values.shape} does not match grid {(n, n)}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    def copy(self) -> "GridField":
        return GridField(self.torus, self.values.copy())


@dataclass(frozen=True)
class SingularData:
    """Marked points p_j with per-component weights alpha1_j, alpha2_j >= 0."""

    points: tuple[Point, ...]
    alpha1: tuple[float, ...]
    alpha2: tuple[float, ...]

    def __post_init__(self) -> None:
        m = len(self.points)
        if len(self.alpha1) != m or len(self.alpha2) != m:
            raise ValueError("points and weight lists must have equal length")
        if any(a < 0 for a in self.alpha1) or any(a < 0 for a in self.alpha2):
            raise ValueError("singular weights must be non-negative")
        for i in range(m):
            for j in range(i + 1, m):
                if (abs(self.points[i].x1 - self.points[j].x1) < 1e-12
                        and abs(self.points[i].x2 - self.points[j].x2) < 1e-12):
                    raise ValueError(f"singular points {i} and {j} coincide")

    def __len__(self) -> int:
        return len(self.points)

    @staticmethod
    def empty() -> "SingularData":
        return SingularData((), (), ())

    @staticmethod
    def of(points: Sequence[tuple[float, float]], alpha1: Sequence[float],
           alpha2: Sequence[float], torus: FlatTorus) -> "SingularData":
        """Convenience constructor reducing raw coordinates into the torus domain."""
        pts = tuple(torus.point(*p) for p in points)
        return SingularData(pts, tuple(float(a) for a in alpha1), tuple(float(a) for a in alpha2))


@dataclass(frozen=True)
class CurveSystem:
    """Two disjoint horizontal circles gamma_i = {x2 = c_i} with their retractions."""

    c1: float
    c2: float

    def __post_init__(self) -> None:
        if self.c1 == self.c2:
            raise ValueError("curve levels must be distinct")

    def level(self, i: int) -> float:
        if i not in (1, 2):
            raise ValueError(f"component must be 1 or 2, got {i}")
        return self.c1 if i == 1 else self.c2

    def retract(self, i: int, x: Point) -> Point:
        """Project onto gamma_i by freezing the vertical coordinate."""
        return Point(x.x1, self.level(i))


def validate_singular_clearance(torus: FlatTorus, singular: SingularData,
                                curves: CurveSystem) -> None:
    """Require every singular point to stay > 2 grid spacings away from both circles."""
    margin = 2.0 * torus.max_spacing
    for j, p in enumerate(singular.points):
        for i in (1, 2):
            gap = float(_min_image(p.x2 - curves.level(i), torus.L2))
            if gap <= margin:
                raise ValueError(
                    f"singular point {j} at {tuple(p)} lies {gap:.4g} from curve {i}"
                    f" (needs > {margin:.4g})")


# ----- spectral calculus ----------------------------------------------------

@lru_cache(maxsize=64)
def _spectral_tables(torus: FlatTorus) -> dict:
    """Wavenumber tables for an n x n grid: first-derivative symbols drop the
    Nyquist mode (odd derivative of a real field), the Laplacian keeps it."""
    n = torus.n
    h1, h2 = torus.spacing
    k1 = 2.0 * np.pi * np.fft.fftfreq(n, d=h1)
    k2 = 2.0 * np.pi * np.fft.fftfreq(n, d=h2)
    minus_lap = k1[:, None] ** 2 + k2[None, :] ** 2
    k1d = k1.copy()
    k2d = k2.copy()
    k1d[n // 2] = 0.0
    k2d[n // 2] = 0.0
    return {"minus_lap": minus_lap, "k1d": k1d[:, None], "k2d": k2d[None, :]}


def integrate(f: GridField) -> float:
    """Riemann (midpoint) quadrature: sum of node values times the cell area."""
    return float(f.values.sum() * f.torus.cell_area)


def gradient(f: GridField) -> tuple[GridField, GridField]:
    """Spectral gradient (d/dx1, d/dx2)."""
    g1, g2 = gradient_arrays(f.torus, f.values)
    return GridField(f.torus, g1), GridField(f.torus, g2)


def gradient_arrays(torus: FlatTorus, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    tab = _spectral_tables(torus)
    vh = np.fft.fft2(values)
    g1 = np.fft.ifft2(1j * tab["k1d"] * vh).real
    g2 = np.fft.ifft2(1j * tab["k2d"] * vh).real
    return g1, g2


def laplacian(f: GridField) -> GridField:
    return GridField(f.torus, laplacian_array(f.torus, f.values))


def laplacian_array(torus: FlatTorus, values: np.ndarray) -> np.ndarray:
    tab = _spectral_tables(torus)
    return np.fft.ifft2(-tab["minus_lap"] * np.fft.fft2(values)).real


def dirichlet_energy(f: GridField) -> float:
    """Integral of |grad f|^2 over the torus."""
    g1, g2 = gradient_arrays(f.torus, f.values)
    return float((g1 * g1 + g2 * g2).sum() * f.torus.cell_area)


def helmholtz_solve(torus: FlatTorus, rhs: np.ndarray, tau: float) -> np.ndarray:
    """Solve (-Laplacian + tau) u = rhs spectrally (tau > 0)."""
    tab = _spectral_tables(torus)
    return np.fft.ifft2(np.fft.fft2(rhs) / (tab["minus_lap"] + tau)).real


def greens_function(torus: FlatTorus, p: Point) -> GridField:
    """Mean-zero G_p with -Laplacian(G_p) = delta_p^h - 1, where delta_p^h is the
    grid delta (1/cell_area at the node nearest p, zero elsewhere)."""
    i, j = torus.nearest_node(p)
    rhs = np.full((torus.n, torus.n), -1.0)
    rhs[i, j] += 1.0 / torus.cell_area
    tab = _spectral_tables(torus)
    rhat = np.fft.fft2(rhs)
    denom = tab["minus_lap"].copy()
    denom[0, 0] = 1.0
    ghat = rhat / denom
    ghat[0, 0] = 0.0
    return GridField(torus, np.fft.ifft2(ghat).real)


def desingularized_weight(h: GridField, singular: SingularData, component: int) -> GridField:
    """Multiply h by exp(-4 pi sum_j alpha_j G_{p_j}); near p_j the product vanishes
    like d(x, p_j)^(2 alpha_j), which removes the Dirac data from the equation."""
    if component not in (1, 2):
        raise ValueError(f"component must be 1 or 2, got {component}")
    if np.min(h.values) <= 0.0:
        raise ValueError("weight h must be strictly positive")
    alphas = singular.alpha1 if component == 1 else singular.alpha2
    log_factor = np.zeros_like(h.values)
    for p, alpha in zip(singular.points, alphas):
        if alpha != 0.0:
            log_factor -= 4.0 * np.pi * alpha * greens_function(h.torus, p).values
    return GridField(h.torus, h.values * np.exp(log_factor))


def random_smooth_field(torus: FlatTorus, rng: np.random.Generator,
                        modes: int = 4, scale: float = 1.0) -> GridField:
    """Band-limited random field: real combination of Fourier modes |k| <= modes."""
    n = torus.n
    coeffs = np.zeros((n, n), dtype=complex)
    for a in range(-modes, modes + 1):
        for b in range(-modes, modes + 1):
            if a == 0 and b == 0:
                continue
            coeffs[a % n, b % n] = rng.normal() + 1j * rng.normal()
    vals = np.fft.ifft2(coeffs).real
    vals *= scale / max(np.abs(vals).max(), 1e-300)
    return GridField(torus, vals)
