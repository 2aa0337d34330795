"""Hyperbolic-space primitives in the hyperboloid model.

H^n is realized as the upper sheet {x in R^{n+1} : [x,x] = 1, x_0 > 0}
of the unit hyperboloid for the Minkowski form [x,y] = x0*y0 - sum x_i*y_i.
Radial functions are sampled on a cell-centered grid in the geodesic
radius r, with the angular sphere factor folded into the volume weights
so that discrete radial integrals approximate full H^n integrals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import pi

import numpy as np
from scipy.special import gamma as _gamma


class DimensionError(ValueError):
    """Mismatched vector lengths or unsupported dimension."""


class InvalidPointError(ValueError):
    """Point does not satisfy the hyperboloid constraint."""


class GridError(ValueError):
    """Grid too coarse or incompatible for the requested operation."""


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * pi ** (n / 2.0) / _gamma(n / 2.0)


@dataclass(frozen=True)
class Dimension:
    """Spatial dimension n >= 2 of H^n, with parity helpers."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise DimensionError(f"dimension must be an integer >= 2, got {self.n!r}")

    @property
    def is_odd(self) -> bool:
        return self.n % 2 == 1

    @property
    def is_even(self) -> bool:
        return self.n % 2 == 0

    @property
    def sphere_area(self) -> float:
        """|S^{n-1}|, the area of the boundary sphere at infinity scale."""
        return sphere_area(self.n)


def minkowski_product(x: np.ndarray, y: np.ndarray) -> float:
    """Indefinite product [x,y] = x0*y0 - x1*y1 - ... - xn*yn."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise DimensionError(
            f"expected two equal-length vectors of size >= 3, got {x.shape} and {y.shape}"
        )
    return float(x[0] * y[0] - np.dot(x[1:], y[1:]))


def hyperboloid_point(r: float, direction: np.ndarray) -> np.ndarray:
    """Point (cosh r, sinh r * omega) at geodesic radius r from the origin.

    ``direction`` is a unit vector omega in R^n.
    """
    direction = np.asarray(direction, dtype=float)
    nrm = np.linalg.norm(direction)
    if nrm == 0:
        raise InvalidPointError("direction must be a nonzero vector")
    omega = direction / nrm
    return np.concatenate(([np.cosh(r)], np.sinh(r) * omega))


def origin(n: int) -> np.ndarray:
    """The base point (1, 0, ..., 0) of H^n."""
    e = np.zeros(n + 1)
    e[0] = 1.0
    return e


def check_on_hyperboloid(x: np.ndarray, tol: float = 1e-9) -> None:
    x = np.asarray(x, dtype=float)
    q = x[0] ** 2 - np.dot(x[1:], x[1:])
    if abs(q - 1.0) > tol * max(1.0, x[0] ** 2) or x[0] < 1.0 - tol:
        raise InvalidPointError(f"point not on the hyperboloid: [x,x]={q}, x0={x[0]}")


def geodesic_distance(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> float:
    """Geodesic distance d(a,b) = arccosh([a,b]) on H^n."""
    check_on_hyperboloid(a, tol)
    check_on_hyperboloid(b, tol)
    p = minkowski_product(a, b)
    if p < 1.0 - tol * max(1.0, abs(p)):
        raise InvalidPointError(f"[a,b] = {p} < 1; points are not both on the upper sheet")
    return float(np.arccosh(max(p, 1.0)))


@dataclass(frozen=True)
class RadialGrid:
    """Cell-centered discretization of [0, r_max] with hyperbolic volume weights.

    Nodes sit at (j + 1/2) h, so coth(r) is never evaluated at r = 0.
    ``volume_weights[j]`` equals |S^{n-1}| sinh^{n-1}(r_j) h, making
    ``sum(values * volume_weights)`` a midpoint-rule approximation of the
    full H^n integral of a radial function.
    """

    dim: Dimension
    r_max: float
    n_points: int
    nodes: np.ndarray = field(repr=False, compare=False, default=None)
    volume_weights: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        if self.r_max <= 0:
            raise GridError("r_max must be positive")
        if self.n_points < 3:
            raise GridError("need at least 3 nodes")
        h = self.r_max / self.n_points
        nodes = (np.arange(self.n_points) + 0.5) * h
        w = self.dim.sphere_area * np.sinh(nodes) ** (self.dim.n - 1) * h
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "volume_weights", w)

    @property
    def h(self) -> float:
        return self.r_max / self.n_points

    def integrate(self, values: np.ndarray) -> complex:
        """Integral over H^n of a radial sample set against the volume weights."""
        return np.sum(np.asarray(values) * self.volume_weights)

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.dim, self.r_max, self.n_points * factor)


@dataclass
class RadialField:
    """Complex radial function sampled on a :class:`RadialGrid`."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.nodes.shape:
            raise GridError("value array does not match the grid")

    @classmethod
    def from_function(cls, grid: RadialGrid, fn) -> "RadialField":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=complex))

    def copy(self) -> "RadialField":
        return RadialField(self.grid, self.values.copy())

    def mass(self) -> float:
        """L^2(H^n) squared norm, integral of |f|^2."""
        return float(np.real(self.grid.integrate(np.abs(self.values) ** 2)))

    def l2_norm(self) -> float:
        return float(np.sqrt(self.mass()))

    def boundary_mass_fraction(self, frac: float = 0.9) -> float:
        """Share of the mass carried by the outer (1-frac) part of the domain."""
        m = self.mass()
        if m == 0:
            return 0.0
        sel = self.grid.nodes > frac * self.grid.r_max
        outer = np.real(np.sum(np.abs(self.values[sel]) ** 2
                               * self.grid.volume_weights[sel]))
        return float(outer / m)


def radial_derivative(f: RadialField) -> RadialField:
    """Second-order radial derivative with even reflection at r = 0.

    The last node uses a one-sided stencil.
    """
    g = f.grid
    v = f.values
    h = g.h
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    # ghost node at -h/2 carries v[0] (even extension)
    out[0] = (v[1] - v[0]) / (2 * h)
    out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return RadialField(g, out)


def radial_laplacian(f: RadialField) -> RadialField:
    """Discrete radial Laplace-Beltrami operator d^2/dr^2 + (n-1) coth(r) d/dr.

    Symmetric O(h^2) stencils in the interior, even reflection across r = 0,
    one-sided closure at r_max.
    """
    g = f.grid
    if g.n_points < 3:
        raise GridError("need at least 3 nodes for the Laplacian stencil")
    v = f.values
    h = g.h
    r = g.nodes
    coth = np.cosh(r) / np.sinh(r)
    d2 = np.empty_like(v)
    d1 = np.empty_like(v)
    d2[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    d1[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    d2[0] = (v[1] - v[0]) / h**2          # ghost(-h/2) = v[0]
    d1[0] = (v[1] - v[0]) / (2 * h)
    d2[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h**2
    d1[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return RadialField(g, d2 + (g.dim.n - 1) * coth * d1)


# --- bi-Laplacian of the squared distance -------------------------------------

# Taylor coefficients of (r cosh r - sinh r)/sinh^3 r and
# cosh r (cosh r sinh r - r)/sinh^3 r about r = 0, used below the
# cancellation threshold.  Generated once with sympy; see _bilap_series.
_SERIES_CUT = 0.125


@lru_cache(maxsize=None)
def _bilap_series():
    import sympy as sp

    r = sp.symbols("r")
    t1 = (r * sp.cosh(r) - sp.sinh(r)) / sp.sinh(r) ** 3
    t2 = sp.cosh(r) * (sp.cosh(r) * sp.sinh(r) - r) / sp.sinh(r) ** 3
    order = 12
    p1 = sp.Poly(sp.series(t1, r, 0, order).removeO(), r).all_coeffs()[::-1]
    p2 = sp.Poly(sp.series(t2, r, 0, order).removeO(), r).all_coeffs()[::-1]
    c1 = np.zeros(order)
    c2 = np.zeros(order)
    c1[: len(p1)] = [float(c) for c in p1]
    c2[: len(p2)] = [float(c) for c in p2]
    return c1, c2


def bilaplacian_r2(dim: Dimension, r) -> np.ndarray | float:
    """Delta^2 of the squared geodesic distance r^2, evaluated pointwise.

    Constant (= 8) in dimension 3; tends to 4n(n-1)/3 at r = 0 and to
    2(n-1)^2 as r -> infinity.  Strictly positive for all r >= 0.
    """
    n = dim.n
    r_arr = np.asarray(r, dtype=float)
    scalar = r_arr.ndim == 0
    r_arr = np.atleast_1d(r_arr)
    if np.any(r_arr < 0):
        raise ValueError("r must be nonnegative")
    out = np.empty_like(r_arr)
    small = r_arr < _SERIES_CUT
    big = ~small
    if np.any(big):
        rb = r_arr[big]
        sh3 = np.sinh(rb) ** 3
        out[big] = (
            4 * (n - 1) * (rb * np.cosh(rb) - np.sinh(rb)) / sh3
            + 2 * (n - 1) ** 2 * np.cosh(rb) * (np.cosh(rb) * np.sinh(rb) - rb) / sh3
        )
    if np.any(small):
        c1, c2 = _bilap_series()
        rs = r_arr[small]
        out[small] = (
            4 * (n - 1) * np.polynomial.polynomial.polyval(rs, c1)
            + 2 * (n - 1) ** 2 * np.polynomial.polynomial.polyval(rs, c2)
        )
    return float(out[0]) if scalar else out


def bilaplacian_r2_limits(dim: Dimension) -> tuple[float, float]:
    """Analytic limits of Delta^2 r^2 at r -> 0 and r -> infinity."""
    n = dim.n
    return 4.0 * n * (n - 1) / 3.0, 2.0 * (n - 1) ** 2


def bilaplacian_r2_bounds(dim: Dimension, r_max: float = 40.0,
                          n_scan: int = 20000) -> tuple[float, float]:
    """Numerically certified (inf, sup) of Delta^2 r^2 over [0, infinity).

    A dense scan of (0, r_max] is combined with both analytic limits.
    """
    r = np.linspace(r_max / n_scan, r_max, n_scan)
    vals = bilaplacian_r2(dim, r)
    lim0, liminf = bilaplacian_r2_limits(dim)
    k_n = min(float(np.min(vals)), lim0, liminf)
    big_k = max(float(np.max(vals)), lim0, liminf)
    return k_n, big_k
