"""Radial spectral transform on H^n with Plancherel weights.

The forward map projects a radial field onto the radial eigenfunctions
phi_lambda of the Laplace-Beltrami operator; the inverse resynthesizes
against the spectral density 1/|c(lambda)|^2.  For n = 3 the
eigenfunctions are sin(lambda r)/(lambda sinh r), so both directions
reduce to fast sine transforms on the cell-centered grid, giving an
exactly unitary pair.  Other dimensions go through a dense eigenfunction
table which can be cached on disk (building even-n tables is expensive).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from math import pi
from pathlib import Path

import numpy as np
from scipy.fft import dst

from .geometry import Dimension, GridError, RadialField, RadialGrid
from .specfun import plancherel_density, spherical_function


class SamplingError(ValueError):
    """Spectral or spatial resolution insufficient for the request."""


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform lambda-grid matched to a radial grid.

    Nodes are lambda_k = k pi / r_max for k = 1..N, the exactness class of
    the sine-transform pair on the cell-centered radial grid.
    ``plancherel_weights[k]`` is dlam * 2 |S^{n-1}| * density(lambda_k),
    the measure making ``sum(|F|^2 * plancherel_weights)`` equal to the
    squared L^2(H^n) norm of the original.
    """

    dim: Dimension
    lam_max: float
    nodes: np.ndarray = field(repr=False, compare=False)
    plancherel_weights: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0 or np.any(np.diff(nodes) <= 0):
            raise GridError("spectral nodes must be strictly ascending")
        if nodes[0] <= 0 or nodes[-1] > self.lam_max * (1 + 1e-12):
            raise GridError("spectral nodes must lie in (0, lam_max]")
        if np.any(np.asarray(self.plancherel_weights) < 0):
            raise GridError("Plancherel weights must be nonnegative")

    @property
    def dlam(self) -> float:
        return float(self.nodes[1] - self.nodes[0]) if self.nodes.size > 1 else self.lam_max


def matched_spectral_grid(rg: RadialGrid, lam_max: float | None = None) -> SpectralGrid:
    """Spectral grid paired with ``rg``: dlam = pi/r_max up to the Nyquist
    analogue pi/h, or up to an explicit ``lam_max`` cap.

    The full band is exact for the n = 3 sine-transform pair.  For other n
    the forward quadrature is only O(h^2) and the top of the band is pure
    quadrature noise, so cap lam_max at a fixed value and refine the radial
    grid under it.
    """
    dlam = pi / rg.r_max
    n_modes = rg.n_points
    if lam_max is not None:
        if lam_max < dlam:
            raise SamplingError(f"lam_max={lam_max} below the resolution {dlam}")
        n_modes = min(n_modes, int(lam_max / dlam + 1e-9))
    nodes = dlam * np.arange(1, n_modes + 1)
    dens = plancherel_density(rg.dim, nodes)
    weights = dlam * 2.0 * rg.dim.sphere_area * dens
    if n_modes == rg.n_points:
        # the top node is the Nyquist analogue; the exact discrete sine
        # pair carries it at half weight, and without the halving the
        # roundtrip has an eigenvalue 2 on the Nyquist mode
        weights[-1] *= 0.5
    return SpectralGrid(rg.dim, float(nodes[-1]), nodes, weights)


@dataclass
class SpectralField:
    """Complex spectral coefficients on a :class:`SpectralGrid`."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.nodes.shape:
            raise GridError("value array does not match the spectral grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spectral coefficients must be finite")

    def plancherel_norm_sq(self) -> float:
        """Squared norm in the Plancherel measure."""
        return float(np.sum(np.abs(self.values) ** 2 * self.grid.plancherel_weights))

    def tail_mass_fraction(self, frac: float = 0.9) -> float:
        """Share of the Plancherel mass above frac * lam_max."""
        total = self.plancherel_norm_sq()
        if total == 0:
            return 0.0
        sel = self.grid.nodes > frac * self.grid.lam_max
        return float(np.sum(np.abs(self.values[sel]) ** 2
                            * self.grid.plancherel_weights[sel]) / total)


# --- eigenfunction tables (general n) -----------------------------------------

_PHI_MAGIC = b"HWPHITAB"
_PHI_VERSION = 1


@dataclass(frozen=True)
class PhiTable:
    """Dense table phi[k, j] = phi_{lambda_k}(r_j) for the matrix transform path."""

    dim: Dimension
    r_nodes: np.ndarray = field(repr=False)
    lam_nodes: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)

    def matches(self, rg: RadialGrid, sg: SpectralGrid) -> bool:
        return (self.dim.n == rg.dim.n == sg.dim.n
                and self.r_nodes.shape == rg.nodes.shape
                and self.lam_nodes.shape == sg.nodes.shape
                and np.allclose(self.r_nodes, rg.nodes)
                and np.allclose(self.lam_nodes, sg.nodes))


def build_phi_table(rg: RadialGrid, sg: SpectralGrid) -> PhiTable:
    """Evaluate the eigenfunction table row by row (slow for even n)."""
    if rg.dim.n != sg.dim.n:
        raise GridError("radial and spectral grids have different dimensions")
    phi = np.empty((sg.nodes.size, rg.nodes.size))
    for k, lam in enumerate(sg.nodes):
        phi[k] = spherical_function(rg.dim, float(lam), rg.nodes)
    return PhiTable(rg.dim, rg.nodes.copy(), sg.nodes.copy(), phi)


def save_phi_table(table: PhiTable, path: str | Path) -> None:
    """Binary layout: magic, version, n, three int64 sizes, then the three
    float64 arrays, then a sha256 checksum of everything before it."""
    payload = bytearray()
    payload += _PHI_MAGIC
    payload += struct.pack("<iiqqq", _PHI_VERSION, table.dim.n,
                           table.r_nodes.size, table.lam_nodes.size,
                           table.phi.size)
    payload += np.ascontiguousarray(table.r_nodes, dtype="<f8").tobytes()
    payload += np.ascontiguousarray(table.lam_nodes, dtype="<f8").tobytes()
    payload += np.ascontiguousarray(table.phi, dtype="<f8").tobytes()
    digest = hashlib.sha256(payload).digest()
    Path(path).write_bytes(bytes(payload) + digest)


def load_phi_table(path: str | Path) -> PhiTable:
    raw = Path(path).read_bytes()
    header_len = struct.calcsize("<iiqqq")
    if len(raw) < len(_PHI_MAGIC) + header_len + 32 or raw[: len(_PHI_MAGIC)] != _PHI_MAGIC:
        raise ValueError(f"not an eigenfunction table file: {path}")
    body, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise ValueError(f"checksum mismatch in {path}")
    off = len(_PHI_MAGIC)
    version, n, nr, nl, nphi = struct.unpack_from("<iiqqq", body, off)
    if version != _PHI_VERSION:
        raise ValueError(f"unsupported table version {version}")
    off += header_len
    r_nodes = np.frombuffer(body, "<f8", nr, off).copy()
    off += 8 * nr
    lam_nodes = np.frombuffer(body, "<f8", nl, off).copy()
    off += 8 * nl
    phi = np.frombuffer(body, "<f8", nphi, off).reshape(nl, nr).copy()
    return PhiTable(Dimension(n), r_nodes, lam_nodes, phi)


def phi_table(rg: RadialGrid, sg: SpectralGrid,
              cache_path: str | Path | None = None) -> PhiTable:
    """Load a matching cached table or build (and optionally store) one."""
    if cache_path is not None and Path(cache_path).exists():
        table = load_phi_table(cache_path)
        if table.matches(rg, sg):
            return table
    table = build_phi_table(rg, sg)
    if cache_path is not None:
        save_phi_table(table, cache_path)
    return table


# --- transforms ----------------------------------------------------------------

def _check_pair(rg: RadialGrid, sg: SpectralGrid) -> None:
    if rg.dim.n != sg.dim.n:
        raise GridError("dimension mismatch between radial and spectral grids")
    if sg.nodes.size > rg.n_points or abs(sg.dlam - pi / rg.r_max) > 1e-12 * sg.dlam:
        raise GridError("spectral grid is not matched to the radial grid; "
                        "use matched_spectral_grid")


def _is_fast_path(rg: RadialGrid) -> bool:
    return rg.dim.n == 3


def forward_transform(f: RadialField, sg: SpectralGrid,
                      table: PhiTable | None = None,
                      boundary_tol: float = 1e-6) -> SpectralField:
    """Project onto the radial eigenfunctions against the volume measure.

    For n = 3 this is a type-II sine transform of f(r) sinh r; otherwise a
    dense matrix product with the eigenfunction table.
    """
    rg = f.grid
    _check_pair(rg, sg)
    if boundary_tol is not None:
        bm = f.boundary_mass_fraction()
        if bm > boundary_tol:
            raise SamplingError(
                f"boundary mass fraction {bm:.3g} exceeds {boundary_tol:.3g}; "
                "enlarge r_max")
    if _is_fast_path(rg):
        g = f.values * np.sinh(rg.nodes)
        coeffs = 0.5 * dst(g, type=2)[: sg.nodes.size]
        vals = 4.0 * pi * rg.h / sg.nodes * coeffs
        return SpectralField(sg, vals)
    tab = table if table is not None and table.matches(rg, sg) else build_phi_table(rg, sg)
    vals = tab.phi @ (f.values * rg.volume_weights)
    return SpectralField(sg, vals)


def inverse_transform(F: SpectralField, rg: RadialGrid,
                      table: PhiTable | None = None) -> RadialField:
    """Resynthesize a radial field from spectral coefficients."""
    sg = F.grid
    _check_pair(rg, sg)
    if _is_fast_path(rg):
        c = np.zeros(rg.n_points, dtype=complex)
        c[: sg.nodes.size] = F.values * sg.plancherel_weights / sg.nodes
        s = dst(c, type=3)
        # close the type-III sum at the Nyquist term sin(pi(j+1/2)) = (-1)^j
        alt = c[-1] * (-1.0) ** np.arange(rg.n_points)
        vals = 0.5 * (s + alt) / np.sinh(rg.nodes)
        return RadialField(rg, vals)
    tab = table if table is not None and table.matches(rg, sg) else build_phi_table(rg, sg)
    vals = (F.values * sg.plancherel_weights) @ tab.phi
    return RadialField(rg, vals)


def spectral_multiplier(F: SpectralField, t: float) -> SpectralField:
    """Multiply by the unimodular evolution phase exp(-i t (lambda^2 + (n-1)^2/4))."""
    n = F.grid.dim.n
    phase = np.exp(-1j * t * (F.grid.nodes**2 + (n - 1) ** 2 / 4.0))
    return SpectralField(F.grid, F.values * phase)
