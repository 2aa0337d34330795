"""Quantitative checks on the linear flow: dispersion ratios, decay-rate
fits, weighted Strichartz norms, and a Gagliardo-Nirenberg scan.

All checks are one-sided: ratios are measured and reported, never asserted
against hard-coded constants.  Pass criteria elsewhere are boundedness and
exponent windows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Dimension, RadialField, radial_derivative, sphere_area
from .propagator import PropagatorPlan, propagate_kernel, propagate_spectral
from .specfun import _gauss_nodes


def _prop(u0: RadialField, t: float, plan: PropagatorPlan,
          tail_tol: float | None) -> RadialField:
    """Route-aware propagation; the kernel routes are reflection-free and
    preferred for long-time decay measurements."""
    if plan.route == "spectral":
        return propagate_spectral(u0, t, plan, tail_tol=tail_tol)
    return propagate_kernel(u0, t, plan)


class FitError(RuntimeError):
    """Degenerate least-squares fit."""


class PairError(ValueError):
    """Inadmissible space-time exponent pair."""


@dataclass(frozen=True)
class DecayFit:
    """Power-law fit of a norm decay: norm(t) ~ exp(log_constant) * t^exponent."""

    exponent: float
    log_constant: float
    residual: float
    window: tuple[float, float]
    samples: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.residual):
            raise FitError("fit residual is not finite")
        if self.window[0] >= self.window[1]:
            raise ValueError("fit window is empty")
        if self.samples < 5:
            raise ValueError("need at least 5 samples for a stable fit")


@dataclass(frozen=True)
class StrichartzPair:
    """Admissible exponent pair: 2/p + n/q = n/2, excluding (2, inf, 2)."""

    p: float
    q: float
    dim: Dimension

    def __post_init__(self) -> None:
        n = self.dim.n
        if self.p < 2 or self.q < 2:
            raise PairError("p and q must be >= 2")
        lhs = (0.0 if np.isinf(self.p) else 2.0 / self.p) \
            + (0.0 if np.isinf(self.q) else n / self.q)
        if abs(lhs - n / 2.0) > 1e-12:
            raise PairError(f"(p,q)=({self.p},{self.q}) not admissible for n={n}")
        if self.p == 2 and np.isinf(self.q) and n == 2:
            raise PairError("the endpoint (2, inf) is excluded in dimension 2")


def refined_sup(grid_nodes: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Sup of |values| with local quadratic refinement around the max node.

    Returns (location, sup); the grid max alone underestimates the sup.
    """
    a = np.abs(values)
    i = int(np.argmax(a))
    if i == 0 or i == a.size - 1:
        return float(grid_nodes[i]), float(a[i])
    y0, y1, y2 = a[i - 1], a[i], a[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom >= 0:
        return float(grid_nodes[i]), float(a[i])
    delta = 0.5 * (y0 - y2) / denom
    h = grid_nodes[i + 1] - grid_nodes[i]
    sup = y1 - 0.25 * (y0 - y2) * delta
    return float(grid_nodes[i] + delta * h), float(sup)


def _weight_sphere_avg(dim: Dimension, r: float, r2: np.ndarray,
                       power: float, n_pts: int = 200) -> np.ndarray:
    """Sphere average of (d/sinh d)^power over directions at radius r2,
    seen from a point at radius r."""
    n = dim.n
    alpha, w = _gauss_nodes(0.0, np.pi, n_pts)
    cosh_d = (np.cosh(r) * np.cosh(r2)[:, None]
              - np.sinh(r) * np.sinh(r2)[:, None] * np.cos(alpha)[None, :])
    d = np.arccosh(np.maximum(cosh_d, 1.0))
    ratio = np.where(d > 1e-12, d / np.sinh(np.maximum(d, 1e-12)), 1.0)
    integ = np.sum(w[None, :] * ratio**power * np.sin(alpha)[None, :] ** (n - 2),
                   axis=1)
    pref = sphere_area(n - 1) / sphere_area(n) if n > 2 else 1.0 / np.pi
    return pref * integ


def dispersion_ratio(u0: RadialField, t: float, plan: PropagatorPlan,
                     tail_tol: float | None = 1e-8) -> float:
    """sup |u(t)| divided by t^{-n/2} int |u0| (d/sinh d)^{(n-1)/2} dV, the
    right side evaluated at the sup-attaining point."""
    rg = u0.grid
    n = rg.dim.n
    u = _prop(u0, t, plan, tail_tol)
    r_star, sup = refined_sup(rg.nodes, u.values)
    avg = _weight_sphere_avg(rg.dim, r_star, rg.nodes, (n - 1) / 2.0)
    rhs = abs(t) ** (-n / 2.0) * float(
        np.sum(np.abs(u0.values) * avg * rg.volume_weights))
    return sup / rhs


def dispersion_ratio_classical(u0: RadialField, t: float, plan: PropagatorPlan,
                               tail_tol: float | None = 1e-8) -> float:
    """Weaker classical check: sup |u(t)| / (t^{-n/2} ||u0||_1)."""
    rg = u0.grid
    u = _prop(u0, t, plan, tail_tol)
    _, sup = refined_sup(rg.nodes, u.values)
    l1 = float(np.sum(np.abs(u0.values) * rg.volume_weights))
    return sup / (abs(t) ** (-rg.dim.n / 2.0) * l1)


def _norm_of_snapshot(u: RadialField, norm: str) -> float:
    rg = u.grid
    if norm == "sup":
        return refined_sup(rg.nodes, u.values)[1]
    if norm == "weighted-sup":
        w = np.sinh(rg.nodes) / rg.nodes
        return refined_sup(rg.nodes, u.values * w)[1]
    raise ValueError(f"unknown norm {norm!r}")


def decay_fit(u0: RadialField, norm: str, window: tuple[float, float],
              plan: PropagatorPlan, n_samples: int = 12,
              tail_tol: float | None = 1e-8) -> DecayFit:
    """Least-squares slope of log norm(u(t)) against log t over a log-spaced
    time window."""
    t_min, t_max = window
    if t_min <= 0 or t_min >= t_max:
        raise ValueError("window must satisfy 0 < t_min < t_max")
    if n_samples < 5:
        raise ValueError("need at least 5 samples")
    ts = np.geomspace(t_min, t_max, n_samples)
    norms = np.array([_norm_of_snapshot(_prop(u0, t, plan, tail_tol), norm)
                      for t in ts])
    if np.any(norms <= 0):
        raise FitError("norm vanished inside the fit window")
    x, y = np.log(ts), np.log(norms)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise FitError("degenerate fit data")
    coeffs, res = np.polyfit(x, y, 1, full=True)[:2]
    rms = float(np.sqrt(res[0] / len(x))) if res.size else 0.0
    return DecayFit(float(coeffs[0]), float(coeffs[1]), rms,
                    (t_min, t_max), n_samples)


def weighted_lq_norm(u: RadialField, q: float) -> float:
    """L^q norm with the spatial weight w^{q-2}, w = sinh r / r.

    q = inf is the weighted sup with the q -> inf limit dropping the
    weight's exponent dependence; by convention this returns the plain
    L^inf norm times nothing (weight power (q-2)/q -> 1), i.e. the sup of
    |u| w.  Finite q integrates |u|^q w^{q-2} against the volume measure.
    """
    rg = u.grid
    w = np.sinh(rg.nodes) / rg.nodes
    if np.isinf(q):
        return refined_sup(rg.nodes, u.values * w)[1]
    integ = float(np.sum(np.abs(u.values) ** q * w ** (q - 2.0)
                         * rg.volume_weights))
    return integ ** (1.0 / q)


def strichartz_norm(u0: RadialField, pair: StrichartzPair, T: float,
                    plan: PropagatorPlan, n_snapshots: int = 65,
                    t_min_frac: float = 1e-3,
                    tail_tol: float | None = 1e-8) -> float:
    """Weighted mixed norm over [0, T] divided by ||u0||_2.

    Composite Simpson in log t over log-spaced snapshots; p = inf is the
    sup over snapshots (mass conservation makes the (inf, 2) ratio 1).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if u0.l2_norm() == 0:
        return 0.0
    if n_snapshots % 2 == 0:
        n_snapshots += 1
    if np.isinf(pair.p):
        ts = np.linspace(T / n_snapshots, T, n_snapshots)
        vals = [weighted_lq_norm(_prop(u0, t, plan, tail_tol), pair.q)
                for t in ts]
        return max(vals) / u0.l2_norm()
    ts = np.geomspace(t_min_frac * T, T, n_snapshots)
    x = np.log(ts)
    # int_0^T g(t) dt = int g(t) t dlog t; Simpson on the uniform log grid
    g = np.array([weighted_lq_norm(_prop(u0, t, plan, tail_tol), pair.q) ** pair.p
                  for t in ts]) * ts
    hlog = x[1] - x[0]
    simpson = hlog / 3.0 * (g[0] + g[-1]
                            + 4.0 * np.sum(g[1:-1:2]) + 2.0 * np.sum(g[2:-2:2]))
    # the un-sampled initial sliver [0, t_min] contributes at most
    # t_min * max g/t, bounded for admissible pairs
    return simpson ** (1.0 / pair.p) / u0.l2_norm()


def gagliardo_nirenberg_ratio(v: RadialField, p: float) -> float:
    """||v||_{p+1}^{p+1} / (||v||_2^{2+(p-1)(2-n)/2} ||grad v||_2^{(p-1)n/2}),
    the interpolation-inequality ratio without its constant.

    Degree 0 in the amplitude of v by construction of the exponents."""
    rg = v.grid
    n = rg.dim.n
    lhs = float(np.sum(np.abs(v.values) ** (p + 1) * rg.volume_weights))
    if lhs == 0:
        raise ZeroDivisionError("zero field has no interpolation ratio")
    l2 = v.l2_norm()
    grad = radial_derivative(v)
    g2 = float(np.sqrt(np.real(np.sum(np.abs(grad.values) ** 2
                                      * rg.volume_weights))))
    rhs = l2 ** (2.0 + (p - 1.0) * (2.0 - n) / 2.0) * g2 ** ((p - 1.0) * n / 2.0)
    return lhs / rhs


def gagliardo_nirenberg_scan(grid, p: float, sigmas=None) -> float:
    """Empirical constant: sup of the ratio over a Gaussian width family."""
    from .profiles import gaussian

    if sigmas is None:
        sigmas = np.geomspace(0.3, 3.0, 12)
    best = 0.0
    for s in sigmas:
        v = RadialField.from_function(grid, gaussian(sigma=float(s)))
        best = max(best, gagliardo_nirenberg_ratio(v, p))
    return best
