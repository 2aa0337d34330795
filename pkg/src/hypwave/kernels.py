"""Dispersion kernels of the linear flow and the oscillatory-integral engine.

For odd n the kernel is a finite expansion in powers of 1/t built from the
F_k tables; for even n each expansion term is a semi-infinite singular
oscillatory integral

    int_rho^inf  exp(i s^2 / 4t) s / sqrt(cosh s - cosh rho) * W(s) ds.

The engine removes the endpoint singularity with the substitution
s = rho + u^2 (the square root factors as
sqrt(2 sinh((s+rho)/2) sinh((s-rho)/2)), so the singular factor cancels
exactly), integrates a finite stretch on the real axis, and picks up the
oscillatory tail on a rotated ray s = s0 + tau exp(i pi/4) where the phase
decays like a Gaussian.  An epsilon-damped route with Richardson
extrapolation is kept as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Dimension
from .specfun import AccuracyError, FkTable, fk_table


class ParityError(ValueError):
    """Kernel route called with a dimension of the wrong parity."""


@dataclass(frozen=True)
class KernelRequest:
    """Evaluation point (t, rho) of the kernel K^n."""

    dim: Dimension
    t: float
    rho: float

    def __post_init__(self) -> None:
        if self.t == 0:
            raise ValueError("t must be nonzero")
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")


@dataclass(frozen=True)
class OscQuadConfig:
    """Tuning of the oscillatory quadrature engine.

    ``eps_schedule`` drives the damped cross-check route only; the primary
    route is substitution plus contour rotation.
    """

    eps_schedule: tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125, 0.00625)
    singular_order: int = 2
    tol: float = 1e-8
    max_panels: int = 600000

    def __post_init__(self) -> None:
        eps = self.eps_schedule
        if any(b >= a for a, b in zip(eps, eps[1:])) or any(e <= 0 for e in eps):
            raise ValueError("eps schedule must be strictly decreasing and positive")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.singular_order != 2:
            raise ValueError("only the square-root endpoint substitution is supported")


DEFAULT_OSC_CONFIG = OscQuadConfig()

#: decay budget: contributions below exp(-_EXPONENT_BUDGET) are dropped
_EXPONENT_BUDGET = 36.0


def _gauss(a: float, b: float, n: int):
    from .specfun import _gauss_nodes

    return _gauss_nodes(a, b, n)


def _sqrt_cosh_diff(s, rho):
    """sqrt(cosh s - cosh rho) through the product factorization.

    Safe for complex s with |Im s| < pi; principal branches of the two
    sinh factors are continuous along the contours used here.
    """
    return np.sqrt(2.0) * np.sqrt(np.sinh((s + rho) / 2.0)) * np.sqrt(np.sinh((s - rho) / 2.0))


def _tail_integral_once(t: float, rho: float, weight, points_scale: float,
                        cfg: OscQuadConfig) -> complex:
    s0 = rho + max(2.0, 26.0 * t)

    # real-axis stretch [rho, s0] after s = rho + u^2
    u_max = np.sqrt(s0 - rho)
    osc = (s0**2 - rho**2) / (8.0 * np.pi * t)
    n_real = int(min(cfg.max_panels, points_scale * max(240, 18 * int(osc + 1))))
    u, wu = _gauss(0.0, u_max, n_real)
    s = rho + u**2
    q = np.sinh(u**2 / 2.0) / u**2          # -> 1/2 smoothly at u = 0
    wvals = weight(s) if weight is not None else 1.0
    integrand = (2.0 * s * wvals * np.exp(1j * s**2 / (4.0 * t))
                 / np.sqrt(2.0 * np.sinh((s + rho) / 2.0) * q))
    val = complex(np.sum(wu * integrand))

    # rotated tail: s = s0 + tau exp(i pi/4); the phase contributes
    # exp(-s0 tau/(2 sqrt2 t) - tau^2/(4 t))
    a = s0 / (2.0 * np.sqrt(2.0) * t)
    b = 1.0 / (4.0 * t)
    tau_max = (-a + np.sqrt(a**2 + 4.0 * b * _EXPONENT_BUDGET)) / (2.0 * b)
    rot = np.exp(1j * np.pi / 4.0)
    n_tail = int(points_scale * 320)
    tau, wt = _gauss(0.0, tau_max, n_tail)
    sc = s0 + tau * rot
    wvals_c = weight(sc) if weight is not None else 1.0
    tail_integrand = (sc * wvals_c * np.exp(1j * sc**2 / (4.0 * t))
                      / _sqrt_cosh_diff(sc, rho))
    val += complex(rot * np.sum(wt * tail_integrand))
    return val


def oscillatory_tail_integral(t: float, rho: float, weight=None,
                              cfg: OscQuadConfig = DEFAULT_OSC_CONFIG) -> complex:
    """int_rho^inf exp(i s^2/4t) s / sqrt(cosh s - cosh rho) W(s) ds, t > 0.

    ``weight`` is an optional analytic factor W(s), evaluated at real and
    complex s.  Raises :class:`AccuracyError` when two resolutions disagree
    beyond the configured tolerance.
    """
    if t <= 0:
        raise ValueError("t must be positive (use conjugation for t < 0)")
    coarse = _tail_integral_once(t, rho, weight, 1.0, cfg)
    fine = _tail_integral_once(t, rho, weight, 1.6, cfg)
    scale = max(abs(fine), 1e-300)
    err = abs(fine - coarse) / scale
    if err > max(cfg.tol, 1e-12 / scale):
        raise AccuracyError(
            f"oscillatory quadrature did not converge at t={t}, rho={rho}",
            achieved=err,
        )
    return fine


def oscillatory_tail_integral_damped(t: float, rho: float, weight=None,
                                     cfg: OscQuadConfig = DEFAULT_OSC_CONFIG) -> complex:
    """Independent route: Gaussian damping exp(-eps s^2) on the real axis,
    Richardson-extrapolated through the eps schedule."""
    if t <= 0:
        raise ValueError("t must be positive")
    vals = []
    for eps in cfg.eps_schedule:
        s_cut = rho + max(2.0, np.sqrt(_EXPONENT_BUDGET / eps))
        osc = (s_cut**2 - rho**2) / (8.0 * np.pi * t)
        n = int(min(cfg.max_panels, max(400, 20 * int(osc + 1))))
        u, wu = _gauss(0.0, np.sqrt(s_cut - rho), n)
        s = rho + u**2
        q = np.sinh(u**2 / 2.0) / u**2
        wvals = weight(s) if weight is not None else 1.0
        integrand = (2.0 * s * wvals * np.exp(1j * s**2 / (4.0 * t) - eps * s**2)
                     / np.sqrt(2.0 * np.sinh((s + rho) / 2.0) * q))
        vals.append(complex(np.sum(wu * integrand)))
    # Neville extrapolation of the polynomial-in-eps tableau to eps = 0
    eps = np.array(cfg.eps_schedule)
    tab = np.array(vals, dtype=complex)
    for j in range(1, len(tab)):
        tab[: len(tab) - j] = (
            (0.0 - eps[j:]) * tab[: len(tab) - j]
            - (0.0 - eps[: len(tab) - j]) * tab[1: len(tab) - j + 1]
        ) / (eps[j:] - eps[: len(tab) - j])
    return complex(tab[0])


@dataclass(frozen=True)
class OscIntegralResult:
    """Value of I(t, rho) and its ratio to the sqrt(t) sqrt(rho/sinh rho) envelope."""

    value: complex
    bound_ratio: float


def oscillatory_I(t: float, rho: float,
                  cfg: OscQuadConfig = DEFAULT_OSC_CONFIG) -> OscIntegralResult:
    """The base oscillatory integral I(t, rho) with its dispersion envelope ratio."""
    if t <= 0:
        raise ValueError("t must be positive")
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    val = oscillatory_tail_integral(t, rho, None, cfg)
    envelope = rho / np.sinh(rho) if rho > 0 else 1.0
    ratio = abs(val) / (np.sqrt(t) * np.sqrt(envelope))
    return OscIntegralResult(val, float(ratio))


def _even_weight(table: FkTable, k: int):
    entry = table.entries[k - 1]

    def w(s):
        return np.sinh(s) / s * entry(s)

    return w


def kernel_odd(req: KernelRequest, tables: FkTable | None = None) -> complex:
    """K^n(t, rho) for odd n >= 3 via the finite 1/t expansion."""
    n = req.dim.n
    if n % 2 == 0 or n < 3:
        raise ParityError(f"kernel_odd requires odd n >= 3, got n={n}")
    if req.t < 0:
        return np.conj(kernel_odd(KernelRequest(req.dim, -req.t, req.rho), tables))
    m = (n - 1) // 2
    table = tables if tables is not None else fk_table(m)
    phase = np.exp(1j * req.rho**2 / (4.0 * req.t))
    acc = 0.0 + 0.0j
    for k, entry in enumerate(table.entries, start=1):
        acc += entry(req.rho) / req.t ** (k + 0.5)
    return complex(phase * acc)


def kernel_even(req: KernelRequest,
                cfg: OscQuadConfig = DEFAULT_OSC_CONFIG) -> complex:
    """K^n(t, rho) for even n >= 2 via the expansion of weighted tail integrals."""
    n = req.dim.n
    if n % 2 == 1:
        raise ParityError(f"kernel_even requires even n, got n={n}")
    if req.t < 0:
        return np.conj(kernel_even(KernelRequest(req.dim, -req.t, req.rho), cfg))
    m = n // 2
    table = fk_table(m)
    acc = 0.0 + 0.0j
    for k in range(1, m + 1):
        term = oscillatory_tail_integral(req.t, req.rho, _even_weight(table, k), cfg)
        acc += term / req.t ** (k + 0.5)
    return complex(acc)


def kernel_point(req: KernelRequest,
                 cfg: OscQuadConfig = DEFAULT_OSC_CONFIG) -> complex:
    """Parity dispatch for K^n(t, rho)."""
    return kernel_odd(req) if req.dim.is_odd else kernel_even(req, cfg)


def induction_integral(dim_lower: Dimension, t: float, rho: float,
                       cfg: OscQuadConfig = DEFAULT_OSC_CONFIG) -> complex:
    """int_rho^inf sinh s / sqrt(cosh s - cosh rho) K^{n+1}(t, s) ds.

    Relates consecutive kernels; used as a consistency oracle for the
    even-dimension route against the odd one above it.
    """
    dim_up = Dimension(dim_lower.n + 1)
    m = (dim_up.n - 1) // 2
    table = fk_table(m)

    # the phase of K^{n+1} is exp(i s^2/4t), which is exactly the engine's
    # oscillatory factor: feed the remainder as the weight
    def weight(s):
        acc = np.zeros(np.shape(s), dtype=complex)
        for k, entry in enumerate(table.entries, start=1):
            acc = acc + entry(s) / t ** (k + 0.5)
        return np.sinh(s) / s * acc

    return oscillatory_tail_integral(t, rho, weight, cfg)
