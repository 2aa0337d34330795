"""Spherical eigenfunctions, Plancherel density, and phase-derivative tables.

The radial eigenfunctions of the hyperbolic Laplacian are built from
repeated application of the ladder operator D = (1/sinh s) d/ds:

* odd n:   phi_lambda proportional to GammaRatio(lambda) D^{(n-1)/2} cos(lambda s),
* even n:  phi_lambda proportional to GammaRatio(lambda) times a semi-infinite
  integral of D^{n/2} cos(lambda s) against sinh s / sqrt(cosh s - cosh rho).

Everything is normalized so that phi_lambda(0) = 1.

The same ladder applied to the Gaussian phase exp(i s^2 / 4t) produces the
coefficient functions F_k^m(s) used by the dispersion kernels:

    D^m exp(i s^2/4t) = sum_{k=1}^m t^{-k} exp(i s^2/4t) F_k^m(s).

The F_k^m are generated by a symbolic recursion (seeded with coefficient 1
at m = 0) and evaluated through compiled lambdas with series fallbacks
near s = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp
from scipy.special import loggamma, roots_legendre

from .geometry import Dimension, sphere_area

_S, _LAM, _RHO = sp.symbols("s lam rho", positive=False)

#: F tables are supported for 1 <= m <= _MAX_M (odd dimensions up to 13).
_MAX_M = 6

#: below this |s| the compiled closed forms lose digits to cancellation
_SERIES_CUT = 0.05


class UnsupportedOrderError(ValueError):
    """Requested table order outside the supported range."""


class AccuracyError(RuntimeError):
    """A quadrature failed to reach the requested tolerance."""

    def __init__(self, msg: str, achieved: float | None = None):
        super().__init__(msg)
        self.achieved = achieved


# --- Plancherel density -------------------------------------------------------

def plancherel_density(dim: Dimension, lam) -> np.ndarray | float:
    """Spectral measure density 1/|c(lambda)|^2 of the Fourier inversion.

    Equals |Gamma(i lam + (n-1)/2)|^2 / (2 (2 pi)^n |Gamma(i lam)|^2); even in
    lambda and vanishing at lambda = 0.  Closed forms are used for n = 2, 3.
    """
    n = dim.n
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    pref = 1.0 / (2.0 * (2.0 * np.pi) ** n)
    if n == 3:
        out = pref * lam_arr**2
    elif n == 2:
        out = pref * lam_arr * np.tanh(np.pi * lam_arr)
    else:
        out = np.zeros_like(lam_arr)
        nz = lam_arr != 0
        z = 1j * np.abs(lam_arr[nz])
        logratio = np.real(loggamma(z + (n - 1) / 2.0) - loggamma(z))
        out[nz] = pref * np.exp(2.0 * logratio)
    return float(out[0]) if np.ndim(lam) == 0 else out


def gamma_ratio_sq(dim: Dimension, lam) -> np.ndarray | float:
    """|Gamma(i lam)|^2 / |Gamma(i lam + (n-1)/2)|^2, the eigenfunction prefactor."""
    n = dim.n
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if n % 2 == 1:
        m = (n - 1) // 2
        denom = lam_arr**2
        for j in range(1, m):
            denom = denom * (lam_arr**2 + j**2)
        out = 1.0 / denom
    else:
        z = 1j * np.abs(lam_arr)
        out = np.exp(2.0 * np.real(loggamma(z) - loggamma(z + (n - 1) / 2.0)))
    return float(out[0]) if np.ndim(lam) == 0 else out


# --- symbolic ladder and truncated power series -------------------------------
#
# sympy's generic series() is far too slow on nested csch quotients, so
# small-s expansions are produced by direct truncated-series arithmetic:
# functions are lists of Taylor coefficients, and the ladder operator acts
# by differentiation followed by convolution with the series of s/sinh s.

_SERIES_ORDER = 18


def _ladder(expr: sp.Expr, var: sp.Symbol) -> sp.Expr:
    return sp.together(sp.diff(expr, var) / sp.sinh(var))


@lru_cache(maxsize=None)
def _s_over_sinh_coeffs(order: int = _SERIES_ORDER) -> tuple:
    """Rational Taylor coefficients of s/sinh s (exact sympy numbers)."""
    ser = sp.series(_S / sp.sinh(_S), _S, 0, order).removeO()
    poly = sp.Poly(ser, _S)
    return tuple(poly.coeff_monomial(_S**k) for k in range(order))


def _series_mul(a: list, b: list, order: int) -> list:
    out = [sp.Integer(0)] * order
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j >= order:
                break
            out[i + j] += ai * bj
    return out


def _series_ladder(coeffs: list, order: int) -> list:
    """Coefficients of D f = f'(s)/sinh s for an even series f."""
    dcoeffs = [(k + 1) * coeffs[k + 1] for k in range(len(coeffs) - 1)]
    # f even => f' vanishes at 0; divide by s then multiply by s/sinh s
    shifted = dcoeffs[1:] + [sp.Integer(0)]
    return _series_mul(shifted, list(_s_over_sinh_coeffs(order)), order)


def _poly_from_series(coeffs, var):
    return sp.Add(*[sp.expand(c) * var**k for k, c in enumerate(coeffs) if c != 0])


@lru_cache(maxsize=None)
def _ladder_cos(m: int):
    """Compiled D^m cos(lam*s) together with its small-s series in s."""
    expr = sp.cos(_LAM * _S)
    for _ in range(m):
        expr = _ladder(expr, _S)
    fn = sp.lambdify((_LAM, _S), expr, modules="numpy")
    order = _SERIES_ORDER
    coeffs = [sp.Integer(0)] * order
    for k in range(0, order, 2):
        coeffs[k] = sp.Integer(-1) ** (k // 2) * _LAM**k / sp.factorial(k)
    for _ in range(m):
        coeffs = _series_ladder(coeffs, order)
    ser_fn = sp.lambdify((_LAM, _S), _poly_from_series(coeffs, _S), modules="numpy")
    # value of GammaRatio * D^m cos at s = 0 is a lambda-independent constant
    denom = _LAM**2
    for j in range(1, m):
        denom *= _LAM**2 + j**2
    const = sp.cancel(coeffs[0] / denom) if m >= 1 else sp.Integer(1)
    if const.free_symbols:
        raise RuntimeError(f"normalization constant not lambda-free for m={m}: {const}")
    return fn, ser_fn, complex(const)


def _eval_piecewise(fn, ser_fn, lam, s):
    """Closed form away from 0, series below the cancellation cut."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    lam_arr = np.broadcast_to(np.asarray(lam, dtype=float), s_arr.shape)
    out = np.empty(s_arr.shape, dtype=float)
    small = np.abs(s_arr) < _SERIES_CUT
    if np.any(~small):
        out[~small] = fn(lam_arr[~small], s_arr[~small])
    if np.any(small):
        out[small] = ser_fn(lam_arr[small], s_arr[small])
    return out


# --- spherical functions ------------------------------------------------------

@lru_cache(maxsize=64)
def _leg_panel(order: int):
    return roots_legendre(order)


def _gauss_nodes(a: float, b: float, n: int):
    """Composite Gauss rule on [a, b] from cached order-64 panels."""
    if n <= 64:
        x, w = _leg_panel(max(n, 4))
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return mid + half * x, half * w
    x, w = _leg_panel(64)
    n_panels = -(-n // 64)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    return (mids[:, None] + half * x[None, :]).ravel(), np.tile(half * w, n_panels)


def _leven_integral_rows(dim: Dimension, lam: float, rho: np.ndarray,
                         rel_tol: float = 1e-9) -> np.ndarray:
    """Integral of sinh s / sqrt(cosh s - cosh rho) * D^{n/2} cos(lam s) over
    [rho, inf) for a whole array of rho, after the endpoint substitution
    s = rho + u^2 (shared u-grid, broadcast over rho)."""
    m = dim.n // 2
    fn, ser_fn, _ = _ladder_cos(m)
    span = 80.0  # integrand decays like exp(-s/2) regardless of m >= 1
    u_max = np.sqrt(span)
    rho = np.asarray(rho, dtype=float)[:, None]

    def compute(n_pts: int) -> np.ndarray:
        u, w = _gauss_nodes(0.0, u_max, n_pts)
        s = rho + u[None, :] ** 2
        # sqrt(cosh s - cosh rho) = sqrt(2 sinh((s+rho)/2) sinh((s-rho)/2)),
        # and sinh((s-rho)/2)/u^2 -> 1/2 smoothly as u -> 0
        q = np.sinh(u[None, :] ** 2 / 2.0) / u[None, :] ** 2
        g = _eval_piecewise(fn, ser_fn, lam, s)
        integrand = 2.0 * np.sinh(s) * g / np.sqrt(2.0 * np.sinh((s + rho) / 2.0) * q)
        return integrand @ w

    n_pts = max(600, int(24 * (abs(lam) * span) / (2 * np.pi)))
    a = compute(n_pts)
    b = compute(int(1.6 * n_pts))
    # measure convergence against the row magnitude: tiny entries of a row
    # dominated by oscillatory cancellation carry no relative meaning
    scale = max(float(np.max(np.abs(b))), 1e-300)
    worst = float(np.max(np.abs(a - b))) / scale
    if worst > rel_tol:
        raise AccuracyError(
            f"eigenfunction quadrature did not converge (lam={lam})",
            achieved=worst,
        )
    return b


def _leven_integral(dim: Dimension, lam: float, rho: float,
                    rel_tol: float = 1e-9) -> float:
    return float(_leven_integral_rows(dim, lam, np.array([rho]), rel_tol)[0])


@lru_cache(maxsize=None)
def _even_norm_const(n: int) -> float:
    """GammaRatio(lam) * Leven-integral at rho = 0 is lambda-independent;
    evaluate it once at a reference frequency."""
    dim = Dimension(n)
    lam_ref = 1.0
    return float(gamma_ratio_sq(dim, lam_ref)) * _leven_integral(dim, lam_ref, 0.0)


def spherical_function(dim: Dimension, lam: float, rho, *, limit: bool = False):
    """Radial eigenfunction phi_lambda(rho) of -Delta with eigenvalue
    lambda^2 + (n-1)^2/4, normalized so phi_lambda(0) = 1.

    ``rho`` may be an array.  ``rho <= 0`` raises unless ``limit=True``,
    in which case the limiting value 1 is used at rho = 0.
    """
    rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(rho_arr < 0) or (not limit and np.any(rho_arr == 0)):
        raise ValueError("rho must be positive (pass limit=True to allow rho = 0)")
    n = dim.n
    out = np.empty(rho_arr.shape, dtype=float)
    pos = rho_arr > 0
    if not np.any(pos):
        out[:] = 1.0
        return float(out[0]) if np.ndim(rho) == 0 else out
    if n % 2 == 1:
        m = (n - 1) // 2
        fn, ser_fn, const = _ladder_cos(m)
        vals = _eval_piecewise(fn, ser_fn, lam, rho_arr[pos])
        out[pos] = gamma_ratio_sq(dim, lam) * vals / const.real
    else:
        c = _even_norm_const(n)
        gr = float(gamma_ratio_sq(dim, lam))
        out[pos] = gr * _leven_integral_rows(dim, lam, rho_arr[pos]) / c
    out[~pos] = 1.0
    return float(out[0]) if np.ndim(rho) == 0 else out


def spherical_function_integral(dim: Dimension, lam: float, rho,
                                n_pts: int | None = None):
    """Direct sphere-average oracle for the eigenfunction (unnormalized).

    Evaluates |S^{n-2}| int_0^pi (cosh rho - sinh rho cos a)^{i lam - (n-1)/2}
    sin^{n-2} a  da, which equals |S^{n-1}| phi_lambda(rho).  At rho = 0 this
    is the surface area of S^{n-1}, independent of lambda.
    """
    n = dim.n
    rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(rho_arr < 0):
        raise ValueError("rho must be nonnegative")
    if n_pts is None:
        n_pts = max(400, int(16 * abs(lam) * float(np.max(rho_arr)) / np.pi))
    a, w = _gauss_nodes(0.0, np.pi, n_pts)
    base = (np.cosh(rho_arr)[:, None]
            - np.sinh(rho_arr)[:, None] * np.cos(a)[None, :])
    vals = base ** complex(-(n - 1) / 2.0, lam)
    integ = np.sum(w[None, :] * vals * np.sin(a)[None, :] ** (n - 2), axis=1)
    out = sphere_area(n - 1) * integ if n > 2 else 2.0 * integ
    out = np.real_if_close(out, tol=1e6)
    return complex(out[0]) if np.ndim(rho) == 0 else out


# --- F_k^m tables -------------------------------------------------------------

@dataclass(frozen=True)
class FkEntry:
    """One coefficient function F_k^m with compiled evaluators."""

    m: int
    k: int
    expr: sp.Expr
    _fn: callable
    _ser: callable

    def __call__(self, s):
        """Evaluate at real or complex s (series used for small |s|)."""
        s_arr = np.atleast_1d(np.asarray(s))
        out = np.empty(s_arr.shape, dtype=complex)
        small = np.abs(s_arr) < _SERIES_CUT
        if np.any(~small):
            out[~small] = self._fn(s_arr[~small])
        if np.any(small):
            out[small] = self._ser(s_arr[small])
        return complex(out[0]) if np.ndim(s) == 0 else out


@dataclass(frozen=True)
class FkTable:
    """Coefficients of the t-power expansion of D^m exp(i s^2 / 4t).

    ``entries[k-1]`` is F_k^m.  The recursion fixes every constant; in
    particular F_m^m = (i/2)^m (s/sinh s)^m, so ``leading_constant`` is
    (i/2)^m.
    """

    m: int
    entries: tuple[FkEntry, ...]

    @property
    def leading_constant(self) -> complex:
        return (0.5j) ** self.m

    def expansion(self, s, t: float):
        """Value of sum_k t^{-k} exp(i s^2/4t) F_k^m(s)."""
        s_arr = np.atleast_1d(np.asarray(s))
        phase = np.exp(1j * s_arr**2 / (4.0 * t))
        acc = np.zeros(s_arr.shape, dtype=complex)
        for k, entry in enumerate(self.entries, start=1):
            acc += entry(s_arr) / t**k
        out = phase * acc
        return complex(out[0]) if np.ndim(s) == 0 else out


@lru_cache(maxsize=None)
def _fk_exprs(m: int) -> tuple[sp.Expr, ...]:
    """Symbolic recursion: F_k^{m+1} = (i/2)(s/sinh s) F_{k-1}^m + D F_k^m."""
    x = _S / sp.sinh(_S)
    levels = {0: {0: sp.Integer(1)}}
    for mm in range(1, m + 1):
        prev = levels[mm - 1]
        cur: dict[int, sp.Expr] = {}
        for k, f in prev.items():
            cur[k + 1] = cur.get(k + 1, 0) + sp.I / 2 * x * f
            if k >= 1:
                cur[k] = cur.get(k, 0) + _ladder(f, _S)
        levels[mm] = {k: sp.together(v) for k, v in cur.items()}
    return tuple(levels[m][k] for k in range(1, m + 1))


@lru_cache(maxsize=None)
def _fk_series(m: int) -> tuple[tuple, ...]:
    """Small-s Taylor coefficients of each F_k^m (same recursion, in series space)."""
    order = _SERIES_ORDER
    x = list(_s_over_sinh_coeffs(order))
    one = [sp.Integer(1)] + [sp.Integer(0)] * (order - 1)
    levels = {0: {0: one}}
    for mm in range(1, m + 1):
        prev = levels[mm - 1]
        cur: dict[int, list] = {}
        for k, f in prev.items():
            bump = [sp.I / 2 * c for c in _series_mul(x, f, order)]
            if k + 1 in cur:
                cur[k + 1] = [a + b for a, b in zip(cur[k + 1], bump)]
            else:
                cur[k + 1] = bump
            if k >= 1:
                lad = _series_ladder(f, order)
                cur[k] = [a + b for a, b in zip(cur[k], lad)] if k in cur else lad
        levels[mm] = cur
    return tuple(tuple(levels[m][k]) for k in range(1, m + 1))


def _series_callable(coeffs) -> callable:
    c = np.array([complex(v) for v in coeffs])

    def ev(s):
        s = np.asarray(s)
        return np.polynomial.polynomial.polyval(s, c)

    return ev


@lru_cache(maxsize=None)
def fk_table(m: int) -> FkTable:
    """Build the table of F_k^m, 1 <= k <= m, for 1 <= m <= 6."""
    if not 1 <= m <= _MAX_M:
        raise UnsupportedOrderError(f"m must be in [1, {_MAX_M}], got {m}")
    entries = []
    for k, (expr, ser) in enumerate(zip(_fk_exprs(m), _fk_series(m)), start=1):
        fn = sp.lambdify(_S, expr, modules="numpy")
        entries.append(FkEntry(m, k, expr, fn, _series_callable(ser)))
    return FkTable(m, tuple(entries))


@dataclass(frozen=True)
class FkBoundReport:
    """Scan results for the weighted-derivative bounds of one table."""

    m: int
    alpha: int
    constants: tuple[float, ...]          # smallest admissible c per k
    second_derivative_sup: float | None   # only populated for m >= 2

    @property
    def all_finite(self) -> bool:
        finite = all(np.isfinite(c) for c in self.constants)
        if self.second_derivative_sup is not None:
            finite = finite and np.isfinite(self.second_derivative_sup)
        return finite


@lru_cache(maxsize=None)
def _sinh_over_s_coeffs(order: int = _SERIES_ORDER) -> tuple:
    return tuple(sp.Rational(1, sp.factorial(k + 1)) if k % 2 == 0 else sp.Integer(0)
                 for k in range(order))


def _series_diff(coeffs) -> list:
    return [(k + 1) * c for k, c in enumerate(coeffs[1:])]


@lru_cache(maxsize=None)
def _fk_weighted_derivs(m: int, k: int):
    """Compiled d^a/ds^a of (sinh s / s) F_k^m(s) / (i/2)^m for a = 0, 1, 2."""
    scale = 1 / (sp.I / 2) ** m
    expr = sp.together(sp.sinh(_S) / _S * _fk_exprs(m)[k - 1] * scale)
    ser = [scale * c for c in _series_mul(list(_sinh_over_s_coeffs()),
                                          list(_fk_series(m)[k - 1]), _SERIES_ORDER)]
    out = []
    for a in range(3):
        fn = sp.lambdify(_S, expr, modules="numpy")
        out.append((fn, _series_callable(ser)))
        expr = sp.together(sp.diff(expr, _S))
        ser = _series_diff(ser)
    return tuple(out)


def fk_bound_check(m: int, alpha: int, s_max: float = 30.0,
                   n_scan: int = 6000) -> FkBoundReport:
    """Scan |d^alpha((sinh s/s) F_k^m)| / (s^alpha (s/sinh s)^{m-1}) on (0, s_max].

    Entries are normalized by the recursion constant (i/2)^m so that the
    k = m, alpha = 0 ratio is identically 1.  Reported constants are
    measured artifacts, not asserted values.
    """
    if not 1 <= m <= _MAX_M:
        raise UnsupportedOrderError(f"m must be in [1, {_MAX_M}], got {m}")
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1")
    s = np.linspace(s_max / n_scan, s_max, n_scan)
    envelope = s**alpha * (s / np.sinh(s)) ** (m - 1)
    consts = []
    second_sup = None
    for k in range(1, m + 1):
        derivs = _fk_weighted_derivs(m, k)
        fn, ser_fn = derivs[alpha]
        vals = np.empty_like(s, dtype=complex)
        small = s < _SERIES_CUT
        vals[~small] = fn(s[~small])
        if np.any(small):
            vals[small] = ser_fn(s[small])
        ratio = np.abs(vals) / envelope
        consts.append(float(np.max(ratio)))
        if m >= 2:
            fn2, ser2 = derivs[2]
            v2 = np.empty_like(s, dtype=complex)
            v2[~small] = fn2(s[~small])
            if np.any(small):
                v2[small] = ser2(s[small])
            sup_k = float(np.max(np.abs(v2)))
            second_sup = sup_k if second_sup is None else max(second_sup, sup_k)
    return FkBoundReport(m, alpha, tuple(consts), second_sup)
