import numpy as np
import pytest

from hypwave.geometry import Dimension
from hypwave.kernels import (KernelRequest, OscQuadConfig, ParityError,
                             induction_integral, kernel_even, kernel_odd,
                             kernel_point, oscillatory_I,
                             oscillatory_tail_integral,
                             oscillatory_tail_integral_damped)
from hypwave.specfun import fk_table


def test_request_validation():
    with pytest.raises(ValueError):
        KernelRequest(Dimension(3), 0.0, 1.0)
    with pytest.raises(ValueError):
        KernelRequest(Dimension(3), 1.0, -0.1)


def test_config_validation():
    with pytest.raises(ValueError):
        OscQuadConfig(eps_schedule=(0.1, 0.2))
    with pytest.raises(ValueError):
        OscQuadConfig(tol=-1.0)
    with pytest.raises(ValueError):
        OscQuadConfig(singular_order=3)


def test_parity_dispatch_errors():
    with pytest.raises(ParityError):
        kernel_odd(KernelRequest(Dimension(2), 1.0, 1.0))
    with pytest.raises(ParityError):
        kernel_even(KernelRequest(Dimension(3), 1.0, 1.0))


def test_odd_kernel_closed_form_n3():
    # K^3(t, rho) = exp(i rho^2/4t) (i/2) (rho/sinh rho) t^{-3/2}
    t, rho = 0.7, 1.9
    expected = (np.exp(1j * rho**2 / (4 * t)) * 0.5j * rho / np.sinh(rho)
                / t**1.5)
    got = kernel_odd(KernelRequest(Dimension(3), t, rho))
    assert abs(got - expected) / abs(expected) < 1e-13


def test_negative_time_conjugation():
    for n in (2, 3, 4, 5):
        kp = kernel_point(KernelRequest(Dimension(n), 0.7, 1.3))
        km = kernel_point(KernelRequest(Dimension(n), -0.7, 1.3))
        assert abs(km - np.conj(kp)) <= 1e-12 * abs(kp)


def test_dual_quadrature_routes_agree():
    for (t, rho) in [(1.0, 2.0), (0.3, 0.5), (2.0, 0.0)]:
        a = oscillatory_tail_integral(t, rho)
        b = oscillatory_tail_integral_damped(t, rho)
        assert abs(a - b) / abs(a) < 1e-4


def test_weighted_integral_routes_agree():
    table = fk_table(1)

    def w(s):
        return np.sinh(s) / s * table.entries[0](s)

    a = oscillatory_tail_integral(0.8, 1.1, w)
    b = oscillatory_tail_integral_damped(0.8, 1.1, w)
    assert abs(a - b) / abs(a) < 1e-4


def test_tail_integral_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        oscillatory_tail_integral(-0.5, 1.0)
    with pytest.raises(ValueError):
        oscillatory_tail_integral(0.0, 1.0)


def test_oscillatory_I_envelope_ratio():
    res = oscillatory_I(0.2, 1.5)
    assert np.isfinite(res.bound_ratio)
    assert res.bound_ratio > 0
    assert abs(res.value) == pytest.approx(
        res.bound_ratio * np.sqrt(0.2) * np.sqrt(1.5 / np.sinh(1.5)))


def test_oscillatory_I_at_origin():
    res = oscillatory_I(0.3, 0.0)
    assert np.isfinite(res.value)


def test_even_kernel_finite_values():
    for n in (2, 4):
        v = kernel_point(KernelRequest(Dimension(n), 0.6, 1.2))
        assert np.isfinite(v)
        assert v != 0


def test_induction_integral_runs():
    v = induction_integral(Dimension(2), 0.8, 1.0)
    assert np.isfinite(v)
    assert v != 0
