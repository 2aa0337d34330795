import mpmath
import numpy as np
import pytest

from hypwave.geometry import Dimension
from hypwave.specfun import (UnsupportedOrderError, fk_bound_check, fk_table,
                             gamma_ratio_sq, plancherel_density,
                             spherical_function, spherical_function_integral)


def test_density_closed_form_n3():
    lam = np.linspace(0.1, 20, 50)
    expected = lam**2 / (2 * (2 * np.pi) ** 3)
    assert np.allclose(plancherel_density(Dimension(3), lam), expected, rtol=1e-14)


def test_density_closed_form_n2():
    lam = np.linspace(0.1, 20, 50)
    expected = lam * np.tanh(np.pi * lam) / (2 * (2 * np.pi) ** 2)
    assert np.allclose(plancherel_density(Dimension(2), lam), expected, rtol=1e-14)


def test_density_generic_branch_n5():
    # |Gamma(i lam + 2)|^2 / |Gamma(i lam)|^2 = lam^2 (1 + lam^2)
    lam = np.linspace(0.2, 10, 30)
    expected = lam**2 * (1 + lam**2) / (2 * (2 * np.pi) ** 5)
    assert np.allclose(plancherel_density(Dimension(5), lam), expected, rtol=1e-12)


def test_density_vanishes_at_zero():
    for n in (2, 3, 4, 5):
        assert plancherel_density(Dimension(n), 0.0) == 0.0


def test_density_gamma_ratio_reciprocal():
    # density * gamma_ratio_sq = 1 / (2 (2 pi)^n) identically
    lam = np.linspace(0.3, 8, 20)
    for n in (2, 3, 4, 5, 6):
        dim = Dimension(n)
        prod = plancherel_density(dim, lam) * gamma_ratio_sq(dim, lam)
        assert np.allclose(prod, 1.0 / (2 * (2 * np.pi) ** n), rtol=1e-12)


def test_spherical_closed_form_n3():
    lam, rho = 2.5, np.linspace(0.05, 6, 40)
    expected = np.sin(lam * rho) / (lam * np.sinh(rho))
    got = spherical_function(Dimension(3), lam, rho)
    assert np.allclose(got, expected, rtol=1e-12, atol=1e-14)


def test_spherical_normalized_at_origin():
    for n in (2, 3, 4, 5):
        assert spherical_function(Dimension(n), 1.7, 0.0, limit=True) == 1.0


def test_spherical_rejects_negative_rho():
    with pytest.raises(ValueError):
        spherical_function(Dimension(3), 1.0, -0.5)


def test_spherical_integral_matches_direct_n2():
    # the two independent representations differ by one lambda-free constant
    dim = Dimension(2)
    rho = np.linspace(0.2, 4, 10)
    r1 = np.real(spherical_function_integral(dim, 0.8, rho)) \
        / spherical_function(dim, 0.8, rho)
    r2 = np.real(spherical_function_integral(dim, 3.0, rho)) \
        / spherical_function(dim, 3.0, rho)
    assert np.max(np.abs(r1 - r2)) / abs(np.mean(r1)) < 1e-8


def test_fk_first_entry_closed_form():
    # F_1^1 = (i/2) s / sinh s
    table = fk_table(1)
    s = np.linspace(0.2, 10, 25)
    assert np.allclose(table.entries[0](s), 0.5j * s / np.sinh(s), rtol=1e-13)


def test_fk_series_matches_closed_form_at_cut():
    # the two evaluators agree at the same points near the |s| = 0.05 switch
    for m in (2, 3):
        table = fk_table(m)
        for entry in table.entries:
            for s in (0.04, 0.05, 0.06):
                a = complex(np.atleast_1d(entry._fn(np.array([s])))[0])
                b = complex(np.atleast_1d(entry._ser(np.array([s])))[0])
                # closed form cancels near s = 0; ~1e-10 is the fp floor
                assert abs(a - b) / abs(a) < 1e-9


def test_fk_expansion_against_nested_differentiation():
    mpmath.mp.dps = 30
    t = 0.7
    table = fk_table(2)
    f = lambda x: mpmath.e ** (1j * x**2 / (4 * t))
    g = f
    for _ in range(2):
        g = (lambda gg: lambda x: mpmath.diff(gg, x) / mpmath.sinh(x))(g)
    s = 1.3
    ref = complex(g(mpmath.mpf(s)))
    assert abs(table.expansion(s, t) - ref) / abs(ref) < 1e-12


def test_fk_leading_constant():
    for m in (1, 2, 3, 4):
        assert fk_table(m).leading_constant == (0.5j) ** m


def test_fk_table_order_limits():
    with pytest.raises(UnsupportedOrderError):
        fk_table(7)
    with pytest.raises(UnsupportedOrderError):
        fk_table(0)


def test_fk_bound_check_identity_and_finiteness():
    rep = fk_bound_check(3, 0)
    assert rep.all_finite
    assert rep.constants[-1] == pytest.approx(1.0, abs=1e-10)
    rep1 = fk_bound_check(3, 1)
    assert rep1.all_finite


def test_fk_bound_check_rejects_alpha_two():
    with pytest.raises(ValueError):
        fk_bound_check(2, 2)
