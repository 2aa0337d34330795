import numpy as np
import pytest

from conftest import rel_l2
from hypwave.geometry import Dimension, DimensionError, GridError, RadialField, \
    RadialGrid
from hypwave.kernels import KernelRequest, kernel_odd
from hypwave.profiles import sample_profile
from hypwave.propagator import (PropagatorPlan, TimeRangeError, calibrate_plan,
                                closed_form_c3, make_plan, propagate,
                                propagate_kernel, propagate_spectral,
                                radial_kernel_n3, sphere_average_kernel)


def test_plan_validation(rg3):
    with pytest.raises(ValueError):
        make_plan(rg3, route="nonsense")
    rg2 = RadialGrid(Dimension(2), 6.0, 32)
    with pytest.raises(DimensionError):
        PropagatorPlan("kernel_closed3", rg2, make_plan(rg2, lam_max=4.0).sgrid)


def test_semigroup_property(rg3, plan3):
    u0 = sample_profile(rg3, "gaussian", sigma=0.8)
    a = propagate_spectral(propagate_spectral(u0, 0.3, plan3), 0.4, plan3)
    b = propagate_spectral(u0, 0.7, plan3)
    assert rel_l2(a, b) < 1e-12


def test_time_reversal(rg3, plan3):
    u0 = sample_profile(rg3, "gaussian", sigma=0.8)
    back = propagate_spectral(propagate_spectral(u0, 0.6, plan3), -0.6, plan3)
    assert rel_l2(u0, back) < 1e-12


def test_mass_conservation(rg3, plan3):
    u0 = sample_profile(rg3, "ring")
    u1 = propagate_spectral(u0, 1.0, plan3)
    assert abs(u1.mass() - u0.mass()) / u0.mass() < 1e-12


def test_closed_kernel_symmetry():
    r = np.array([0.5, 1.0, 2.5])
    k = radial_kernel_n3(0.4, r[:, None], r[None, :])
    assert np.allclose(k, k.T)


def test_closed_kernel_point_limit():
    # r2 -> 0 recovers the point kernel K^3 exactly
    t, r = 0.4, 1.7
    lim = complex(radial_kernel_n3(t, r, 1e-5)) / (1e-5 / np.sinh(1e-5))
    point = kernel_odd(KernelRequest(Dimension(3), t, r))
    # the sphere average at radius r2 equals K^3(t, r) * (r2/sinh r2) + O(r2^2)
    assert abs(lim - point) / abs(point) < 1e-6


def test_closed_kernel_validation():
    with pytest.raises(ValueError):
        radial_kernel_n3(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        radial_kernel_n3(0.5, -1.0, 1.0)


def test_sphere_average_matches_closed_form_n3():
    for (t, r, r2) in [(0.5, 1.0, 2.0), (0.3, 0.7, 0.7), (1.0, 3.0, 1.5)]:
        g = sphere_average_kernel(Dimension(3), t, r, r2)
        c = complex(radial_kernel_n3(t, r, r2))
        assert abs(g - c) / abs(c) < 1e-10


def test_sphere_average_even_dimension_smoke():
    v = sphere_average_kernel(Dimension(2), 0.6, 1.0, 1.5)
    assert np.isfinite(v)
    assert v != 0


def test_calibration_recovers_analytic_constant(rg3):
    plan = calibrate_plan(make_plan(rg3, route="kernel_closed3"))
    c_ref = closed_form_c3()
    assert abs(plan.c_n - c_ref) / abs(c_ref) < 1e-12


def test_calibration_stable_in_reference_time(rg3):
    a = calibrate_plan(make_plan(rg3, route="kernel_closed3"), t_ref=0.5)
    b = calibrate_plan(make_plan(rg3, route="kernel_closed3"), t_ref=0.8)
    assert abs(a.c_n - b.c_n) / abs(a.c_n) < 1e-10


def test_kernel_route_guards(rg3):
    plan = calibrate_plan(make_plan(rg3, route="kernel_closed3"))
    u0 = sample_profile(rg3, "gaussian")
    with pytest.raises(TimeRangeError):
        propagate_kernel(u0, 1e-6, plan)
    raw = make_plan(rg3, route="kernel_closed3")
    with pytest.raises(ValueError):
        propagate_kernel(u0, 0.5, raw)
    other = RadialGrid(Dimension(3), 13.0, 64)
    with pytest.raises(GridError):
        propagate_kernel(sample_profile(other, "gaussian"), 0.5, plan)


def test_dispatch_routes_agree(rg3, plan3):
    plan_k = calibrate_plan(make_plan(rg3, route="kernel_closed3"))
    u0 = sample_profile(rg3, "gaussian", sigma=0.8)
    a = propagate(u0, 0.5, plan3)
    b = propagate(u0, 0.5, plan_k)
    assert rel_l2(a, b) < 1e-8
