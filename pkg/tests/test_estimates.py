import numpy as np
import pytest

from hypwave.estimates import (DecayFit, FitError, PairError, StrichartzPair,
                               decay_fit, dispersion_ratio,
                               dispersion_ratio_classical,
                               gagliardo_nirenberg_ratio,
                               gagliardo_nirenberg_scan, refined_sup,
                               strichartz_norm, weighted_lq_norm)
from hypwave.geometry import Dimension, RadialField
from hypwave.profiles import sample_profile


def test_pair_admissibility():
    StrichartzPair(2.0, 6.0, Dimension(3))
    StrichartzPair(np.inf, 2.0, Dimension(3))
    with pytest.raises(PairError):
        StrichartzPair(2.0, 4.0, Dimension(3))
    with pytest.raises(PairError):
        StrichartzPair(1.5, 6.0, Dimension(3))
    with pytest.raises(PairError):
        StrichartzPair(2.0, np.inf, Dimension(2))


def test_refined_sup_beats_grid_max():
    x = np.linspace(0, 1, 51)
    y = np.cos(3.0 * (x - 0.404))
    loc, sup = refined_sup(x, y)
    assert sup >= np.max(np.abs(y))
    assert sup == pytest.approx(1.0, abs=1e-4)
    assert loc == pytest.approx(0.404, abs=1e-3)


def test_refined_sup_boundary_max():
    x = np.linspace(0, 1, 11)
    y = np.exp(-x)
    loc, sup = refined_sup(x, y)
    assert (loc, sup) == (0.0, 1.0)


def test_weighted_norm_reduces_to_l2(rg3):
    u = sample_profile(rg3, "gaussian")
    assert weighted_lq_norm(u, 2.0) == pytest.approx(u.l2_norm(), rel=1e-12)


def test_decay_fit_window_validation(rg3, plan3):
    u = sample_profile(rg3, "gaussian")
    with pytest.raises(ValueError):
        decay_fit(u, "sup", (0.5, 0.5), plan3)
    with pytest.raises(ValueError):
        decay_fit(u, "sup", (0.1, 1.0), plan3, n_samples=3)


def test_decay_fit_requires_enough_samples():
    with pytest.raises(ValueError):
        DecayFit(-1.5, 0.0, 0.0, (0.1, 1.0), 4)


def test_dispersion_ratio_finite(rg3, plan3):
    u0 = sample_profile(rg3, "gaussian", sigma=0.6)
    r = dispersion_ratio(u0, 0.5, plan3)
    rc = dispersion_ratio_classical(u0, 0.5, plan3)
    assert 0 < r < 10
    assert 0 < rc < 10


def test_strichartz_mass_pair_is_unity(rg3, plan3):
    u0 = sample_profile(rg3, "gaussian", sigma=0.7)
    ratio = strichartz_norm(u0, StrichartzPair(np.inf, 2.0, Dimension(3)),
                            1.0, plan3, n_snapshots=9)
    assert ratio == pytest.approx(1.0, abs=1e-9)


def test_gn_ratio_amplitude_invariant(rg3):
    u = sample_profile(rg3, "gaussian", sigma=0.9)
    v = RadialField(rg3, 2.0 * u.values)
    p = 7.0 / 3.0
    assert gagliardo_nirenberg_ratio(u, p) == pytest.approx(
        gagliardo_nirenberg_ratio(v, p), rel=1e-12)


def test_gn_ratio_rejects_zero_field(rg3):
    z = RadialField(rg3, np.zeros(rg3.n_points))
    with pytest.raises(ZeroDivisionError):
        gagliardo_nirenberg_ratio(z, 2.0)


def test_gn_scan_positive(rg3):
    c = gagliardo_nirenberg_scan(rg3, 7.0 / 3.0, sigmas=np.geomspace(0.5, 2, 4))
    assert 0 < c < 1
