import numpy as np
import pytest

from conftest import rel_l2
from hypwave.geometry import Dimension, RadialField, RadialGrid
from hypwave.nls import (ConfigurationError, NlsConfig, blowup_experiment,
                         energy, fit_concave_quadratic, load_frame,
                         nonlinear_phase, run_nls, save_frame,
                         small_mass_threshold, step_strang, uncertainty_check,
                         variance, variance_rate, virial_series)
from hypwave.profiles import sample_profile
from hypwave.propagator import propagate_spectral


def test_config_validation():
    with pytest.raises(ConfigurationError):
        NlsConfig(p=1.0, dt=0.01, t_final=1.0)
    with pytest.raises(ConfigurationError):
        NlsConfig(p=2.0, dt=-0.01, t_final=1.0)
    with pytest.raises(ConfigurationError):
        NlsConfig(p=2.0, dt=0.01, t_final=1.0, snapshot_stride=0)


def test_nonlinear_phase_preserves_modulus(rg3):
    u = sample_profile(rg3, "gaussian", amplitude=2.0)
    v = nonlinear_phase(u, 0.05, 3.0)
    assert np.allclose(np.abs(v.values), np.abs(u.values), rtol=1e-14)


def test_step_reduces_to_linear_flow_at_small_amplitude(rg3, plan3):
    u0 = sample_profile(rg3, "gaussian", amplitude=1e-7, sigma=0.8)
    cfg = NlsConfig(p=2.0, dt=0.01, t_final=1.0)
    a = step_strang(u0, plan3, cfg)
    b = propagate_spectral(u0, 0.01, plan3)
    assert rel_l2(a, b) < 1e-8


def test_step_guard_rejects_underresolved_phase(rg3, plan3):
    u0 = sample_profile(rg3, "gaussian", amplitude=100.0)
    cfg = NlsConfig(p=3.0, dt=0.01, t_final=1.0)
    with pytest.raises(ConfigurationError):
        step_strang(u0, plan3, cfg)


def test_energy_zero_field(rg3):
    z = RadialField(rg3, np.zeros(rg3.n_points))
    assert energy(z, 2.0) == 0.0


def test_energy_phase_invariant(rg3, plan3):
    u = sample_profile(rg3, "gaussian")
    v = RadialField(rg3, np.exp(0.7j) * u.values)
    assert energy(u, 2.0, plan3) == pytest.approx(energy(v, 2.0, plan3),
                                                  rel=1e-12)


def test_variance_nonnegative_and_real_rate(rg3):
    u = sample_profile(rg3, "ring")
    assert variance(u) >= 0
    # a real-valued field carries no momentum
    assert variance_rate(u) == pytest.approx(0.0, abs=1e-12)


def test_uncertainty_ratio_phase_invariant(rg3, plan3):
    u = sample_profile(rg3, "gaussian")
    v = RadialField(rg3, np.exp(1.1j) * u.values)
    assert uncertainty_check(u, plan3) == pytest.approx(
        uncertainty_check(v, plan3), rel=1e-12)
    z = RadialField(rg3, np.zeros(rg3.n_points))
    with pytest.raises(ZeroDivisionError):
        uncertainty_check(z, plan3)


def test_run_conserves_mass(rg3, plan3):
    u0 = sample_profile(rg3, "gaussian", sigma=1.0)
    cfg = NlsConfig(p=2.0, dt=5e-3, t_final=0.2, snapshot_stride=5)
    run = run_nls(u0, plan3, cfg)
    drift = np.max(np.abs(run.mass - run.mass[0])) / run.mass[0]
    assert drift < 1e-10
    assert not np.any(run.drift_flags)


def test_virial_series_shapes_and_positivity(rg3, plan3):
    u0 = sample_profile(rg3, "gaussian", sigma=1.0)
    cfg = NlsConfig(p=2.0, dt=5e-3, t_final=0.2, snapshot_stride=5)
    run = run_nls(u0, plan3, cfg)
    s = virial_series(run, plan3)
    assert np.all(s.variance >= 0)
    # interior finite differences of V track the momentum formula
    rel = np.max(np.abs(s.rate_formula[1:-1] - s.rate_fd[1:-1])) \
        / np.max(np.abs(s.rate_formula[1:-1]))
    assert rel < 1e-2


def test_virial_series_needs_snapshots(rg3, plan3):
    u0 = sample_profile(rg3, "gaussian")
    cfg = NlsConfig(p=2.0, dt=0.01, t_final=0.01)
    run = run_nls(u0, plan3, cfg)
    with pytest.raises(ValueError):
        virial_series(run, plan3)


def test_fit_concave_quadratic():
    ts = np.linspace(0, 0.5, 20)
    V = 1.0 - ts**2
    assert fit_concave_quadratic(ts, V) == pytest.approx(1.0, abs=1e-9)
    assert fit_concave_quadratic(ts, 1.0 + ts**2) is None


def test_small_mass_threshold_formula():
    assert small_mass_threshold(Dimension(3), 0.1) == pytest.approx(
        ((2 + 4 / 3) / 0.2) ** 0.75)
    with pytest.raises(ValueError):
        small_mass_threshold(Dimension(3), 0.0)


def test_blowup_experiment_rejects_boundary_mass():
    rg = RadialGrid(Dimension(3), 10.0, 128)
    u0 = sample_profile(rg, "ring", center=9.5, width=0.2)
    from hypwave.propagator import make_plan

    with pytest.raises(ConfigurationError):
        blowup_experiment(u0, make_plan(rg),
                          NlsConfig(p=7 / 3, dt=1e-3, t_final=0.1))


def test_frame_roundtrip(tmp_path, rg3):
    u = sample_profile(rg3, "gaussian")
    path = tmp_path / "frame.bin"
    save_frame(u, 1.25, path)
    v, t = load_frame(path)
    assert t == 1.25
    assert v.grid == rg3
    assert np.array_equal(v.values, u.values)


def test_frame_checksum(tmp_path, rg3):
    u = sample_profile(rg3, "gaussian")
    path = tmp_path / "frame.bin"
    save_frame(u, 0.0, path)
    raw = bytearray(path.read_bytes())
    raw[40] ^= 0x01
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        load_frame(path)
