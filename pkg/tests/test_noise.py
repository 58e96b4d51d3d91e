import math

import numpy as np
import pytest
from scipy import integrate

from spindd import NoiseModel, sample_trajectory, spectral_density
from spindd.noise import (calibrated_rms, default_dt, sample_ensemble,
                          sample_on_partition)


class TestValidation:
    def test_bad_kind(self):
        with pytest.raises(ValueError):
            NoiseModel(kind="pink")

    def test_ou_needs_tau_c(self):
        with pytest.raises(ValueError):
            NoiseModel(kind="ornstein_uhlenbeck", b=1.0)

    def test_cutoff_needs_omega(self):
        with pytest.raises(ValueError):
            NoiseModel(kind="hard_cutoff", b=1.0)

    def test_negative_b(self):
        with pytest.raises(ValueError):
            NoiseModel(kind="static_gaussian", b=-1.0)


class TestSampling:
    def test_zero_amplitude_gives_zero_path(self):
        model = NoiseModel(kind="static_gaussian", b=0.0, seed=1)
        traj = sample_trajectory(model, 1e-4, 1e-5, spins=2)
        assert np.all(traj.values == 0.0)

    def test_fixed_seed_bit_identical(self):
        model = NoiseModel(kind="ornstein_uhlenbeck", b=1e4, tau_c=1e-5, seed=9)
        a = sample_trajectory(model, 1e-4, 1e-6, spins=2, trajectory_index=3)
        b = sample_trajectory(model, 1e-4, 1e-6, spins=2, trajectory_index=3)
        np.testing.assert_array_equal(a.values, b.values)
        c = sample_trajectory(model, 1e-4, 1e-6, spins=2, trajectory_index=4)
        assert not np.array_equal(a.values, c.values)

    def test_static_variance(self):
        b = 3.7e4
        model = NoiseModel(kind="static_gaussian", b=b, seed=2)
        vals = sample_ensemble(model, 1e-5, 1e-5, spins=1, n_traj=10_000)
        assert np.var(vals) == pytest.approx(b**2, rel=0.05)
        # constant within each trajectory
        traj = sample_trajectory(model, 1e-4, 1e-5, spins=1)
        assert np.ptp(traj.values) == 0.0

    def test_ou_autocorrelation_at_tau_c(self):
        b, tau_c = 2.0e4, 10e-6
        model = NoiseModel(kind="ornstein_uhlenbeck", b=b, tau_c=tau_c, seed=3)
        dt = tau_c / 10.0
        vals = sample_ensemble(model, 2 * tau_c, dt, spins=1, n_traj=10_000)[:, :, 0]
        corr = np.mean(vals[:, 0] * vals[:, 10])
        assert corr == pytest.approx(b**2 / math.e, rel=0.05)

    def test_ou_exact_discretization_all_lags(self):
        b, tau_c = 1.0e4, 7e-6
        model = NoiseModel(kind="ornstein_uhlenbeck", b=b, tau_c=tau_c, seed=4)
        dt = tau_c / 5.0
        vals = sample_ensemble(model, 4 * tau_c, dt, spins=1, n_traj=20_000)[:, :, 0]
        for lag in (0, 1, 3, 7, 15):
            got = np.mean(vals[:, 0] * vals[:, lag])
            want = b**2 * math.exp(-lag * dt / tau_c)
            assert got == pytest.approx(want, abs=4.0 * b**2 / math.sqrt(20_000))

    def test_ou_exact_on_uneven_partition(self):
        b, tau_c = 1.0e4, 7e-6
        model = NoiseModel(kind="ornstein_uhlenbeck", b=b, tau_c=tau_c, seed=5)
        edges = np.array([0.0, 1e-6, 1.5e-6, 8e-6, 8.2e-6, 20e-6])
        vals = sample_on_partition(model, edges, spins=1, n_traj=20_000)[:, :, 0]
        for i, j in ((0, 2), (1, 4), (0, 4)):
            got = np.mean(vals[:, i] * vals[:, j])
            want = b**2 * math.exp(-(edges[j] - edges[i]) / tau_c)
            assert got == pytest.approx(want, abs=4.0 * b**2 / math.sqrt(20_000))

    def test_independent_spins_uncorrelated(self):
        model = NoiseModel(kind="static_gaussian", b=1.0, seed=6)
        vals = sample_ensemble(model, 1e-5, 1e-5, spins=2, n_traj=4096)[:, 0, :]
        r = np.corrcoef(vals[:, 0], vals[:, 1])[0, 1]
        assert abs(r) < 3.0 / math.sqrt(4096)

    def test_correlated_mode_shares_path(self):
        model = NoiseModel(kind="ornstein_uhlenbeck", b=1e4, tau_c=1e-5, seed=7,
                           correlated_across_spins=True)
        traj = sample_trajectory(model, 1e-4, 1e-6, spins=3)
        np.testing.assert_array_equal(traj.values[:, 0], traj.values[:, 1])
        np.testing.assert_array_equal(traj.values[:, 0], traj.values[:, 2])

    def test_hard_cutoff_variance_and_smoothness(self):
        b = 5.0e4
        model = NoiseModel(kind="hard_cutoff", b=b, cutoff=2e5, seed=8)
        vals = sample_ensemble(model, 1e-4, 1e-6, spins=1, n_traj=3000)[:, :, 0]
        assert np.var(vals) == pytest.approx(b**2, rel=0.06)
        # correlation follows the sinc envelope of a flat band
        lag = 20
        tau = lag * 1e-6
        want = b**2 * math.sin(2e5 * tau) / (2e5 * tau)
        got = np.mean(vals[:, 0] * vals[:, lag])
        assert got == pytest.approx(want, abs=4.0 * b**2 / math.sqrt(3000))


class TestSpectralDensity:
    def test_ou_at_zero(self):
        b, tau_c = 2.0, 3.0
        model = NoiseModel(kind="ornstein_uhlenbeck", b=b, tau_c=tau_c)
        assert spectral_density(model, 0.0) == pytest.approx(b**2 * tau_c / math.pi)

    def test_ou_integral_is_half_variance(self):
        b, tau_c = 1.7, 0.3
        model = NoiseModel(kind="ornstein_uhlenbeck", b=b, tau_c=tau_c)
        val, _ = integrate.quad(lambda w: spectral_density(model, w), 0.0, np.inf)
        assert val == pytest.approx(b**2 / 2.0, rel=1e-6)

    def test_hard_cutoff_shape(self):
        b, wc = 2.0, 10.0
        model = NoiseModel(kind="hard_cutoff", b=b, cutoff=wc)
        assert spectral_density(model, wc * 1.01) == 0.0
        assert spectral_density(model, 1.0) == pytest.approx(b**2 / (2 * wc))
        val, _ = integrate.quad(lambda w: spectral_density(model, w), 0.0, wc)
        assert val == pytest.approx(b**2 / 2.0, rel=1e-9)

    def test_static_has_no_density(self):
        with pytest.raises(ValueError):
            spectral_density(NoiseModel(kind="static_gaussian", b=1.0), 1.0)


def test_default_dt_rules():
    ou = NoiseModel(kind="ornstein_uhlenbeck", b=1.0, tau_c=1e-5)
    assert default_dt(ou) == pytest.approx(1e-6)
    hc = NoiseModel(kind="hard_cutoff", b=1.0, cutoff=2 * math.pi * 1e5)
    assert default_dt(hc) == pytest.approx(1e-6)
    assert default_dt(NoiseModel(kind="static_gaussian", b=1.0)) is None
    assert default_dt(ou, min_event=2e-6) == pytest.approx(5e-7)


def test_calibrated_rms_quasistatic_fid():
    t2 = 25e-6
    b = calibrated_rms(t2)
    assert math.exp(-b**2 * t2**2 / 2.0) == pytest.approx(1.0 / math.e, rel=1e-12)
