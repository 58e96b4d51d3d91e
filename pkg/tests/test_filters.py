import math

import numpy as np
import pytest

from spindd import DDScheme, NoiseModel, chi, filter_function
from spindd.sequence import PulseSequence, delay, generate, pulse

T = 58.1e-6


def free(t_total=T):
    return PulseSequence((delay(t_total),))


def echo(t_total=T):
    return generate(DDScheme("cpmg", n=1, total_duration=t_total, tau_pi=0.0))


class TestFilterFunction:
    def test_free_evolution_closed_form(self):
        w = np.linspace(1e2, 1e6, 300)
        np.testing.assert_allclose(filter_function(free(), w),
                                   2.0 * np.sin(w * T / 2.0) ** 2, atol=1e-9)

    def test_single_echo_closed_form(self):
        w = np.linspace(1e2, 1e6, 300)
        np.testing.assert_allclose(filter_function(echo(), w),
                                   8.0 * np.sin(w * T / 4.0) ** 4, atol=1e-9)

    def test_single_echo_quartic_low_frequency(self):
        # leading behaviour ~ omega^4: slope 4 on a log-log ramp
        w = np.array([1e1, 1e2])
        f = filter_function(echo(), w)
        slope = np.log(f[1] / f[0]) / np.log(10.0)
        assert slope == pytest.approx(4.0, abs=1e-3)

    def test_zero_frequency_vanishes_for_balanced_trains(self):
        for name, n in (("cpmg", 1), ("cpmg", 6), ("udd", 3), ("udd", 7)):
            seq = generate(DDScheme(name, n=n, total_duration=T, tau_pi=0.0))
            assert filter_function(seq, 1e-3) < 1e-12

    def test_nonnegative(self):
        rng = np.random.default_rng(0)
        seq = generate(DDScheme("udd", n=5, total_duration=T, tau_pi=0.0))
        w = rng.uniform(0, 1e7, size=500)
        assert np.all(filter_function(seq, w) >= 0.0)

    def test_cpmg2_equals_udd2(self):
        # the Uhrig instants for N=2 are T/4 and 3T/4: identical sequences
        w = np.linspace(1e3, 1e6, 200)
        f_cpmg = filter_function(generate(DDScheme("cpmg", n=2, total_duration=T,
                                                   tau_pi=0.0)), w)
        f_udd = filter_function(generate(DDScheme("udd", n=2, total_duration=T,
                                                  tau_pi=0.0)), w)
        np.testing.assert_allclose(f_cpmg, f_udd, atol=1e-10)

    def test_time_reversal_invariance(self):
        seq = generate(DDScheme("udd", n=4, total_duration=T, tau_pi=2e-6))
        rev = PulseSequence(tuple(reversed(seq.events)))
        w = np.linspace(1e3, 1e6, 200)
        np.testing.assert_allclose(filter_function(seq, w), filter_function(rev, w),
                                   atol=1e-9)

    def test_finite_width_uses_centers(self):
        wide = generate(DDScheme("cpmg", n=2, tau=5e-6, tau_pi=4e-6))
        narrow = generate(DDScheme("cpmg", n=2, total_duration=wide.total_duration,
                                   tau_pi=0.0))
        w = np.linspace(1e3, 1e6, 100)
        np.testing.assert_allclose(filter_function(wide, w), filter_function(narrow, w),
                                   atol=1e-9)

    def test_rejects_non_pi_pulses(self):
        seq = PulseSequence((delay(1e-6), pulse(math.pi / 2, 0.0, 0.0), delay(1e-6)))
        with pytest.raises(ValueError):
            filter_function(seq, 1e3)


class TestChi:
    def test_ou_free_evolution_closed_form(self):
        # double integral of the exponential correlation has a closed form
        for tau_c, b in ((2e-6, 2e5), (40e-6, 6e4)):
            model = NoiseModel("ornstein_uhlenbeck", b=b, tau_c=tau_c)
            got = chi(free(), model).chi
            want = b**2 * tau_c**2 * (T / tau_c - 1.0 + math.exp(-T / tau_c))
            assert got == pytest.approx(want, rel=1e-5)

    def test_ou_quasistatic_short_time_limit(self):
        b, tau_c = 1e4, 1.0  # tau_c >> T: quasi-static
        model = NoiseModel("ornstein_uhlenbeck", b=b, tau_c=tau_c)
        assert chi(free(), model).chi == pytest.approx(b**2 * T**2 / 2.0, rel=1e-4)

    def test_static_closed_form(self):
        b = 5e4
        model = NoiseModel("static_gaussian", b=b)
        assert chi(free(), model).chi == pytest.approx(b**2 * T**2 / 2.0, rel=1e-12)
        assert chi(echo(), model).chi == pytest.approx(0.0, abs=1e-20)

    def test_linearity_in_variance(self):
        seq = generate(DDScheme("udd", n=3, total_duration=T, tau_pi=0.0))
        m1 = NoiseModel("ornstein_uhlenbeck", b=3e4, tau_c=1e-5)
        m2 = NoiseModel("ornstein_uhlenbeck", b=6e4, tau_c=1e-5)
        assert chi(seq, m2).chi == pytest.approx(4.0 * chi(seq, m1).chi, rel=1e-9)

    def test_predicted_signal(self):
        model = NoiseModel("ornstein_uhlenbeck", b=5e4, tau_c=2e-5)
        res = chi(free(), model)
        assert res.predicted_signal == pytest.approx(math.exp(-res.chi), rel=1e-12)
        assert res.chi >= 0.0
        assert len(res.omega) == 400 and len(res.f) == 400

    def test_hard_cutoff_udd_beats_cpmg(self):
        model = NoiseModel("hard_cutoff", b=5e5, cutoff=2.5 * math.pi / T)
        c_udd = chi(generate(DDScheme("udd", n=7, total_duration=T, tau_pi=0.0)), model).chi
        c_cpmg = chi(generate(DDScheme("cpmg", n=7, total_duration=T, tau_pi=0.0)), model).chi
        assert c_udd < c_cpmg

    def test_soft_cutoff_cpmg_beats_udd(self):
        model = NoiseModel("ornstein_uhlenbeck", b=1e5, tau_c=1e-5)
        c_udd = chi(generate(DDScheme("udd", n=7, total_duration=T, tau_pi=0.0)), model).chi
        c_cpmg = chi(generate(DDScheme("cpmg", n=7, total_duration=T, tau_pi=0.0)), model).chi
        assert c_cpmg <= c_udd

    def test_none_noise(self):
        assert chi(free(), NoiseModel.none()).chi == 0.0

    def test_csv_output(self, tmp_path):
        res = chi(free(), NoiseModel("ornstein_uhlenbeck", b=5e4, tau_c=2e-5))
        res.write_csv(tmp_path / "filter.csv", tmp_path / "chi.csv")
        header = (tmp_path / "filter.csv").read_text().split("\n")[0]
        assert header == "omega_rad_s,F"
        rows = (tmp_path / "chi.csv").read_text().strip().split("\n")
        assert rows[0] == "T_s,chi,predicted_signal"
        assert len(rows) == 2
