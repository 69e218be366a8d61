import json
import math

import numpy as np
import pytest

import sparseofdm as so
from sparseofdm.channel import _pulse_values


class TestSampleMpcs:
    def test_alignment_ordering_normalization(self):
        config = so.ChannelGenConfig()
        for seed in range(20):
            mpcs = so.sample_mpcs(config, 128, so.trial_rng(seed, 0, 0))
            assert mpcs.delays[0] == 0.0
            assert np.all(np.diff(mpcs.delays) > 0)
            assert len(mpcs.delays) == len(mpcs.amplitudes) == len(mpcs.phases)
            assert np.all(mpcs.phases >= 0) and np.all(mpcs.phases < 2 * np.pi)
            assert mpcs.total_power == pytest.approx(1.0, abs=1e-12)
            assert mpcs.delays[-1] <= config.delay_spread

    def test_single_component_amplitude(self):
        # M=1 forces redraws until exactly one arrival survives.
        config = so.ChannelGenConfig(
            l_mean=1.0, sigma_alpha=0.0, gamma_decay=math.inf, p_recv=2.0
        )
        mpcs = so.sample_mpcs(config, 1, so.trial_rng(3, 0, 0))
        assert len(mpcs) == 1
        assert mpcs.amplitudes[0] == pytest.approx(math.sqrt(2.0), abs=1e-12)
        assert mpcs.delays[0] == 0.0

    def test_mean_component_count(self):
        # Monte Carlo over the arrival process: mean within 3 standard errors.
        config = so.ChannelGenConfig(l_mean=28.0, delay_spread=320e-9)
        gen = so.trial_rng(7, 0, 0)
        counts = np.array(
            [len(so.sample_mpcs(config, 128, gen)) for _ in range(10_000)]
        )
        stderr = counts.std(ddof=1) / math.sqrt(len(counts))
        assert abs(counts.mean() - 28.0) <= 3 * stderr

    def test_l_mean_must_fit_taps(self):
        with pytest.raises(so.ConfigurationError):
            so.sample_mpcs(so.ChannelGenConfig(l_mean=28.0), 16, so.trial_rng(0, 0, 0))

    def test_invalid_config_rejected(self):
        with pytest.raises(so.ConfigurationError):
            so.ChannelGenConfig(delay_spread=-1.0)
        with pytest.raises(so.ConfigurationError):
            so.ChannelGenConfig(l_mean=0.5)
        with pytest.raises(so.ConfigurationError):
            so.ChannelGenConfig(cluster_count_mean=3.0)  # missing partner
        with pytest.raises(so.ConfigurationError):
            so.ChannelGenConfig(distribution_kind="cauchy")

    def test_clustered_arrivals(self):
        config = so.ChannelGenConfig(
            l_mean=24.0,
            cluster_count_mean=4.0,
            intra_cluster_rate=2e8,
        )
        gen = so.trial_rng(11, 0, 0)
        counts = []
        for _ in range(300):
            mpcs = so.sample_mpcs(config, 128, gen)
            counts.append(len(mpcs))
            assert mpcs.delays[0] == 0.0
            assert np.all(np.diff(mpcs.delays) > 0)
            assert mpcs.total_power == pytest.approx(1.0, abs=1e-12)
        # component budget is split across clusters; mean stays in the ballpark
        assert 12 <= np.mean(counts) <= 30

    def test_determinism(self):
        config = so.ChannelGenConfig()
        a = so.sample_mpcs(config, 128, so.trial_rng(5, 1, 2))
        b = so.sample_mpcs(config, 128, so.trial_rng(5, 1, 2))
        np.testing.assert_array_equal(a.delays, b.delays)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
        np.testing.assert_array_equal(a.phases, b.phases)


class TestComparisonChannels:
    def test_full_support_when_l_equals_m(self, rng):
        dec = so.sample_comparison_channel("bernoulli_gaussian", 8, 8, rng)
        assert np.all(np.abs(dec.taps) > 0)

    def test_exact_support_size(self, rng):
        dec = so.sample_comparison_channel("bernoulli_gaussian", 128, 28, rng)
        assert np.count_nonzero(dec.taps) == 28

    @pytest.mark.parametrize("kind", so.COMPARISON_KINDS)
    def test_unit_power(self, kind, rng):
        dec = so.sample_comparison_channel(kind, 64, 12, rng)
        assert abs(dec.power - 1.0) < 1e-12

    def test_dimension_error(self, rng):
        with pytest.raises(so.DimensionError):
            so.sample_comparison_channel("bernoulli_gaussian", 16, 17, rng)

    def test_unknown_kind(self, rng):
        with pytest.raises(so.ConfigurationError):
            so.sample_comparison_channel("mmwave_lognormal", 16, 4, rng)


class TestPulse:
    def test_sinc_on_grid_is_impulse(self):
        pulse = so.PulseConfig(num_taps=8)
        np.testing.assert_allclose(so.pulse_vector(pulse, 0.0), np.eye(8)[0], atol=1e-15)
        shifted = so.pulse_vector(pulse, 3 * pulse.sample_period)
        np.testing.assert_allclose(shifted, np.eye(8)[3], atol=1e-12)

    def test_sinc_off_grid_scalar_oracle(self):
        pulse = so.PulseConfig(sample_period=2.5e-9, num_taps=8)
        tau = 1.25e-9
        vec = so.pulse_vector(pulse, tau)
        for n in range(8):
            x = (n * 2.5e-9 - tau) / 2.5e-9
            expected = math.sin(math.pi * x) / (math.pi * x) if x != 0 else 1.0
            assert vec[n] == pytest.approx(expected, abs=1e-14)

    def test_raised_cosine_singularity(self):
        beta = 0.25
        pulse = so.PulseConfig(kind="raised_cosine", rolloff=beta, num_taps=8)
        t_sing = pulse.sample_period / (2 * beta)
        value = _pulse_values(pulse, np.array([t_sing]))[0]
        expected = (math.pi / 4) * np.sinc(1 / (2 * beta))
        assert value == pytest.approx(expected, rel=1e-6)
        # Nyquist property: zero crossings on the integer grid
        on_grid = _pulse_values(pulse, pulse.sample_period * np.arange(1, 5))
        np.testing.assert_allclose(on_grid, 0.0, atol=1e-12)

    def test_truncation_energy(self):
        pulse = so.PulseConfig(num_taps=128)
        T = pulse.sample_period
        # exact on the sampling grid
        for k in (0, 5, 100, 127):
            assert np.sum(so.pulse_vector(pulse, k * T) ** 2) == pytest.approx(1.0, abs=1e-12)
        # within the documented tolerance away from the window edges
        gen = np.random.default_rng(0)
        for tau in gen.uniform(15 * T, (128 - 15) * T, size=50):
            energy = np.sum(so.pulse_vector(pulse, tau) ** 2)
            assert abs(energy - 1.0) <= pulse.truncation_tol

    def test_pulse_matrix_identity_on_grid(self):
        pulse = so.PulseConfig(num_taps=8)
        T = pulse.sample_period
        P = so.pulse_matrix(pulse, np.array([0.0, T, 2 * T]))
        np.testing.assert_allclose(P, np.eye(8)[:, :3], atol=1e-12)

    def test_pulse_matrix_frobenius(self):
        pulse = so.PulseConfig(num_taps=128)
        T = pulse.sample_period
        delays = 20 * T + np.array([0.0, 4.3, 9.1, 15.7, 23.2]) * T
        P = so.pulse_matrix(pulse, delays)
        assert np.sum(P**2) == pytest.approx(len(delays), rel=0.02)

    def test_column_inner_products_match_sinc_oracle(self):
        # Discrete shifted-sinc inner products equal sinc of the separation
        # (up to window truncation); beyond ~0.8 samples they stay below 0.3.
        pulse = so.PulseConfig(num_taps=128)
        T = pulse.sample_period
        base = 50 * T
        for sep in np.arange(0.5, 4.01, 0.25):
            P = so.pulse_matrix(pulse, np.array([base, base + sep * T]))
            inner = float(P[:, 0] @ P[:, 1])
            assert inner == pytest.approx(np.sinc(sep), abs=5e-3)
            if sep >= 0.8:
                assert abs(inner) < 0.3

    def test_duplicate_delays_rejected(self):
        pulse = so.PulseConfig(num_taps=8)
        with pytest.raises(so.DegenerateDictionaryError):
            so.pulse_matrix(pulse, np.array([0.0, 0.0]))

    def test_bad_pulse_config(self):
        with pytest.raises(so.ConfigurationError):
            so.PulseConfig(kind="gaussian")
        with pytest.raises(so.ConfigurationError):
            so.PulseConfig(kind="raised_cosine", rolloff=0.0)


class TestAssemble:
    def test_single_mpc_impulse(self):
        pulse = so.PulseConfig(num_taps=8)
        mpcs = so.MpcSet(delays=[0.0], amplitudes=[1.0], phases=[0.0])
        dec = so.assemble_channel(mpcs, pulse)
        np.testing.assert_allclose(dec.taps, np.eye(8)[0].astype(complex), atol=1e-15)

    def test_two_on_grid_mpcs(self):
        pulse = so.PulseConfig(num_taps=8)
        T = pulse.sample_period
        a = 1 / math.sqrt(2)
        mpcs = so.MpcSet(delays=[0.0, T], amplitudes=[a, a], phases=[0.0, 0.0])
        dec = so.assemble_channel(mpcs, pulse)
        expected = np.zeros(8, dtype=complex)
        expected[0] = expected[1] = a
        np.testing.assert_allclose(dec.taps, expected, atol=1e-12)
        assert dec.power == pytest.approx(1.0, abs=1e-12)

    def test_matches_matrix_form(self):
        # summation form vs pulse_matrix @ gains: two code paths agree
        pulse = so.PulseConfig(num_taps=64)
        config = so.ChannelGenConfig(l_mean=10.0, delay_spread=160e-9)
        for seed in range(5):
            mpcs = so.sample_mpcs(config, 64, so.trial_rng(seed, 0, 0))
            dec = so.assemble_channel(mpcs, pulse)
            matrix_form = so.pulse_matrix(pulse, mpcs.delays) @ mpcs.gains
            assert np.max(np.abs(dec.taps - matrix_form)) < 1e-12

    def test_on_grid_norm_exact(self):
        pulse = so.PulseConfig(num_taps=16)
        T = pulse.sample_period
        mpcs = so.MpcSet(
            delays=[0.0, 2 * T, 7 * T],
            amplitudes=[0.6, 0.5, math.sqrt(1 - 0.36 - 0.25)],
            phases=[0.1, 2.0, 4.0],
        )
        dec = so.assemble_channel(mpcs, pulse)
        assert dec.power == pytest.approx(mpcs.total_power, abs=1e-12)


class TestTypes:
    def test_mpcset_validation(self):
        with pytest.raises(so.ConfigurationError):
            so.MpcSet(delays=[1e-9], amplitudes=[1.0], phases=[0.0])  # tau1 != 0
        with pytest.raises(so.ConfigurationError):
            so.MpcSet(delays=[0.0, 0.0], amplitudes=[1, 1], phases=[0, 0])
        with pytest.raises(so.DimensionError):
            so.MpcSet(delays=[0.0], amplitudes=[1.0, 2.0], phases=[0.0])
        with pytest.raises(so.ConfigurationError):
            so.MpcSet(delays=[0.0], amplitudes=[1.0], phases=[7.0])

    def test_mpcs_csv(self):
        mpcs = so.MpcSet(delays=[0.0, 5e-9], amplitudes=[0.8, 0.6], phases=[0.0, 1.5])
        text = mpcs.to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "tau_s,alpha,phi_rad"
        assert len(lines) == 3
        tau, alpha, phi = (float(x) for x in lines[2].split(","))
        assert (tau, alpha, phi) == (5e-9, 0.6, 1.5)

    def test_channel_config_json_roundtrip(self):
        config = so.ChannelGenConfig(l_mean=12.0, cluster_count_mean=3.0,
                                     intra_cluster_rate=1e8)
        data = json.loads(config.to_json())
        assert data["l_mean"] == 12.0  # flat key/value document
        restored = so.ChannelGenConfig.from_json(config.to_json())
        assert restored == config

    def test_channel_config_json_unknown_key(self):
        with pytest.raises(so.ConfigurationError):
            so.ChannelGenConfig.from_json('{"bandwidth": 1}')

    def test_discrete_channel_validation(self):
        pulse = so.PulseConfig(num_taps=4)
        with pytest.raises(so.DimensionError):
            so.DiscreteChannel(taps=np.ones(3), pulse=pulse)
