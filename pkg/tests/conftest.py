import numpy as np
import pytest

import sparseofdm as so


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_system():
    """Desk-scale OFDM/pulse/channel triple used across the suite."""
    cfg = so.OfdmConfig(K=64, M=16, N=16)
    pulse = so.PulseConfig(num_taps=16)
    channel = so.ChannelGenConfig(l_mean=6.0, delay_spread=40e-9, gamma_decay=7.5e-9)
    return cfg, pulse, channel


def draw_small_channel(small_system, seed=0):
    cfg, pulse, channel = small_system
    gen = so.trial_rng(seed, 0, 0)
    mpcs = so.sample_mpcs(channel, cfg.M, gen)
    return so.assemble_channel(mpcs, pulse), mpcs, gen
