import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abflux import channel
from abflux.channel import FluxAlphabet, NoiseModel, Outcome, StraySlot
from abflux.errors import ConfigError

from conftest import make_config


def test_encode_maps_symbols_to_levels():
    alphabet = FluxAlphabet((0.0, math.pi))
    assert channel.encode([0, 1, 0], alphabet).fluxes == (0.0, math.pi, 0.0)
    assert len(channel.encode([], alphabet)) == 0
    with pytest.raises(ConfigError):
        channel.encode([2], alphabet)


def test_alphabet_validation():
    with pytest.raises(ConfigError):
        FluxAlphabet(())
    with pytest.raises(ConfigError):
        FluxAlphabet((1.0, 1.0))
    assert FluxAlphabet((0.0, 3.0, 1.0)).guard_spacing == 1.0
    assert FluxAlphabet((0.0, 1.0)).decode(1.6, 0.5) is Outcome.ERASURE


def test_four_ary_round_trip():
    cfg = make_config(B0=0.1, Bc=2.0)
    alphabet = FluxAlphabet.evenly_spaced(4, math.pi)
    message = np.random.default_rng(1).integers(0, 4, 1000).tolist()
    report = channel.transmit(channel.encode(message, alphabet), cfg, NoiseModel(), seed=0)
    assert [f.symbol_out for f in report.frames] == message
    assert report.symbol_error_rate == 0.0


def test_single_symbol_pi_reads_half():
    cfg = make_config(Bc=2.0)
    report = channel.transmit(channel.encode([0], FluxAlphabet((math.pi,))), cfg, NoiseModel(), seed=0)
    assert report.frames[0].J_readout == pytest.approx(0.5, rel=1e-15)


def test_noise_leaves_angular_momentum_alone():
    cfg = make_config(Bc=2.0)
    alphabet = FluxAlphabet.evenly_spaced(3, 1.0)
    message = np.random.default_rng(2).integers(0, 3, 300).tolist()
    noise = channel.default_noise(cfg)
    report = channel.transmit(channel.encode(message, alphabet), cfg, noise, seed=11)
    assert report.noise_applied
    assert report.symbol_error_rate == 0.0
    assert report.J_readout_variance_per_symbol == 0.0
    assert report.E0_jitter_stddev > 0
    verdict = channel.energy_transmission_audit(report)
    assert verdict.passed and verdict.max_flux_energy_coupling == 0.0


def test_quiet_channel_has_constant_energy():
    cfg = make_config(Bc=2.0)
    report = channel.transmit(channel.encode([0, 1, 1, 0], FluxAlphabet((0.0, 1.0))), cfg, NoiseModel(), seed=0)
    assert len({f.E0_readout for f in report.frames}) == 1
    assert report.E0_jitter_stddev == 0.0
    assert not report.noise_applied


def test_blind_area_reports_no_signal():
    cfg = make_config(region="InterveningRegion")
    report = channel.transmit(channel.encode([0, 1], FluxAlphabet((0.0, 1.0))), cfg, channel.default_noise(cfg), seed=3)
    assert all(f.symbol_out is Outcome.NO_SIGNAL for f in report.frames)
    assert report.blind_area
    with pytest.raises(ConfigError):
        channel.energy_transmission_audit(report)


def test_arrival_delay():
    cfg = make_config(xC=5.0, c=2.0)
    report = channel.transmit(channel.encode([0, 1, 0], FluxAlphabet((0.0, 1.0))), cfg, NoiseModel(), seed=0)
    assert report.T == 2.5
    assert all(f.delay == 2.5 for f in report.frames)
    assert report.readout_at(2.4) is Outcome.NOT_YET_ARRIVED
    assert report.readout_at(2.5) == 0
    assert report.readout_at(3.5) == 1
    explicit = channel.transmit(channel.encode([1], FluxAlphabet((0.0, 1.0))), cfg, NoiseModel(), seed=0, T=7.0)
    assert explicit.readout_at(6.9) is Outcome.NOT_YET_ARRIVED


def test_tolerance_must_fit_guard():
    cfg = make_config()
    sched = channel.encode([0], FluxAlphabet((0.0, 1.0)))
    with pytest.raises(ConfigError):
        channel.transmit(sched, cfg, NoiseModel(), seed=0, decoder_tolerance=0.6)


def test_stray_replicating_source_rejected():
    cfg = make_config()
    noise = NoiseModel((StraySlot(cfg.source.center, cfg.source.radius, 1.0),))
    with pytest.raises(ConfigError):
        channel.transmit(channel.encode([0], FluxAlphabet((0.0,))), cfg, noise, seed=0)


def test_parallel_matches_serial():
    cfg = make_config(Bc=2.0)
    sched = channel.encode(np.random.default_rng(5).integers(0, 2, 64).tolist(), FluxAlphabet((0.0, 2.0)))
    noise = channel.default_noise(cfg)
    a = channel.transmit(sched, cfg, noise, seed=9, workers=1)
    b = channel.transmit(sched, cfg, noise, seed=9, workers=4)
    assert a.frames == b.frames


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), index=st.integers(0, 10**6))
def test_frame_rng_is_reproducible(seed, index):
    assert channel.frame_rng(seed, index).random() == channel.frame_rng(seed, index).random()
