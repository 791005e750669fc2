"""Active-level meter and mean power."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechmix import (AudioBuffer, NoActiveSpeechError, active_level_p56,
                       fit_length, mean_power)
from tests.conftest import FS, speech_like


def test_mean_power_alternating():
    assert mean_power(AudioBuffer([1.0, -1.0, 1.0, -1.0], 8000)) == 1.0


def test_mean_power_zeros():
    assert mean_power(AudioBuffer(np.zeros(16), 8000)) == 0.0


def test_mean_power_unit_sine_whole_periods():
    t = np.arange(8000) / 8000.0
    buf = AudioBuffer(np.sin(2 * np.pi * 100 * t), 8000)
    assert mean_power(buf) == pytest.approx(0.5, rel=1e-12)


def test_zero_padding_halves_mean_power():
    rng = np.random.default_rng(5)
    buf = AudioBuffer(rng.normal(size=1000), 8000)
    doubled = fit_length(buf, 2000)
    assert mean_power(doubled) == pytest.approx(mean_power(buf) / 2.0, rel=1e-12)


def test_p56_full_scale_sine_always_active():
    t = np.arange(FS * 2) / FS
    rep = active_level_p56(AudioBuffer(np.sin(2 * np.pi * 1000 * t), FS))
    assert rep.long_term_power == pytest.approx(0.5, rel=1e-6)
    assert rep.active_power == pytest.approx(0.5, rel=0.05)
    assert rep.activity_factor == pytest.approx(1.0, abs=0.05)


def test_p56_half_active_sine_vs_direct_rms():
    # 10 s of unit sine followed by 10 s of digital silence; the oracle is a
    # direct mean square over the known active region
    n_half = FS * 10
    t = np.arange(n_half) / FS
    x = np.concatenate([np.sin(2 * np.pi * 440 * t), np.zeros(n_half)])
    rep = active_level_p56(AudioBuffer(x, FS))
    direct_active = float(np.mean(x[:n_half] ** 2))
    assert rep.long_term_power == pytest.approx(direct_active / 2.0, rel=1e-9)
    # hangover and envelope decay inflate activity a little past 0.5
    assert rep.active_power == pytest.approx(direct_active, rel=0.05)
    assert rep.activity_factor == pytest.approx(0.5, abs=0.05)


def test_p56_all_zero_raises():
    with pytest.raises(NoActiveSpeechError):
        active_level_p56(AudioBuffer(np.zeros(FS), FS))


def test_p56_lone_click_raises():
    x = np.zeros(FS)
    x[FS // 2] = 0.9
    with pytest.raises(NoActiveSpeechError):
        active_level_p56(AudioBuffer(x, FS))


def test_p56_too_short_or_low_rate():
    with pytest.raises(ValueError):
        active_level_p56(AudioBuffer(np.ones(100), FS))
    with pytest.raises(ValueError):
        active_level_p56(AudioBuffer(np.ones(4000), 4000))


def test_p56_active_at_least_long_term():
    for seed in range(5):
        buf = speech_like(1.5, seed)
        rep = active_level_p56(buf)
        assert rep.active_power >= rep.long_term_power
        assert 0.0 < rep.activity_factor <= 1.0


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3), st.integers(0, 100))
def test_p56_gain_invariance(gain, seed):
    buf = speech_like(1.0, seed)
    base = active_level_p56(buf)
    scaled = active_level_p56(AudioBuffer(gain * buf.samples, buf.sample_rate))
    assert scaled.active_power == pytest.approx(gain * gain * base.active_power, rel=1e-9)
    assert scaled.long_term_power == pytest.approx(gain * gain * base.long_term_power, rel=1e-9)
    assert scaled.activity_factor == pytest.approx(base.activity_factor, rel=1e-9)
