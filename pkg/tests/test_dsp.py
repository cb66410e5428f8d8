"""Signal-processing oracles: FIR design, 2x resampling, mel analysis,
pitch tracking and the pitch-correlation metric.
"""

import numpy as np
import pytest

from promptvoc.dsp import (
    FIRFilter,
    InvalidDesignError,
    MelConfig,
    PitchContour,
    UndefinedMetricError,
    Waveform,
    design_lowpass,
    downsample2x,
    filter_response_db,
    load_wav,
    mel_center_freqs,
    mel_spectrogram,
    num_frames,
    pitch_correlation,
    save_wav,
    track_pitch,
    upsample2x,
)


class TestDesignLowpass:
    def test_stopband_attenuation(self):
        # cutoff 0.5, transition 0.1 at 80 dB: response beyond 0.6 stays
        # at or below -77 dB (small Kaiser overshoot allowance).
        f = design_lowpass(0.5, 0.1, 80.0)
        resp = filter_response_db(f, np.linspace(0.6, 1.0, 400))
        assert resp.max() <= -77.0

    def test_taps_symmetric(self):
        f = design_lowpass(0.3, 0.07, 60.0)
        assert np.array_equal(f.taps, f.taps[::-1])

    def test_unity_dc_gain(self):
        for cutoff, trans in [(0.2, 0.05), (0.5, 0.1), (0.475, 0.05)]:
            f = design_lowpass(cutoff, trans)
            assert abs(f.taps.sum() - 1.0) <= 1e-3

    def test_odd_length(self):
        assert len(design_lowpass(0.4, 0.1, 70.0).taps) % 2 == 1

    def test_invalid_designs_rejected(self):
        with pytest.raises(InvalidDesignError):
            design_lowpass(0.0, 0.1)
        with pytest.raises(InvalidDesignError):
            design_lowpass(0.95, 0.1)  # cutoff+transition above Nyquist
        with pytest.raises(InvalidDesignError):
            design_lowpass(0.5, -0.1)
        with pytest.raises(InvalidDesignError):
            design_lowpass(0.5, 0.1, atten_db=30.0)

    def test_firfilter_requires_odd_taps(self):
        with pytest.raises(ValueError):
            FIRFilter(taps=np.ones(4), cutoff_norm=0.5, atten_db=80.0)


def _band_energy_db(x, rate, lo_hz, hi_hz):
    spec = np.abs(np.fft.rfft(x * np.hanning(len(x)))) ** 2
    freqs = np.fft.rfftfreq(len(x), 1.0 / rate)
    band = (freqs > lo_hz) & (freqs <= hi_hz)
    total = spec.sum()
    return 10.0 * np.log10(max(spec[band].sum(), 1e-30) / total)


class TestResample2x:
    def test_upsample_length(self):
        assert len(upsample2x(np.ones(321))) == 642

    def test_downsample_length(self):
        assert len(downsample2x(np.ones(642))) == 321

    def test_constant_preserved(self):
        up = upsample2x(np.full(1000, 0.7))
        edge = -(-len(halfband_taps()) // 2)
        assert np.max(np.abs(up[edge:-edge] - 0.7)) <= 1e-3
        down = downsample2x(np.full(1000, 0.7))
        assert np.max(np.abs(down[edge // 2 : -edge // 2] - 0.7)) <= 1e-3

    @pytest.mark.parametrize("rel", [0.5, 0.7, 0.9])
    def test_upsample_image_suppression(self, rel):
        rate = 8000
        n = 8000
        tone = np.sin(2 * np.pi * rel * rate / 2 * np.arange(n) / rate)
        up = upsample2x(tone)
        # Everything above the source Nyquist is imaging energy.
        assert _band_energy_db(up, 2 * rate, rate / 2, rate) <= -60.0

    def test_round_trip_tone(self):
        rate = 8000
        n = 4000
        tone = np.sin(2 * np.pi * 0.3 * rate / 2 * np.arange(n) / rate)
        back = downsample2x(upsample2x(tone))
        err = np.abs(back[200:-200] - tone[200:-200])
        assert err.max() <= 1e-2

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            upsample2x(np.array([]))
        with pytest.raises(ValueError):
            downsample2x(np.array([]))


def halfband_taps():
    from promptvoc.dsp import halfband_filter

    return halfband_filter().taps


class TestMelSpectrogram:
    def test_zero_waveform_hits_floor(self):
        cfg = MelConfig()
        mel = mel_spectrogram(Waveform(np.zeros(24000)), cfg)
        assert np.all(mel == np.log(cfg.log_floor))

    def test_one_second_is_100_frames(self):
        mel = mel_spectrogram(Waveform(np.random.default_rng(0).standard_normal(24000) * 0.1))
        assert mel.shape == (100, 80)

    def test_frame_count_convention_random_lengths(self, rng):
        cfg = MelConfig()
        for _ in range(10):
            n = int(rng.integers(1000, 60000))
            w = Waveform(rng.standard_normal(n) * 0.1)
            assert mel_spectrogram(w, cfg).shape[0] == num_frames(n, cfg.hop)
            assert num_frames(n, cfg.hop) == -(-n // cfg.hop)

    def test_tone_argmax_matches_center_frequencies(self):
        cfg = MelConfig()
        t = np.arange(48000) / cfg.sample_rate
        mel = mel_spectrogram(Waveform(0.5 * np.sin(2 * np.pi * 1000.0 * t)), cfg)
        expected = int(np.argmin(np.abs(mel_center_freqs(cfg) - 1000.0)))
        hit = np.argmax(mel, axis=1)
        # Interior frames (edges see padding) must all peak at that bin.
        assert np.all(hit[5:-5] == expected)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mel_spectrogram(Waveform(np.zeros(0)))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MelConfig(hop=2048)  # hop > win
        with pytest.raises(ValueError):
            MelConfig(fmax=20000.0)  # above Nyquist
        with pytest.raises(ValueError):
            MelConfig(hop=100)  # not 10 ms at 24 kHz


class TestTrackPitch:
    def test_sawtooth_100hz(self):
        rate = 24000
        t = np.arange(3 * rate) / rate
        saw = 0.5 * (2 * ((100.0 * t) % 1.0) - 1.0)
        c = track_pitch(Waveform(saw, rate))
        f0 = c.f0[c.voicing]
        assert abs(np.median(f0) - 100.0) <= 2.0

    def test_sine_440hz(self):
        rate = 24000
        t = np.arange(2 * rate) / rate
        c = track_pitch(Waveform(0.5 * np.sin(2 * np.pi * 440.0 * t), rate))
        assert abs(np.median(c.f0[c.voicing]) - 440.0) <= 9.0

    def test_silence_unvoiced(self):
        c = track_pitch(Waveform(np.zeros(24000)))
        assert not c.voicing.any()
        assert np.all(c.f0 == 0.0)

    def test_bad_range_rejected(self):
        w = Waveform(np.zeros(24000))
        with pytest.raises(ValueError):
            track_pitch(w, f0_min=600.0, f0_max=50.0)
        with pytest.raises(ValueError):
            track_pitch(w, f0_min=50.0, f0_max=20000.0)


class TestPitchCorrelation:
    def _contour(self, f0):
        f0 = np.asarray(f0, dtype=float)
        return PitchContour(f0=f0, voicing=f0 > 0, hop=240)

    def test_self_correlation(self):
        c = self._contour(100 + 50 * np.random.default_rng(0).random(50))
        assert abs(pitch_correlation(c, c) - 1.0) <= 1e-9

    def test_affine_invariance(self):
        a = self._contour(100 + 50 * np.random.default_rng(1).random(50))
        b = self._contour(2 * a.f0 + 50)
        assert abs(pitch_correlation(a, b) - 1.0) <= 1e-9

    def test_reversed_sweep_negative(self):
        sweep = np.linspace(100, 300, 80)
        a = self._contour(sweep)
        b = self._contour(sweep[::-1])
        assert pitch_correlation(a, b) <= -0.9

    def test_no_common_voicing_undefined(self):
        a = PitchContour(f0=np.array([100.0, 0.0]), voicing=np.array([True, False]), hop=240)
        b = PitchContour(f0=np.array([0.0, 100.0]), voicing=np.array([False, True]), hop=240)
        with pytest.raises(UndefinedMetricError):
            pitch_correlation(a, b)

    def test_zero_variance_undefined(self):
        a = self._contour(np.full(10, 100.0))
        with pytest.raises(UndefinedMetricError):
            pitch_correlation(a, a)

    def test_hop_mismatch_rejected(self):
        a = self._contour(np.linspace(100, 200, 10))
        b = PitchContour(f0=a.f0, voicing=a.voicing, hop=160)
        with pytest.raises(ValueError):
            pitch_correlation(a, b)


class TestAudioIO:
    def test_float_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        w = Waveform(np.clip(rng.standard_normal(12345) * 0.2, -1, 1))
        path = tmp_path / "x.wav"
        save_wav(path, w)
        back = load_wav(path)
        assert back.sample_rate == 24000
        np.testing.assert_allclose(back.samples, w.samples, atol=1e-6)

    def test_resample_on_load(self, tmp_path):
        rate = 48000
        t = np.arange(rate) / rate
        w = Waveform(0.5 * np.sin(2 * np.pi * 440.0 * t), rate)
        path = tmp_path / "y.wav"
        save_wav(path, w)
        back = load_wav(path, target_rate=24000)
        assert back.sample_rate == 24000
        assert len(back) == 24000

    def test_waveform_validation(self):
        with pytest.raises(ValueError):
            Waveform(np.zeros((2, 10)))
        with pytest.raises(ValueError):
            Waveform(np.array([np.nan, 0.0]))
        with pytest.raises(ValueError):
            Waveform(np.zeros(10), sample_rate=0)
