"""Signal-processing primitives: audio I/O, mel analysis, FIR design,
anti-aliased 2x resampling, pitch tracking and the pitch-correlation metric.

Everything here is pure numpy/scipy and free of learned parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly


class InvalidDesignError(ValueError):
    """Raised when an FIR design request cannot be satisfied."""


class UndefinedMetricError(ValueError):
    """Raised when a metric has no defined value for the given inputs."""


@dataclass(frozen=True)
class Waveform:
    """Mono audio signal with its sample rate."""

    samples: np.ndarray
    sample_rate: int = 24000

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("waveform must be mono (1-D)")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class MelConfig:
    """STFT/mel analysis settings; hop is pinned to 10 ms frames."""

    sample_rate: int = 24000
    n_fft: int = 1024
    hop: int = 240
    win: int = 1024
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 12000.0
    log_floor: float = 1e-5

    def __post_init__(self):
        if not (self.hop <= self.win <= self.n_fft):
            raise ValueError("need hop <= win <= n_fft")
        if self.fmax > self.sample_rate / 2:
            raise ValueError("fmax above Nyquist")
        if self.hop * 100 != self.sample_rate:
            raise ValueError("hop must correspond to 10 ms frames")


@dataclass(frozen=True)
class FIRFilter:
    """Linear-phase low-pass filter taps with their design targets."""

    taps: np.ndarray
    cutoff_norm: float
    atten_db: float

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if len(taps) % 2 != 1:
            raise ValueError("taps must have odd length")
        object.__setattr__(self, "taps", taps)


@dataclass
class PitchContour:
    """Per-frame F0 in Hz (0 where unvoiced) plus voicing flags."""

    f0: np.ndarray
    voicing: np.ndarray
    hop: int

    def __post_init__(self):
        self.f0 = np.asarray(self.f0, dtype=np.float64)
        self.voicing = np.asarray(self.voicing, dtype=bool)
        if self.f0.shape != self.voicing.shape:
            raise ValueError("f0 and voicing must align")


def design_lowpass(cutoff_norm: float, transition_norm: float, atten_db: float = 80.0) -> FIRFilter:
    """Design a Kaiser-windowed sinc low-pass filter.

    ``cutoff_norm`` is the passband edge and ``cutoff_norm + transition_norm``
    the stopband edge, both as fractions of Nyquist.  The returned taps are
    odd-length, symmetric, and normalized to unity DC gain.
    """
    if not 0.0 < cutoff_norm < 1.0:
        raise InvalidDesignError(f"cutoff_norm must be in (0, 1), got {cutoff_norm}")
    if transition_norm <= 0 or cutoff_norm + transition_norm >= 1.0:
        raise InvalidDesignError(
            f"cutoff+transition must stay below Nyquist, got {cutoff_norm + transition_norm}"
        )
    if atten_db < 40:
        raise InvalidDesignError("stopband attenuation below 40 dB is not supported")

    # Kaiser window sizing (Oppenheim & Schafer).
    delta_omega = transition_norm * np.pi
    numtaps = int(np.ceil((atten_db - 7.95) / (2.285 * delta_omega))) + 1
    if numtaps % 2 == 0:
        numtaps += 1
    if atten_db > 50:
        beta = 0.1102 * (atten_db - 8.7)
    else:
        beta = 0.5842 * (atten_db - 21) ** 0.4 + 0.07886 * (atten_db - 21)

    # Ideal response cuts at the middle of the transition band.
    fc = cutoff_norm + transition_norm / 2.0
    m = np.arange(numtaps) - (numtaps - 1) / 2.0
    taps = fc * np.sinc(fc * m) * np.kaiser(numtaps, beta)
    taps = taps / taps.sum()
    return FIRFilter(taps=taps, cutoff_norm=cutoff_norm, atten_db=atten_db)


# Default anti-aliasing filter for 2x resampling: half-band with a narrow
# transition so images of tones up to 0.95 of the source Nyquist land in
# the stopband.
_HALFBAND: FIRFilter | None = None


def halfband_filter() -> FIRFilter:
    global _HALFBAND
    if _HALFBAND is None:
        _HALFBAND = design_lowpass(0.475, 0.05, 80.0)
    return _HALFBAND


def _same_convolve(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Zero-delay convolution with reflect padding ("same" length)."""
    half = len(taps) // 2
    if len(x) > half:
        padded = np.pad(x, half, mode="reflect")
    else:
        padded = np.pad(x, half, mode="constant")
    return np.convolve(padded, taps, mode="valid")


def upsample2x(x: np.ndarray, f: FIRFilter | None = None) -> np.ndarray:
    """Anti-aliased 2x upsampling: zero-stuff then low-pass with 2*taps."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot upsample an empty sequence")
    f = f or halfband_filter()
    stuffed = np.zeros(2 * len(x), dtype=np.float64)
    stuffed[::2] = x
    return _same_convolve(stuffed, 2.0 * f.taps)


def downsample2x(x: np.ndarray, f: FIRFilter | None = None) -> np.ndarray:
    """Anti-aliased 2x downsampling: low-pass then keep every 2nd sample."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot downsample an empty sequence")
    f = f or halfband_filter()
    return _same_convolve(x, f.taps)[::2]


def filter_response_db(f: FIRFilter, freqs_norm: np.ndarray) -> np.ndarray:
    """Magnitude response in dB at normalized frequencies (1.0 = Nyquist)."""
    omega = np.asarray(freqs_norm, dtype=np.float64) * np.pi
    n = np.arange(len(f.taps))
    h = f.taps @ np.exp(-1j * np.outer(n, omega))
    return 20.0 * np.log10(np.maximum(np.abs(h), 1e-12))


def _hz_to_mel(hz):
    # Slaney-style scale: linear below 1 kHz, log above.
    hz = np.asarray(hz, dtype=np.float64)
    mel = hz / (200.0 / 3)
    log_region = hz >= 1000.0
    mel = np.where(
        log_region,
        15.0 + np.log(np.maximum(hz, 1e-10) / 1000.0) / (np.log(6.4) / 27.0),
        mel,
    )
    return mel


def _mel_to_hz(mel):
    mel = np.asarray(mel, dtype=np.float64)
    hz = mel * (200.0 / 3)
    log_region = mel >= 15.0
    hz = np.where(log_region, 1000.0 * np.exp((mel - 15.0) * (np.log(6.4) / 27.0)), hz)
    return hz


def mel_filterbank(cfg: MelConfig) -> np.ndarray:
    """Area-normalized triangular mel filterbank, (n_mels, n_fft//2+1)."""
    n_bins = cfg.n_fft // 2 + 1
    fft_freqs = np.arange(n_bins) * cfg.sample_rate / cfg.n_fft
    mel_pts = np.linspace(_hz_to_mel(cfg.fmin), _hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    hz_pts = _mel_to_hz(mel_pts)
    fb = np.zeros((cfg.n_mels, n_bins))
    for i in range(cfg.n_mels):
        lo, ctr, hi = hz_pts[i], hz_pts[i + 1], hz_pts[i + 2]
        up = (fft_freqs - lo) / max(ctr - lo, 1e-10)
        down = (hi - fft_freqs) / max(hi - ctr, 1e-10)
        fb[i] = np.maximum(0.0, np.minimum(up, down)) * 2.0 / (hi - lo)
    return fb


def mel_center_freqs(cfg: MelConfig) -> np.ndarray:
    """Center frequency (Hz) of each mel filter."""
    mel_pts = np.linspace(_hz_to_mel(cfg.fmin), _hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    return _mel_to_hz(mel_pts)[1:-1]


def num_frames(num_samples: int, hop: int) -> int:
    """Frame-count convention used throughout: ceil(num_samples / hop)."""
    return -(-num_samples // hop)


def mel_spectrogram(w: Waveform, cfg: MelConfig | None = None) -> np.ndarray:
    """Log-mel analysis, (frames, n_mels) with frames = ceil(len / hop).

    The signal is zero-padded to a whole number of hops, reflect-padded by
    n_fft//2 on both sides, and frame t covers samples [t*hop, t*hop+n_fft)
    of the padded signal (window centered on the frame start).
    """
    cfg = cfg or MelConfig()
    x = w.samples
    if len(x) == 0:
        raise ValueError("cannot analyze an empty waveform")
    frames = num_frames(len(x), cfg.hop)
    x = np.pad(x, (0, frames * cfg.hop - len(x)))
    half = cfg.n_fft // 2
    x = np.pad(x, half, mode="reflect" if len(x) > half else "constant")

    window = np.hanning(cfg.win + 1)[: cfg.win]
    pad = cfg.n_fft - cfg.win
    window = np.pad(window, (pad // 2, pad - pad // 2))
    idx = np.arange(cfg.n_fft)[None, :] + cfg.hop * np.arange(frames)[:, None]
    segs = x[idx] * window
    mag = np.abs(np.fft.rfft(segs, axis=1))
    mel = mag @ mel_filterbank(cfg).T
    return np.log(np.maximum(mel, cfg.log_floor))


def track_pitch(
    w: Waveform,
    f0_min: float = 50.0,
    f0_max: float = 600.0,
    voicing_threshold: float = 0.3,
    window_s: float = 0.025,
) -> PitchContour:
    """Normalized-autocorrelation pitch tracker, one estimate per 10 ms.

    Voicing requires the peak normalized autocorrelation to exceed the
    threshold; the peak lag is refined by parabolic interpolation.
    """
    sr = w.sample_rate
    if not f0_min < f0_max <= sr / 4:
        raise ValueError("need f0_min < f0_max <= sample_rate/4")
    win = int(round(window_s * sr))
    if len(w) < win:
        raise ValueError("waveform shorter than one analysis window")
    hop = sr // 100
    lag_min = int(math.floor(sr / f0_max))
    lag_max = int(math.ceil(sr / f0_min))

    frames = num_frames(len(w), hop)
    x = np.pad(w.samples, (win // 2, win + lag_max))
    f0 = np.zeros(frames)
    voicing = np.zeros(frames, dtype=bool)
    lags = np.arange(lag_min, lag_max + 1)
    for t in range(frames):
        seg = x[t * hop : t * hop + win + lag_max + 1]
        base = seg[:win]
        e0 = base @ base
        if e0 < 1e-10:
            continue
        # NCCF over the candidate lag range.
        shifted = np.lib.stride_tricks.sliding_window_view(seg, win)[lags]
        num = shifted @ base
        den = np.sqrt(e0 * np.einsum("ij,ij->i", shifted, shifted))
        nccf = num / np.maximum(den, 1e-10)
        best = float(np.max(nccf))
        if best < voicing_threshold:
            continue
        # Prefer the shortest lag near the peak to avoid octave-down errors.
        k = int(np.argmax(nccf >= best - 0.02))
        lag = float(lags[k])
        if 0 < k < len(lags) - 1:
            a, b, c = nccf[k - 1], nccf[k], nccf[k + 1]
            denom = a - 2 * b + c
            if abs(denom) > 1e-12:
                lag += 0.5 * (a - c) / denom
        est = sr / lag
        if f0_min <= est <= f0_max:
            f0[t] = est
            voicing[t] = True
    return PitchContour(f0=f0, voicing=voicing, hop=hop)


def pitch_correlation(a: PitchContour, b: PitchContour) -> float:
    """Pearson correlation of F0 over frames voiced in both contours."""
    if a.hop != b.hop:
        raise ValueError("contours must share the same hop")
    n = min(len(a.f0), len(b.f0))
    both = a.voicing[:n] & b.voicing[:n]
    if both.sum() < 2:
        raise UndefinedMetricError("fewer than 2 commonly voiced frames")
    fa, fb = a.f0[:n][both], b.f0[:n][both]
    if fa.std() == 0 or fb.std() == 0:
        raise UndefinedMetricError("zero variance in a voiced contour")
    return float(np.corrcoef(fa, fb)[0, 1])


def load_wav(path, target_rate: int | None = None) -> Waveform:
    """Read a mono WAV file (16-bit PCM or 32-bit float).

    If ``target_rate`` differs from the file rate, the signal is resampled:
    exact powers of two go through the anti-aliased 2x chain, anything else
    through polyphase rational resampling.
    """
    rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise ValueError("only mono WAV files are supported")
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        x = data.astype(np.float64)
    elif data.dtype == np.int32:
        x = data.astype(np.float64) / 2147483648.0
    else:
        raise ValueError(f"unsupported WAV sample format: {data.dtype}")

    if target_rate is not None and target_rate != rate:
        x = _resample(x, rate, target_rate)
        rate = target_rate
    return Waveform(samples=np.clip(x, -1.0, 1.0), sample_rate=rate)


def _resample(x: np.ndarray, rate: int, target: int) -> np.ndarray:
    while rate * 2 <= target and target % (rate * 2) == 0:
        x = upsample2x(x)
        rate *= 2
    while rate % 2 == 0 and rate // 2 >= target and rate % target == 0:
        x = downsample2x(x)
        rate //= 2
    if rate != target:
        g = math.gcd(rate, target)
        x = resample_poly(x, target // g, rate // g)
    return x


def save_wav(path, w: Waveform) -> None:
    """Write a mono 32-bit float WAV file."""
    wavfile.write(path, w.sample_rate, np.clip(w.samples, -1.0, 1.0).astype(np.float32))
