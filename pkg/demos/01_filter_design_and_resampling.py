"""Windowed-sinc filter design and anti-aliased 2x resampling.

Designs a Kaiser low-pass, inspects its measured response, then pushes a
near-Nyquist tone through the 2x up/down chain and measures how much
imaging energy leaks above the original band.

Run:  python3 demos/01_filter_design_and_resampling.py
"""

import numpy as np

from promptvoc.dsp import (
    design_lowpass,
    downsample2x,
    filter_response_db,
    halfband_filter,
    upsample2x,
)


def main():
    f = design_lowpass(cutoff_norm=0.5, transition_norm=0.1, atten_db=80.0)
    print(f"designed {len(f.taps)} taps, DC gain {f.taps.sum():.6f}")
    grid = np.linspace(0, 1, 512)
    resp = filter_response_db(f, grid)
    print(f"response at 0.4*Nyquist: {resp[np.searchsorted(grid, 0.4)]:6.2f} dB")
    print(f"worst response beyond 0.6*Nyquist: {resp[grid >= 0.6].max():6.2f} dB")

    hb = halfband_filter()
    print(f"\nresampler half-band: {len(hb.taps)} taps, "
          f"passband edge {hb.cutoff_norm}, {hb.atten_db:.0f} dB stopband")

    rate = 8000
    for rel in (0.5, 0.7, 0.9):
        tone = np.sin(2 * np.pi * rel * rate / 2 * np.arange(rate) / rate)
        up = upsample2x(tone)
        spec = np.abs(np.fft.rfft(up * np.hanning(len(up)))) ** 2
        freqs = np.fft.rfftfreq(len(up), 1.0 / (2 * rate))
        db = 10 * np.log10(spec[freqs > rate / 2].sum() / spec.sum())
        print(f"tone at {rel:.1f}*Nyquist: imaging energy after 2x upsample {db:6.1f} dB")

    tone = np.sin(2 * np.pi * 0.3 * rate / 2 * np.arange(4000) / rate)
    back = downsample2x(upsample2x(tone))
    err = np.abs(back[200:-200] - tone[200:-200]).max()
    print(f"\n2x round-trip max error for a 0.3*Nyquist tone: {err:.2e}")


if __name__ == "__main__":
    main()
