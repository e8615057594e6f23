"""Pan-Tompkins preprocessing chain: bandpass -> derivative -> square -> MWI.

The same chain runs in two shapes: vectorized over a whole recording
(training data preparation) and one sample at a time (live detection).
Every stage is causal and length-preserving, so an R-peak index in the
raw signal addresses the same position in the preprocessed stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as _sps

MWI_WINDOW = 15


@dataclass(frozen=True)
class FilterSpec:
    """QRS-band bandpass configuration (5-15 Hz passband by default)."""

    sampling_rate_hz: float
    low_cut_hz: float = 5.0
    high_cut_hz: float = 15.0

    def __post_init__(self) -> None:
        if not 0 < self.low_cut_hz < self.high_cut_hz < self.sampling_rate_hz / 2:
            raise ValueError(
                f"need 0 < low ({self.low_cut_hz}) < high ({self.high_cut_hz}) "
                f"< Nyquist ({self.sampling_rate_hz / 2})"
            )


def bandpass_coefficients(spec: FilterSpec) -> tuple[np.ndarray, np.ndarray]:
    """Second-order Butterworth bandpass (biquad) via the bilinear transform."""
    return _sps.butter(
        1,
        [spec.low_cut_hz, spec.high_cut_hz],
        btype="bandpass",
        fs=spec.sampling_rate_hz,
    )


def bandpass(samples, spec: FilterSpec) -> np.ndarray:
    """Causal single-pass bandpass; rejects DC and powerline-range noise."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("bandpass needs a non-empty sequence")
    b, a = bandpass_coefficients(spec)
    return _sps.lfilter(b, a, x)


def derivative(samples) -> np.ndarray:
    """Five-point slope estimate y[n] = (2x[n] + x[n-1] - x[n-3] - 2x[n-4]) / 8.

    The first four outputs clamp out-of-range taps to the first sample,
    which keeps the output length equal to the input length.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 5:
        raise ValueError(f"derivative needs at least 5 samples, got {x.size}")
    pad = np.concatenate([np.full(4, x[0]), x])
    return (2.0 * pad[4:] + pad[3:-1] - pad[1:-3] - 2.0 * pad[:-4]) / 8.0


def square(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    return x * x


def moving_window_integration(samples, window: int = MWI_WINDOW) -> np.ndarray:
    """Trailing mean over `window` samples; shorter growing windows at the start."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    # Trailing sums via convolution: zero-padding before t=0 contributes nothing,
    # so dividing by the actual tap count gives the growing-prefix means.
    sums = np.convolve(x, np.ones(window))[: x.size]
    counts = np.minimum(np.arange(1, x.size + 1), window)
    return sums / counts


def preprocess(samples, spec: FilterSpec, window: int = MWI_WINDOW) -> np.ndarray:
    """Full chain on a whole recording. Output is non-negative, same length."""
    return moving_window_integration(
        square(derivative(bandpass(samples, spec))), window
    )


class StreamingPreprocessor:
    """Sample-by-sample version of `preprocess` for live use.

    Feeding a recording one sample at a time produces the same values as
    the batch chain (up to float summation order in the trailing mean).
    Holds only the biquad state, four derivative taps and the MWI window.
    """

    def __init__(self, spec: FilterSpec, window: int = MWI_WINDOW):
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.spec = spec
        b, a = bandpass_coefficients(spec)
        self._b = np.asarray(b, dtype=np.float64)
        self._a = np.asarray(a, dtype=np.float64)
        self._z = np.zeros(len(self._b) - 1)
        self._taps: list[float] | None = None  # last 4 bandpassed samples, newest first
        self._mwi: list[float] = []
        self._window = window

    def push(self, raw: float) -> float:
        """Advance the chain by one raw sample; returns the integrated value."""
        x = float(raw)
        # Direct form II transposed, matching scipy.signal.lfilter.
        b, a, z = self._b, self._a, self._z
        y = b[0] * x + z[0]
        for i in range(len(z) - 1):
            z[i] = b[i + 1] * x + z[i + 1] - a[i + 1] * y
        z[-1] = b[-1] * x - a[-1] * y

        if self._taps is None:
            self._taps = [y, y, y, y]
        t = self._taps
        d = (2.0 * y + t[0] - t[2] - 2.0 * t[3]) / 8.0
        t.insert(0, y)
        t.pop()

        self._mwi.append(d * d)
        if len(self._mwi) > self._window:
            self._mwi.pop(0)
        return sum(self._mwi) / len(self._mwi)
