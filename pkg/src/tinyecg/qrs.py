"""Streaming R-peak detection over a bounded 150-sample buffer.

Classic Pan-Tompkins adaptive thresholding: running signal and noise
levels, threshold = noise + 0.25 * (signal - noise), and a 200 ms
refractory period. Levels initialize from the first two seconds of the
stream (max -> signal level, mean -> noise level), so recordings are
expected to contain beats from the start. The long search-back pass of
the full algorithm is omitted: the 150-sample buffer cannot hold enough
history to support it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .dsp import FilterSpec, StreamingPreprocessor
from .ingest import WINDOW_HALF, WINDOW_LEN

BUFFER_CAPACITY = 150
REFRACTORY_S = 0.200
WARMUP_S = 2.0
LEVEL_GAIN = 0.125  # classic level update: l <- 0.125 p + 0.875 l
THRESHOLD_FRACTION = 0.25


class WindowLostError(RuntimeError):
    """The requested window scrolled out of the bounded buffer."""


class StreamBuffer:
    """Ring of the newest preprocessed samples, addressed by absolute index."""

    def __init__(self, capacity: int = BUFFER_CAPACITY):
        self.capacity = capacity
        self._ring: deque[float] = deque(maxlen=capacity)
        self.head = -1  # absolute index of the newest stored sample

    def push(self, value: float) -> None:
        self._ring.append(float(value))
        self.head += 1

    def __len__(self) -> int:
        return len(self._ring)

    @property
    def tail(self) -> int:
        """Absolute index of the oldest stored sample."""
        return self.head - len(self._ring) + 1

    def window(self, start: int, end: int) -> np.ndarray:
        """Samples for absolute indices [start, end] inclusive."""
        if start < self.tail:
            raise WindowLostError(
                f"window start {start} older than buffer tail {self.tail}"
            )
        if end > self.head:
            raise IndexError(f"window end {end} beyond head {self.head}")
        lo = start - self.tail
        return np.array(list(self._ring)[lo : lo + (end - start + 1)])


def emit_window(buffer: StreamBuffer, r_index: int) -> np.ndarray | None:
    """61-sample window centered on a detected peak, or None if not yet buffered.

    Raises WindowLostError when the peak has already scrolled past the
    buffer capacity (the beat is lost).
    """
    if r_index - WINDOW_HALF < buffer.tail:
        raise WindowLostError(
            f"beat at {r_index} lost: window starts before buffer tail {buffer.tail}"
        )
    if r_index + WINDOW_HALF > buffer.head:
        return None
    out = buffer.window(r_index - WINDOW_HALF, r_index + WINDOW_HALF)
    assert out.size == WINDOW_LEN
    return out


@dataclass
class DetectorState:
    signal_level: float = 0.0
    noise_level: float = 0.0
    last_peak_index: int | None = None

    @property
    def threshold(self) -> float:
        return self.noise_level + THRESHOLD_FRACTION * (
            self.signal_level - self.noise_level
        )


class RPeakDetector:
    """One instance per stream; feed raw samples, get absolute peak indices.

    Detection happens one sample after a local maximum of the integrated
    signal (the fall confirms the peak). Peaks above threshold outside
    the refractory period are beats; sub-threshold peaks update the noise
    level; anything inside the refractory period is ignored outright.
    """

    def __init__(
        self,
        spec: FilterSpec,
        buffer_capacity: int = BUFFER_CAPACITY,
        refractory_s: float = REFRACTORY_S,
        warmup_s: float = WARMUP_S,
    ):
        self.spec = spec
        self.preprocessor = StreamingPreprocessor(spec)
        self.buffer = StreamBuffer(buffer_capacity)
        self.state = DetectorState()
        self.refractory_samples = int(round(refractory_s * spec.sampling_rate_hz))
        self.warmup_samples = int(round(warmup_s * spec.sampling_rate_hz))
        self._warmup: list[float] = []
        self._prev = 0.0
        self._prev_index = -1
        self._rising = False

    def push_sample(self, raw: float) -> int | None:
        """Advance one raw sample; returns the peak's absolute index on detection."""
        y = self.preprocessor.push(raw)
        self.buffer.push(y)
        n = self.buffer.head

        if n < self.warmup_samples:
            self._warmup.append(y)
            if n == self.warmup_samples - 1:
                self.state.signal_level = float(np.max(self._warmup))
                self.state.noise_level = float(np.mean(self._warmup))
                self._warmup = []
                self._prev = y
                self._prev_index = n
                self._rising = False
            return None

        detected = None
        if y > self._prev:
            self._rising = True
        elif y == self._prev:
            self._prev_index = n  # plateau: keep tracking its newest sample
            return None
        else:
            if self._rising:
                detected = self._on_peak(self._prev, self._prev_index)
            self._rising = False
        self._prev = y
        self._prev_index = n
        return detected

    def _on_peak(self, peak: float, index: int) -> int | None:
        state = self.state
        in_refractory = (
            state.last_peak_index is not None
            and index - state.last_peak_index < self.refractory_samples
        )
        if in_refractory:
            return None
        if peak > state.threshold:
            state.signal_level = LEVEL_GAIN * peak + (1 - LEVEL_GAIN) * state.signal_level
            state.last_peak_index = index
            return index
        state.noise_level = LEVEL_GAIN * peak + (1 - LEVEL_GAIN) * state.noise_level
        return None
