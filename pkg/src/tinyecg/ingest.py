"""Load exported ECG recordings, window labeled beats, split train/test.

Input files are plain-text CSV exports of PhysioNet records:

    signal file      one `index,voltage` line per sample
    annotation file  one `index,symbol` line per annotated beat

Lines starting with `#` are comments; LF and CRLF both accepted.
Beats are 61-sample windows of the preprocessed signal centered on the
annotated R-peak index ([index-30, index+30] inclusive).
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsp import FilterSpec, preprocess
from .labels import CLASSES, LABEL_INDEX, OTHER, aami_class

WINDOW_HALF = 30
WINDOW_LEN = 2 * WINDOW_HALF + 1


class ParseError(ValueError):
    """Malformed input file; message carries path and line number."""


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled single-lead voltage sequence."""

    samples: np.ndarray
    sampling_rate_hz: float

    def __post_init__(self):
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=np.float64)
        )
        if self.sampling_rate_hz <= 0:
            raise ValueError(f"sampling rate must be positive, got {self.sampling_rate_hz}")

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class Annotation:
    sample_index: int
    label: str  # N/S/V/F or OTHER


@dataclass(frozen=True)
class Beat:
    window: np.ndarray  # 61 preprocessed values
    label: str


@dataclass
class BeatSet:
    """Labeled beat windows stored as parallel arrays.

    `labels` holds integer codes into `tinyecg.labels.CLASSES`.
    `skipped` counts non-OTHER annotations whose window fell outside
    the recording.
    """

    windows: np.ndarray  # (n, 61) float64
    labels: np.ndarray  # (n,) int64
    skipped: int = 0

    def __post_init__(self):
        self.windows = np.asarray(self.windows, dtype=np.float64).reshape(-1, WINDOW_LEN)
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if self.windows.shape[0] != self.labels.shape[0]:
            raise ValueError("windows and labels disagree in length")

    def __len__(self) -> int:
        return self.labels.size

    @property
    def counts(self) -> dict[str, int]:
        return {c: int(np.sum(self.labels == i)) for i, c in enumerate(CLASSES)}

    @property
    def beats(self) -> list[Beat]:
        return [Beat(w, CLASSES[l]) for w, l in zip(self.windows, self.labels)]

    def save(self, path) -> None:
        np.savez_compressed(
            path, windows=self.windows, labels=self.labels, skipped=self.skipped
        )

    @classmethod
    def load(cls, path) -> "BeatSet":
        with np.load(path) as data:
            return cls(data["windows"], data["labels"], int(data["skipped"]))


def _rows(path) -> list[tuple[int, str, str]]:
    """Yield (line_number, first_field, second_field) skipping blanks/comments."""
    path = Path(path)
    out = []
    with open(path, "r", encoding="utf-8", newline=None) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected `a,b`, got {line!r}")
            out.append((lineno, parts[0].strip(), parts[1].strip()))
    return out


def load_signal(path, sampling_rate_hz: float) -> Signal:
    """Parse an `index,value` export. Indices must increase monotonically."""
    rows = _rows(path)
    if not rows:
        raise ParseError(f"{Path(path)}: no samples found")
    values = np.empty(len(rows))
    prev = -1
    for pos, (lineno, a, b) in enumerate(rows):
        try:
            idx = int(a)
            values[pos] = float(b)
        except ValueError as exc:
            raise ParseError(f"{Path(path)}:{lineno}: {exc}") from None
        if idx <= prev:
            raise ParseError(
                f"{Path(path)}:{lineno}: sample index {idx} not increasing (prev {prev})"
            )
        prev = idx
    return Signal(values, sampling_rate_hz)


def load_annotations(path) -> list[Annotation]:
    """Parse an `index,symbol` export, grouping symbols into AAMI classes.

    Symbols outside the four kept classes map to OTHER; callers drop
    those downstream (see `extract_beats`).
    """
    out = []
    for lineno, a, b in _rows(path):
        try:
            idx = int(a)
        except ValueError as exc:
            raise ParseError(f"{Path(path)}:{lineno}: {exc}") from None
        if idx < 0:
            raise ParseError(f"{Path(path)}:{lineno}: negative sample index {idx}")
        if not b:
            raise ParseError(f"{Path(path)}:{lineno}: empty annotation symbol")
        out.append(Annotation(idx, aami_class(b)))
    return out


def extract_beats(
    signal: Signal,
    annotations: list[Annotation],
    spec: FilterSpec | None = None,
) -> BeatSet:
    """Preprocess the whole recording once, then window each labeled beat.

    OTHER annotations are dropped silently; kept annotations whose
    61-sample window is not fully inside the recording are counted in
    `BeatSet.skipped`.
    """
    if spec is None:
        spec = FilterSpec(signal.sampling_rate_hz)
    stream = preprocess(signal.samples, spec)
    windows, labels = [], []
    skipped = 0
    for ann in annotations:
        if ann.label == OTHER:
            continue
        lo = ann.sample_index - WINDOW_HALF
        hi = ann.sample_index + WINDOW_HALF
        if lo < 0 or hi >= stream.size:
            skipped += 1
            continue
        windows.append(stream[lo : hi + 1])
        labels.append(LABEL_INDEX[ann.label])
    if windows:
        return BeatSet(np.stack(windows), np.array(labels), skipped)
    return BeatSet(np.empty((0, WINDOW_LEN)), np.empty(0, dtype=np.int64), skipped)


def merge(beat_sets: list[BeatSet]) -> BeatSet:
    """Concatenate per-record beat sets (records are preprocessed independently)."""
    if not beat_sets:
        return BeatSet(np.empty((0, WINDOW_LEN)), np.empty(0, dtype=np.int64), 0)
    return BeatSet(
        np.concatenate([b.windows for b in beat_sets]),
        np.concatenate([b.labels for b in beat_sets]),
        sum(b.skipped for b in beat_sets),
    )


def split(beats: BeatSet, train_fraction: float, seed: int = 0) -> tuple[BeatSet, BeatSet]:
    """Stratified random split, deterministic per seed.

    Per class, round(n * train_fraction) beats go to train (clamped so
    both sides stay non-empty when the class has at least two members);
    classes with fewer than two members go entirely to train.
    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for code, cls in enumerate(CLASSES):
        members = np.flatnonzero(beats.labels == code)
        n = members.size
        if n == 0:
            continue
        if n < 2:
            warnings.warn(f"class {cls} has {n} beat(s); placing all in train")
            train_idx.append(members)
            continue
        n_train = int(np.floor(n * train_fraction + 0.5))
        n_train = min(max(n_train, 1), n - 1)
        perm = rng.permutation(n)
        train_idx.append(members[perm[:n_train]])
        test_idx.append(members[perm[n_train:]])

    def take(groups) -> BeatSet:
        if not groups:
            return BeatSet(np.empty((0, WINDOW_LEN)), np.empty(0, dtype=np.int64), 0)
        idx = np.sort(np.concatenate(groups))
        return BeatSet(beats.windows[idx], beats.labels[idx], 0)

    return take(train_idx), take(test_idx)


def summarize(beats: BeatSet) -> str:
    """Per-class count table in the train-test layout used by reports."""
    counts = beats.counts
    header = "  ".join(f"{c:>6}" for c in CLASSES) + f"  {'Total':>7}"
    row = "  ".join(f"{counts[c]:>6}" for c in CLASSES) + f"  {len(beats):>7}"
    lines = [header, row]
    if beats.skipped:
        lines.append(f"(skipped {beats.skipped} out-of-bounds annotation(s))")
    return "\n".join(lines)


def annotation_summary(annotations: list[Annotation]) -> Counter:
    """Counts per mapped class, including OTHER."""
    return Counter(a.label for a in annotations)
