"""Int8 quantization, temporary-dequantization inference, cost accounting.

One global scale/zero-point pair covers all 664 parameters. Symmetric
mode clips to [-max|p|, +max|p|] so real zero lands exactly on integer
code 0; asymmetric mode uses the raw [min, max] range.

`forward_temporary_dequantized` mirrors the deployed kernel: parameters
stay int8 and each one is scaled back to a real value only at its moment
of use, so the working set grows by a few bytes instead of 4x.
`forward_quantized_only` instead feeds the raw integer codes straight
into the matmul, the cheapest (and least accurate) deployment mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import _ACT_FN, VARIANTS, DenseLayer, DenseModel

INT8_MIN = -127
INT8_MAX = 127

SRAM_BUDGET_BYTES = 2048
BUFFER_SAMPLES = 150
BYTES_PER_SAMPLE = 4
# The deployed accounting books 3 extra bytes for the one temporarily
# dequantized value; a 32-bit real actually occupies 4.
TEMP_DEQUANT_BYTES_REPORTED = 3
TEMP_DEQUANT_BYTES_ACTUAL = 4


class DegenerateRangeError(ValueError):
    """All parameters are zero; no finite scale exists."""


@dataclass(frozen=True)
class QuantParams:
    """Global affine mapping x = scale * (x_q + zero_point)."""

    scale: float
    zero_point: int
    alpha: float
    beta: float
    mode: str  # "symmetric" | "asymmetric"

    def __post_init__(self):
        if self.mode not in ("symmetric", "asymmetric"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")


@dataclass
class QuantizedModel:
    """Int8 mirror of a DenseModel plus the shared quantization parameters."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    qparams: QuantParams
    variant: str

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=np.int8)
            if arr.size and arr.min() < INT8_MIN:
                raise ValueError(f"{name} holds a code below {INT8_MIN}")
            setattr(self, name, arr)
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def parameters(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return [self.w1.shape, self.w2.shape]

    @property
    def param_count(self) -> int:
        return sum(p.size for p in self.parameters)


def compute_qparams(model: DenseModel, mode: str = "symmetric") -> QuantParams:
    """Derive the single global scale/zero-point from a trained model."""
    flat = np.concatenate([p.ravel() for p in model.parameters])
    if mode == "symmetric":
        beta = float(np.max(np.abs(flat)))
        if beta == 0.0:
            raise DegenerateRangeError("all parameters are zero")
        alpha = -beta
    elif mode == "asymmetric":
        alpha, beta = float(np.min(flat)), float(np.max(flat))
        if beta == alpha:
            raise DegenerateRangeError("parameter range is a single point")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    scale = (beta - alpha) / (INT8_MAX - INT8_MIN)
    # Align alpha with code INT8_MIN under x = s*(x_q + z); symmetric
    # ranges make this exactly zero so real 0.0 maps to code 0.
    zero_point = int(round(alpha / scale)) - INT8_MIN
    return QuantParams(scale, zero_point, alpha, beta, mode)


def _round_half_away(v: np.ndarray) -> np.ndarray:
    return np.copysign(np.floor(np.abs(v) + 0.5), v)


def quantize(x, q: QuantParams):
    """Real -> int8 code: clamp(round(x / s) - z). Scalar in, scalar out."""
    v = _round_half_away(np.asarray(x, dtype=np.float64) / q.scale) - q.zero_point
    out = np.clip(v, INT8_MIN, INT8_MAX).astype(np.int8)
    return out if out.ndim else int(out)


def dequantize(x_q, q: QuantParams):
    """Int8 code -> real: s * (x_q + z)."""
    out = q.scale * (np.asarray(x_q, dtype=np.float64) + q.zero_point)
    return out if out.ndim else float(out)


def quantize_model(model: DenseModel, mode: str = "symmetric") -> QuantizedModel:
    q = compute_qparams(model, mode)
    w1, b1, w2, b2 = (quantize(p, q) for p in model.parameters)
    return QuantizedModel(w1, b1, w2, b2, q, model.variant)


def dequantize_model(qmodel: QuantizedModel) -> DenseModel:
    """Materialize the whole model back to reals (the non-temporary route)."""
    acts = VARIANTS[qmodel.variant]
    q = qmodel.qparams
    return DenseModel(
        DenseLayer(dequantize(qmodel.w1, q), dequantize(qmodel.b1, q), acts[0]),
        DenseLayer(dequantize(qmodel.w2, q), dequantize(qmodel.b2, q), acts[1]),
        qmodel.variant,
    )


def _temporary_layer(x, w_q, b_q, activation, q: QuantParams):
    """Matmul + bias with per-use dequantization, one parameter at a time."""
    fan_in, fan_out = w_q.shape
    s, z = q.scale, q.zero_point
    result = np.zeros(fan_out)
    for j in range(fan_out):
        acc = 0.0
        for k in range(fan_in):
            acc += x[k] * (s * (float(w_q[k, j]) + z))  # dequantized here, then dropped
        result[j] = acc + s * (float(b_q[j]) + z)
    return _ACT_FN[activation](result)


def forward_temporary_dequantized(qmodel: QuantizedModel, beat) -> np.ndarray:
    """Inference with int8-resident parameters dequantized at point of use."""
    x = np.asarray(beat, dtype=np.float64)
    if x.shape != (qmodel.w1.shape[0],):
        raise ValueError(f"expected beat of shape ({qmodel.w1.shape[0]},), got {x.shape}")
    acts = VARIANTS[qmodel.variant]
    hidden = _temporary_layer(x, qmodel.w1, qmodel.b1, acts[0], qmodel.qparams)
    return _temporary_layer(hidden, qmodel.w2, qmodel.b2, acts[1], qmodel.qparams)


def forward_quantized_only(qmodel: QuantizedModel, beat) -> np.ndarray:
    """Inference reading the integer codes as real weights, with no rescaling."""
    x = np.asarray(beat, dtype=np.float64)
    if x.shape != (qmodel.w1.shape[0],):
        raise ValueError(f"expected beat of shape ({qmodel.w1.shape[0]},), got {x.shape}")
    acts = VARIANTS[qmodel.variant]
    hidden = _ACT_FN[acts[0]](x @ qmodel.w1.astype(np.float64) + qmodel.b1.astype(np.float64))
    return _ACT_FN[acts[1]](hidden @ qmodel.w2.astype(np.float64) + qmodel.b2.astype(np.float64))


def predict_labels_quantized(
    qmodel: QuantizedModel, windows, temporary: bool = True
) -> np.ndarray:
    """Predicted class codes for an array of windows, one forward each."""
    forward = forward_temporary_dequantized if temporary else forward_quantized_only
    return np.array(
        [int(np.argmax(forward(qmodel, w))) for w in np.asarray(windows, dtype=np.float64)],
        dtype=np.int64,
    )


@dataclass(frozen=True)
class FlopsReport:
    """Per-layer floating point operations: 2*fan_in*fan_out + fan_out."""

    layers: tuple[tuple[int, int, int], ...]  # (fan_in, fan_out, flops)
    total: int


def flops_report(shapes) -> FlopsReport:
    layers = tuple(
        (fan_in, fan_out, 2 * fan_in * fan_out + fan_out) for fan_in, fan_out in shapes
    )
    return FlopsReport(layers, sum(f for _, _, f in layers))


@dataclass(frozen=True)
class MemoryReport:
    """SRAM accounting against the 2048-byte target budget."""

    layer_param_counts: tuple[int, ...]
    model_param_bytes: int  # one byte per int8 parameter
    temp_dequant_bytes: int
    temp_dequant_bytes_actual: int
    model_bytes: int
    buffer_bytes: int
    total_bytes: int
    budget_bytes: int
    over_budget: bool


def memory_report_from_shapes(
    shapes,
    buffer_samples: int = BUFFER_SAMPLES,
    budget_bytes: int = SRAM_BUDGET_BYTES,
) -> MemoryReport:
    layer_counts = tuple(fan_in * fan_out + fan_out for fan_in, fan_out in shapes)
    param_bytes = sum(layer_counts)
    model_bytes = param_bytes + TEMP_DEQUANT_BYTES_REPORTED
    buffer_bytes = buffer_samples * BYTES_PER_SAMPLE
    total = model_bytes + buffer_bytes
    return MemoryReport(
        layer_param_counts=layer_counts,
        model_param_bytes=param_bytes,
        temp_dequant_bytes=TEMP_DEQUANT_BYTES_REPORTED,
        temp_dequant_bytes_actual=TEMP_DEQUANT_BYTES_ACTUAL,
        model_bytes=model_bytes,
        buffer_bytes=buffer_bytes,
        total_bytes=total,
        budget_bytes=budget_bytes,
        over_budget=total > budget_bytes,
    )


def memory_report(qmodel: QuantizedModel, **kwargs) -> MemoryReport:
    return memory_report_from_shapes(qmodel.shapes, **kwargs)


def format_cost_report(flops: FlopsReport, memory: MemoryReport) -> str:
    """Fixed-width table pairing per-layer FLOPs with parameter bytes."""
    lines = [f"{'layer':<8}{'flops':>8}{'param bytes':>14}"]
    for i, ((_, _, fl), count) in enumerate(zip(flops.layers, memory.layer_param_counts), 1):
        lines.append(f"{i:<8}{fl:>8}{count:>14}")
    lines.append(f"{'total':<8}{flops.total:>8}{memory.model_param_bytes:>14}")
    lines.append("")
    lines.append(f"{'component':<26}{'bytes':>8}")
    lines.append(
        f"{'model (params + temp)':<26}{memory.model_bytes:>8}"
        f"   ({memory.model_param_bytes} + {memory.temp_dequant_bytes})"
    )
    lines.append(
        f"{'sample buffer':<26}{memory.buffer_bytes:>8}"
        f"   ({memory.buffer_bytes // BYTES_PER_SAMPLE} x {BYTES_PER_SAMPLE})"
    )
    lines.append(f"{'total':<26}{memory.total_bytes:>8}")
    status = "OVER BUDGET" if memory.over_budget else "ok"
    lines.append(f"{'budget':<26}{memory.budget_bytes:>8}   ({status})")
    return "\n".join(lines)
