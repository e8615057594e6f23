"""Versioned binary model files plus a JSON mirror for inspection.

Float models:      magic TECG, variant tag, per-layer shape header,
                   row-major float64 parameters, CRC32.
Quantized models:  magic TECQ, variant tag, quantization parameters
                   (mode, scale, zero point, clip range), per-layer int8
                   blobs, CRC32.

Round trips are bit-exact; a trailing CRC32 guards against truncation
and corruption.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .nn import ACTIVATIONS, VARIANTS, DenseLayer, DenseModel
from .quant import QuantParams, QuantizedModel

MAGIC_FLOAT = b"TECG"
MAGIC_QUANT = b"TECQ"
FORMAT_VERSION = 1


class ChecksumError(ValueError):
    """Stored CRC32 does not match the file contents."""


def _pack_header(magic: bytes, variant: str) -> bytes:
    tag = variant.encode("ascii")
    return magic + struct.pack("<BB", FORMAT_VERSION, len(tag)) + tag


def _pack_shapes(model) -> bytes:
    out = struct.pack("<B", 2)
    for (fan_in, fan_out), act in zip(model.shapes, VARIANTS[model.variant]):
        out += struct.pack("<IIB", fan_in, fan_out, ACTIVATIONS.index(act))
    return out


class _Reader:
    def __init__(self, blob: bytes, path):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise ChecksumError(f"{self.path}: truncated file")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _open_checked(path, magic: bytes) -> _Reader:
    blob = Path(path).read_bytes()
    if len(blob) < 10:
        raise ChecksumError(f"{path}: truncated file")
    body, stored = blob[:-4], struct.unpack("<I", blob[-4:])[0]
    if zlib.crc32(body) != stored:
        raise ChecksumError(f"{path}: checksum mismatch")
    rd = _Reader(body, path)
    if rd.take(4) != magic:
        raise ChecksumError(f"{path}: bad magic, expected {magic!r}")
    version, taglen = rd.unpack("<BB")
    if version != FORMAT_VERSION:
        raise ChecksumError(f"{path}: unsupported format version {version}")
    rd.variant = rd.take(taglen).decode("ascii")
    return rd


def _read_layer_headers(rd: _Reader) -> list[tuple[int, int, str]]:
    (n_layers,) = rd.unpack("<B")
    if n_layers != 2:
        raise ChecksumError(f"{rd.path}: expected 2 layers, found {n_layers}")
    out = []
    for _ in range(n_layers):
        fan_in, fan_out, act_idx = rd.unpack("<IIB")
        out.append((fan_in, fan_out, ACTIVATIONS[act_idx]))
    return out


def save_model(model: DenseModel, path) -> None:
    body = _pack_header(MAGIC_FLOAT, model.variant) + _pack_shapes(model)
    for arr in model.parameters:
        body += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    Path(path).write_bytes(body + struct.pack("<I", zlib.crc32(body)))


def load_model(path) -> DenseModel:
    rd = _open_checked(path, MAGIC_FLOAT)
    layers = []
    headers = _read_layer_headers(rd)
    for fan_in, fan_out, act in headers:
        w = np.frombuffer(rd.take(8 * fan_in * fan_out), dtype="<f8").reshape(
            fan_in, fan_out
        )
        b = np.frombuffer(rd.take(8 * fan_out), dtype="<f8")
        layers.append(DenseLayer(w.copy(), b.copy(), act))
    return DenseModel(layers[0], layers[1], rd.variant)


def save_qmodel(qmodel: QuantizedModel, path) -> None:
    qp = qmodel.qparams
    body = _pack_header(MAGIC_QUANT, qmodel.variant)
    body += struct.pack(
        "<Bdidd",
        0 if qp.mode == "symmetric" else 1,
        qp.scale,
        qp.zero_point,
        qp.alpha,
        qp.beta,
    )
    body += _pack_shapes(qmodel)
    for arr in qmodel.parameters:
        body += np.ascontiguousarray(arr, dtype=np.int8).tobytes()
    Path(path).write_bytes(body + struct.pack("<I", zlib.crc32(body)))


def load_qmodel(path) -> QuantizedModel:
    rd = _open_checked(path, MAGIC_QUANT)
    mode_flag, scale, zero_point, alpha, beta = rd.unpack("<Bdidd")
    qp = QuantParams(
        scale=scale,
        zero_point=zero_point,
        alpha=alpha,
        beta=beta,
        mode="symmetric" if mode_flag == 0 else "asymmetric",
    )
    headers = _read_layer_headers(rd)
    blobs = []
    acts = []
    for fan_in, fan_out, act in headers:
        w = np.frombuffer(rd.take(fan_in * fan_out), dtype=np.int8).reshape(
            fan_in, fan_out
        )
        b = np.frombuffer(rd.take(fan_out), dtype=np.int8)
        blobs.append((w.copy(), b.copy()))
        acts.append(act)
    return QuantizedModel(
        w1=blobs[0][0], b1=blobs[0][1], w2=blobs[1][0], b2=blobs[1][1],
        qparams=qp, variant=rd.variant,
    )


def load_any(path) -> DenseModel | QuantizedModel:
    """Dispatch on magic bytes; the two formats share one extension-free API."""
    magic = Path(path).read_bytes()[:4]
    if magic == MAGIC_FLOAT:
        return load_model(path)
    if magic == MAGIC_QUANT:
        return load_qmodel(path)
    raise ChecksumError(f"{path}: not a model file (magic {magic!r})")


def model_to_json(model: DenseModel) -> dict:
    return {
        "format": "tinyecg-dense",
        "version": FORMAT_VERSION,
        "variant": model.variant,
        "layers": [
            {
                "fan_in": layer.fan_in,
                "fan_out": layer.fan_out,
                "activation": layer.activation,
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
            }
            for layer in (model.layer1, model.layer2)
        ],
    }


def qmodel_to_json(qmodel: QuantizedModel) -> dict:
    qp = qmodel.qparams
    return {
        "format": "tinyecg-int8",
        "version": FORMAT_VERSION,
        "variant": qmodel.variant,
        "mode": qp.mode,
        "scale": qp.scale,
        "zero_point": qp.zero_point,
        "alpha": qp.alpha,
        "beta": qp.beta,
        "layers": [
            {"weights": w.tolist(), "bias": b.tolist()}
            for w, b in ((qmodel.w1, qmodel.b1), (qmodel.w2, qmodel.b2))
        ],
    }


def save_json_mirror(model_or_qmodel, path) -> None:
    to_json = (
        qmodel_to_json if isinstance(model_or_qmodel, QuantizedModel) else model_to_json
    )
    Path(path).write_text(json.dumps(to_json(model_or_qmodel), indent=2) + "\n")
