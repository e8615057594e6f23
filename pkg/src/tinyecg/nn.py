"""Dense two-layer network forward pass: the numeric core of the classifier.

The deployed topology is 61 -> 10 -> 4 with one activation per layer;
four activation pairings are supported. Shapes are not hard-coded so the
same code serves reduced test fixtures and the distilled 61 -> 4 -> 4
student. Outputs follow the fixed class order N, S, V, F.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .labels import CLASSES

SIGMOID = "sigmoid"
RELU = "relu"
SOFTMAX = "softmax"
ACTIVATIONS = (SIGMOID, RELU, SOFTMAX)

# variant tag -> (hidden activation, output activation)
VARIANTS = {
    "sigmoid-sigmoid": (SIGMOID, SIGMOID),
    "relu-sigmoid": (RELU, SIGMOID),
    "relu-softmax": (RELU, SOFTMAX),
    "sigmoid-softmax": (SIGMOID, SOFTMAX),
}

INPUT_LEN = 61
HIDDEN_LEN = 10
OUTPUT_LEN = 4


def sigmoid(z) -> np.ndarray:
    """Logistic function, evaluated branch-wise so large |z| cannot overflow."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def relu(z) -> np.ndarray:
    return np.maximum(0.0, np.asarray(z, dtype=np.float64))


def softmax(z) -> np.ndarray:
    """Exponential sum then normalize, with max subtraction for stability.

    The subtraction cancels in exact arithmetic, so outputs match the
    plain two-pass form wherever that form does not overflow.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise ValueError("softmax needs a non-empty vector")
    e = np.exp(z - np.max(z, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)


_ACT_FN = {SIGMOID: sigmoid, RELU: relu, SOFTMAX: softmax}


@dataclass
class DenseLayer:
    weights: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,)
    activation: str

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[1],):
            raise ValueError(
                f"inconsistent layer shapes {self.weights.shape} / {self.bias.shape}"
            )
        if self.activation not in _ACT_FN:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def fan_in(self) -> int:
        return self.weights.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[1]

    @property
    def param_count(self) -> int:
        return self.weights.size + self.bias.size


@dataclass
class DenseModel:
    layer1: DenseLayer
    layer2: DenseLayer
    variant: str

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(
                f"unknown variant {self.variant!r}; expected one of {sorted(VARIANTS)}"
            )
        if self.layer1.fan_out != self.layer2.fan_in:
            raise ValueError(
                f"layer widths disagree: {self.layer1.fan_out} vs {self.layer2.fan_in}"
            )

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return [(self.layer1.fan_in, self.layer1.fan_out),
                (self.layer2.fan_in, self.layer2.fan_out)]

    @property
    def param_count(self) -> int:
        return self.layer1.param_count + self.layer2.param_count

    @property
    def parameters(self) -> list[np.ndarray]:
        """Live views in fixed order: W1, b1, W2, b2."""
        return [self.layer1.weights, self.layer1.bias,
                self.layer2.weights, self.layer2.bias]


def glorot_init(
    shapes: list[tuple[int, int]],
    variant: str,
    rng: np.random.Generator,
) -> DenseModel:
    """Uniform(-sqrt(6/(fan_in+fan_out)), +...) weights, zero biases."""
    acts = VARIANTS[variant]
    layers = []
    for (fan_in, fan_out), act in zip(shapes, acts):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        layers.append(
            DenseLayer(
                rng.uniform(-limit, limit, size=(fan_in, fan_out)),
                np.zeros(fan_out),
                act,
            )
        )
    return DenseModel(layers[0], layers[1], variant)


def standard_model(variant: str, seed: int = 0) -> DenseModel:
    """Fresh 61 -> 10 -> 4 model (664 parameters)."""
    return glorot_init(
        [(INPUT_LEN, HIDDEN_LEN), (HIDDEN_LEN, OUTPUT_LEN)],
        variant,
        np.random.default_rng(seed),
    )


def layer_forward(x, layer: DenseLayer) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layer.fan_in,):
        raise ValueError(f"expected input of shape ({layer.fan_in},), got {x.shape}")
    return _ACT_FN[layer.activation](x @ layer.weights + layer.bias)


def model_forward(model: DenseModel, beat) -> np.ndarray:
    """Forward one beat window; returns one score per class in N,S,V,F order."""
    return layer_forward(layer_forward(beat, model.layer1), model.layer2)


def predict(model: DenseModel, beat) -> str:
    """Argmax class label; ties resolve to the lowest class index."""
    return CLASSES[int(np.argmax(model_forward(model, beat)))]


def predict_labels(model: DenseModel, windows) -> np.ndarray:
    """Predicted class codes for an array of beat windows, one forward each."""
    windows = np.asarray(windows, dtype=np.float64)
    return np.array(
        [int(np.argmax(model_forward(model, w))) for w in windows], dtype=np.int64
    )
