"""Training: MSE loss, analytic backprop, Adam, plus compression ablations.

Gradients are exact for all four activation pairings (the softmax path
uses the full Jacobian, not the cross-entropy shortcut). One epoch takes
one optimizer step on a freshly shuffled batch; set `full_pass=True` to
sweep the whole training set in batch-size chunks per epoch instead.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .ingest import BeatSet
from .metrics import confusion, scores
from .nn import (
    RELU,
    SIGMOID,
    VARIANTS,
    DenseLayer,
    DenseModel,
    glorot_init,
    sigmoid,
    softmax,
)

N_CLASSES = 4


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10_000
    learning_rate: float = 0.001
    batch_size: int = 1024
    seed: int = 0
    variant: str = "sigmoid-sigmoid"
    full_pass: bool = False  # one step per epoch (default) vs full sweep per epoch

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.variant not in VARIANTS:
            raise ValueError(
                f"unknown variant {self.variant!r}; expected one of {sorted(VARIANTS)}"
            )


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per parameter array."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


@dataclass
class TrainTrace:
    losses: np.ndarray
    train_accuracy: float = float("nan")
    test_accuracy: float = float("nan")
    train_macro_f1: float = float("nan")
    test_macro_f1: float = float("nan")

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "loss"])
            for epoch, loss in enumerate(self.losses):
                writer.writerow([epoch, repr(float(loss))])


def one_hot(labels: np.ndarray, n_classes: int = N_CLASSES) -> np.ndarray:
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def mse_loss(predicted, target) -> float:
    predicted = np.asarray(predicted, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if predicted.shape != target.shape:
        raise ValueError(f"shape mismatch {predicted.shape} vs {target.shape}")
    diff = predicted - target
    return float(np.mean(diff * diff))


def forward_batch(model: DenseModel, x: np.ndarray):
    """Batched forward returning intermediates needed for backprop."""
    act1, act2 = VARIANTS[model.variant]
    z1 = x @ model.layer1.weights + model.layer1.bias
    a1 = _apply(act1, z1)
    z2 = a1 @ model.layer2.weights + model.layer2.bias
    out = _apply(act2, z2)
    return z1, a1, z2, out


def _apply(activation: str, z: np.ndarray) -> np.ndarray:
    if activation == SIGMOID:
        return sigmoid(z)
    if activation == RELU:
        return np.maximum(0.0, z)
    return softmax(z)


def _activation_backward(activation: str, grad_out, z, out) -> np.ndarray:
    """dL/dz from dL/d(activation(z)), rows are batch samples."""
    if activation == SIGMOID:
        return grad_out * out * (1.0 - out)
    if activation == RELU:
        return grad_out * (z > 0)
    # softmax Jacobian: dz_i = s_i * (g_i - sum_j g_j s_j)
    dot = np.sum(grad_out * out, axis=-1, keepdims=True)
    return out * (grad_out - dot)


def _grads_from_dz2(model, x, a1, z1, dz2) -> list[np.ndarray]:
    act1, _ = VARIANTS[model.variant]
    g_w2 = a1.T @ dz2
    g_b2 = dz2.sum(axis=0)
    da1 = dz2 @ model.layer2.weights.T
    dz1 = _activation_backward(act1, da1, z1, a1)
    g_w1 = x.T @ dz1
    g_b1 = dz1.sum(axis=0)
    return [g_w1, g_b1, g_w2, g_b2]


def backward(model: DenseModel, x, target) -> list[np.ndarray]:
    """Exact gradient of mse_loss w.r.t. [W1, b1, W2, b2]."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    z1, a1, z2, out = forward_batch(model, x)
    _, act2 = VARIANTS[model.variant]
    grad_out = 2.0 * (out - target) / target.size
    dz2 = _activation_backward(act2, grad_out, z2, out)
    return _grads_from_dz2(model, x, a1, z1, dz2)


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float,
) -> tuple[list[np.ndarray], AdamState]:
    """In-place Adam update with bias correction; returns params and state."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    correct1 = 1.0 - b1**state.t
    correct2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / correct1) / (np.sqrt(v / correct2) + state.eps)
    return params, state


def _clone(model: DenseModel) -> DenseModel:
    a1, a2 = VARIANTS[model.variant]
    return DenseModel(
        DenseLayer(model.layer1.weights.copy(), model.layer1.bias.copy(), a1),
        DenseLayer(model.layer2.weights.copy(), model.layer2.bias.copy(), a2),
        model.variant,
    )


def _evaluate(model: DenseModel, beats: BeatSet) -> tuple[float, float]:
    _, _, _, out = forward_batch(model, beats.windows)
    report = scores(confusion(beats.labels, np.argmax(out, axis=1)))
    return report.accuracy, report.macro_f1


def fit(
    train: BeatSet,
    test: BeatSet | None,
    config: TrainConfig,
    init_model: DenseModel | None = None,
    freeze_mask: list[np.ndarray] | None = None,
    zero_biases: bool = False,
    grad_fn=None,
) -> tuple[DenseModel, TrainTrace]:
    """Shuffled mini-batch Adam loop, deterministic per seed.

    `init_model` resumes from existing parameters (its variant wins over
    `config.variant`); `freeze_mask` pins masked parameters at zero
    (pruning support); `zero_biases` trains the weights-only ablation;
    `grad_fn(model, x, y)` overrides the MSE gradient (distillation uses
    this hook).
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    missing = [c for c, n in train.counts.items() if n == 0]
    if missing:
        warnings.warn(f"training set has no beats for class(es): {', '.join(missing)}")

    rng = np.random.default_rng(config.seed)
    if init_model is None:
        shapes = [(train.windows.shape[1], 10), (10, N_CLASSES)]
        model = glorot_init(shapes, config.variant, rng)
    else:
        model = _clone(init_model)
    params = model.parameters

    masks = [np.zeros_like(p, dtype=bool) for p in params]
    if freeze_mask is not None:
        masks = [m | f for m, f in zip(masks, freeze_mask)]
    if zero_biases:
        masks[1] |= True
        masks[3] |= True
    for p, m in zip(params, masks):
        p[m] = 0.0

    targets = one_hot(train.labels)
    state = AdamState.for_params(params)
    grad_fn = grad_fn or (lambda mod, x, y: backward(mod, x, y))
    n = len(train)
    batch = min(config.batch_size, n)
    losses = np.empty(config.epochs)

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        if config.full_pass:
            epoch_losses = []
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                epoch_losses.append(
                    _step(model, params, masks, train, targets, idx, state, config, grad_fn)
                )
            losses[epoch] = float(np.mean(epoch_losses))
        else:
            idx = order[:batch]
            losses[epoch] = _step(
                model, params, masks, train, targets, idx, state, config, grad_fn
            )

    trace = TrainTrace(losses)
    trace.train_accuracy, trace.train_macro_f1 = _evaluate(model, train)
    if test is not None and len(test) > 0:
        trace.test_accuracy, trace.test_macro_f1 = _evaluate(model, test)
    return model, trace


def _step(model, params, masks, train, targets, idx, state, config, grad_fn) -> float:
    x, y = train.windows[idx], targets[idx]
    _, _, _, out = forward_batch(model, x)
    loss = mse_loss(out, y)
    grads = grad_fn(model, x, y)
    for g, m in zip(grads, masks):
        g[m] = 0.0
    adam_step(params, grads, state, config.learning_rate)
    for p, m in zip(params, masks):
        p[m] = 0.0
    return loss


def fit_weights_only(
    train: BeatSet, test: BeatSet | None, config: TrainConfig
) -> tuple[DenseModel, TrainTrace]:
    """Train with biases pinned at exactly zero throughout."""
    return fit(train, test, config, zero_biases=True)


def prune_mask(model: DenseModel) -> list[np.ndarray]:
    """True where |value| falls below its group's median absolute value.

    Groups are per layer and per parameter type (weights and biases
    separately), so a large bias cannot shield small weights.
    """
    return [np.abs(p) < np.percentile(np.abs(p), 50) for p in model.parameters]


def prune_and_retrain(
    model: DenseModel, train: BeatSet, config: TrainConfig
) -> DenseModel:
    """Zero the bottom half of each parameter group, then retrain at lr/100.

    Pruned positions stay exactly zero through retraining; pruning is not
    iterated.
    """
    mask = prune_mask(model)
    pruned = _clone(model)
    for p, m in zip(pruned.parameters, mask):
        p[m] = 0.0
    retrain_config = replace(config, learning_rate=config.learning_rate / 100.0)
    retrained, _ = fit(train, None, retrain_config, init_model=pruned, freeze_mask=mask)
    return retrained


def distill_backward(
    student: DenseModel, x, soft_targets, hard_targets, temperature: float
) -> list[np.ndarray]:
    """Exact gradient of the distillation objective for one batch."""
    z1, a1, z2, _ = forward_batch(student, x)
    p_soft = softmax(z2 / temperature)
    p_hard = softmax(z2)
    n = x.shape[0]
    dz2 = (
        0.9 * (p_soft - soft_targets) / (temperature * n)
        + 0.1 * (p_hard - hard_targets) / n
    )
    return _grads_from_dz2(student, x, a1, z1, dz2)


def distill(
    teacher: DenseModel, train: BeatSet, config: TrainConfig, temperature: float = 10.0
) -> DenseModel:
    """Train a 61 -> 4 -> 4 student against the teacher's softened outputs.

    Loss = 0.9 * KL(teacher softmax(z/T) || student softmax(z/T))
         + 0.1 * cross-entropy(hard one-hot targets, student softmax(z)).
    Softmax is applied to both logit sets regardless of variant.
    """
    soft_targets = softmax(_logits(teacher, train.windows) / temperature)
    hard_targets = one_hot(train.labels)
    rng = np.random.default_rng(config.seed)
    student = glorot_init(
        [(train.windows.shape[1], 4), (4, N_CLASSES)], teacher.variant, rng
    )
    params = student.parameters
    state = AdamState.for_params(params)
    n = len(train)
    batch = min(config.batch_size, n)
    for _ in range(config.epochs):
        idx = rng.permutation(n)[:batch]
        grads = distill_backward(
            student, train.windows[idx], soft_targets[idx], hard_targets[idx], temperature
        )
        adam_step(params, grads, state, config.learning_rate)
    return student


def distill_loss(
    teacher_logits, student_logits, hard_targets, temperature: float = 10.0
) -> float:
    """The distillation objective itself, exposed for verification."""
    q = softmax(np.asarray(teacher_logits) / temperature)
    p_soft = softmax(np.asarray(student_logits) / temperature)
    p_hard = softmax(np.asarray(student_logits))
    y = np.asarray(hard_targets, dtype=np.float64)
    kl = float(np.mean(np.sum(q * (np.log(q) - np.log(p_soft)), axis=-1)))
    ce = float(np.mean(-np.sum(y * np.log(p_hard), axis=-1)))
    return 0.9 * kl + 0.1 * ce


def _logits(model: DenseModel, windows: np.ndarray) -> np.ndarray:
    """Layer-2 pre-activations for a batch."""
    _, a1, z2, _ = forward_batch(model, windows)
    return z2
