"""Sigmoid MLP: forward pass, NMSE + L1 loss, and the full backward chain.

Layout convention (see :mod:`sparsestart.matrix`): weights are
``(out_dim, in_dim)``, biases ``(out_dim, 1)``, activations carry samples
in columns, so layer ``l`` computes ``out_l = W_l @ y_{l-1} + b_l`` and
``y_l = sigmoid(out_l)``.

The loss is NMSE -- mean squared prediction error divided by the unbiased
variance of the targets -- plus an optional L1 penalty on the weight
matrices (biases are never regularized). Both the mean and the variance
are taken over *all* scalar elements of the target, across output units
and batch columns alike, so the scalar case and the batch case are one
formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matrix import Matrix, ShapeMismatchError


class DegenerateTargetError(ValueError):
    """NMSE is undefined: the target has no variance (or fewer than 2 elements)."""


@dataclass
class LayerParams:
    """One layer's parameters: weights ``(out_dim, in_dim)``, bias ``(out_dim, 1)``."""

    weights: Matrix
    bias: Matrix

    def __post_init__(self) -> None:
        if self.bias.shape != (self.weights.shape[0], 1):
            raise ShapeMismatchError(
                f"bias shape {self.bias.shape} does not match weights {self.weights.shape}"
            )

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class MlpNetwork:
    """An ordered stack of sigmoid layers plus the L1 coefficient."""

    layers: list[LayerParams]
    l1_lambda: float = 0.0

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("network needs at least one layer")
        if self.l1_lambda < 0:
            raise ValueError("l1_lambda must be non-negative")
        for i, (a, b) in enumerate(zip(self.layers, self.layers[1:])):
            if b.in_dim != a.out_dim:
                raise ShapeMismatchError(
                    f"layer {i + 1} expects {b.in_dim} inputs but layer {i} emits {a.out_dim}"
                )

    @property
    def dims(self) -> list[int]:
        return [self.layers[0].in_dim] + [l.out_dim for l in self.layers]

    def copy(self) -> "MlpNetwork":
        return MlpNetwork(
            [LayerParams(l.weights.copy(), l.bias.copy()) for l in self.layers],
            self.l1_lambda,
        )


@dataclass
class ForwardTrace:
    """Everything the backward pass needs: inputs, pre-activations, activations."""

    inputs: Matrix
    pre_activations: list[Matrix] = field(default_factory=list)
    activations: list[Matrix] = field(default_factory=list)

    @property
    def output(self) -> Matrix:
        return self.activations[-1]


@dataclass
class Gradients:
    """Per-layer loss gradients, shape-congruent with the network."""

    weight_grads: list[Matrix]
    bias_grads: list[Matrix]


def sigmoid(s: Matrix) -> Matrix:
    """Numerically stable logistic function 1 / (1 + exp(-s))."""
    out = np.empty_like(s, dtype=np.float64)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    es = np.exp(s[~pos])
    out[~pos] = es / (1.0 + es)
    return out


def sigmoid_prime(s: Matrix) -> Matrix:
    """Derivative sigmoid(s) * (1 - sigmoid(s)); peaks at 0.25 when s = 0."""
    y = sigmoid(s)
    return y * (1.0 - y)


def init_network(
    layer_dims: list[int],
    l1_lambda: float = 0.0,
    rng: np.random.Generator | None = None,
    weight_init: str = "glorot_uniform",
    init_scale: float = 1.0,
) -> MlpNetwork:
    """Create a network with random weights and zero biases.

    ``glorot_uniform`` draws from U(-r, r) with r = sqrt(6 / (fan_in +
    fan_out)), scaled by ``init_scale``; ``normal`` draws from
    N(0, init_scale^2); ``uniform`` draws from U(0, init_scale), the
    all-positive draw that leaves wide layers deeply saturated at first
    (useful when reproducing runs that start from such an init). Zero
    biases in all cases.
    """
    if len(layer_dims) < 2:
        raise ValueError("need at least an input and an output dimension")
    if any(d < 1 for d in layer_dims):
        raise ValueError(f"layer dims must be positive, got {layer_dims}")
    rng = rng if rng is not None else np.random.default_rng()
    layers = []
    for fan_in, fan_out in zip(layer_dims, layer_dims[1:]):
        if weight_init == "glorot_uniform":
            r = math.sqrt(6.0 / (fan_in + fan_out)) * init_scale
            w = rng.uniform(-r, r, size=(fan_out, fan_in))
        elif weight_init == "normal":
            w = rng.normal(0.0, init_scale, size=(fan_out, fan_in))
        elif weight_init == "uniform":
            w = rng.uniform(0.0, init_scale, size=(fan_out, fan_in))
        else:
            raise ValueError(f"unknown weight_init {weight_init!r}")
        layers.append(LayerParams(w, np.zeros((fan_out, 1))))
    return MlpNetwork(layers, l1_lambda)


def forward(net: MlpNetwork, x: Matrix) -> ForwardTrace:
    """Run the full forward pass, recording every out_l and y_l."""
    if x.shape[0] != net.layers[0].in_dim:
        raise ShapeMismatchError(
            f"input has {x.shape[0]} features but layer 0 expects {net.layers[0].in_dim}"
        )
    trace = ForwardTrace(inputs=x)
    y = x
    for i, layer in enumerate(net.layers):
        if y.shape[0] != layer.in_dim:
            raise ShapeMismatchError(f"layer {i}: got {y.shape[0]} inputs, expects {layer.in_dim}")
        out = layer.weights @ y + layer.bias
        y = sigmoid(out)
        trace.pre_activations.append(out)
        trace.activations.append(y)
    return trace


def _target_variance(y_true: Matrix) -> float:
    n = y_true.size
    if n < 2:
        raise DegenerateTargetError("NMSE needs at least 2 target elements")
    mu = y_true.mean()
    denom = float(((y_true - mu) ** 2).sum()) / (n - 1)
    if denom == 0.0:
        raise DegenerateTargetError("NMSE undefined for a constant target")
    return denom


def nmse(y_pred: Matrix, y_true: Matrix) -> float:
    """Mean squared error normalized by the unbiased variance of the target."""
    if y_pred.shape != y_true.shape:
        raise ShapeMismatchError(f"nmse: prediction {y_pred.shape} vs target {y_true.shape}")
    num = float(((y_pred - y_true) ** 2).mean())
    return num / _target_variance(y_true)


def l1_penalty(net: MlpNetwork) -> float:
    """lambda times the sum of |w| over every weight matrix; biases excluded."""
    if net.l1_lambda == 0.0:
        return 0.0
    return net.l1_lambda * sum(float(np.abs(l.weights).sum()) for l in net.layers)


def total_loss(net: MlpNetwork, y_pred: Matrix, y_true: Matrix) -> float:
    return nmse(y_pred, y_true) + l1_penalty(net)


def backward(net: MlpNetwork, trace: ForwardTrace, y_true: Matrix) -> Gradients:
    """Backpropagate NMSE + L1 through the trace.

    delta_L = dNMSE/dy_p * sigma'(out_L) with the element-wise
    dNMSE/dy_p = (2/n)(y_p - y_t) / var(y_t); then for each layer
    delta_{l-1} = (W_l^T delta_l) * sigma'(out_{l-1}),
    dW_l = delta_l @ y_{l-1}^T + lambda * sign(W_l), and db_l sums
    delta_l over the batch. sign(0) is taken as 0.
    """
    n_layers = len(net.layers)
    if len(trace.pre_activations) != n_layers or len(trace.activations) != n_layers:
        raise ValueError("trace does not match the network depth")
    y_pred = trace.output
    if y_pred.shape != y_true.shape:
        raise ShapeMismatchError(f"backward: prediction {y_pred.shape} vs target {y_true.shape}")

    n = y_true.size
    dloss_dy = (2.0 / n) * (y_pred - y_true) / _target_variance(y_true)

    weight_grads: list[Matrix] = [None] * n_layers  # type: ignore[list-item]
    bias_grads: list[Matrix] = [None] * n_layers  # type: ignore[list-item]
    # sigma'(out_l) computed from the stored activation y_l = sigmoid(out_l)
    act = trace.activations
    delta = dloss_dy * act[-1] * (1.0 - act[-1])
    for l in range(n_layers - 1, -1, -1):
        prev = act[l - 1] if l > 0 else trace.inputs
        wg = delta @ prev.T
        if net.l1_lambda != 0.0:
            wg = wg + net.l1_lambda * np.sign(net.layers[l].weights)
        weight_grads[l] = wg
        bias_grads[l] = delta.sum(axis=1, keepdims=True)
        if l > 0:
            delta = (net.layers[l].weights.T @ delta) * act[l - 1] * (1.0 - act[l - 1])
    return Gradients(weight_grads, bias_grads)


def accuracy(y_pred: Matrix, labels) -> float:
    """Fraction of columns whose argmax row equals the label.

    Ties break to the lowest row index (numpy argmax convention).
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != y_pred.shape[1]:
        raise ShapeMismatchError(f"accuracy: {y_pred.shape[1]} columns vs {labels.shape} labels")
    if labels.size and (labels.min() < 0 or labels.max() >= y_pred.shape[0]):
        raise ValueError(f"label out of range for {y_pred.shape[0]} classes")
    return float((np.argmax(y_pred, axis=0) == labels).mean())


def gradient_check(
    net: MlpNetwork, x: Matrix, y_true: Matrix, step: float = 1e-5
) -> np.ndarray:
    """Relative error of every analytic gradient coordinate vs central differences.

    Perturbs each parameter by +-step, re-evaluates nmse + l1_penalty, and
    compares the centered difference to the backward() coordinate using
    |a - n| / max(|a|, |n|, 1e-6). Returns the flat array of errors (weights
    then bias, layer by layer). The network is restored on exit.
    """
    analytic = backward(net, forward(net, x), y_true)

    def loss() -> float:
        return nmse(forward(net, x).output, y_true) + l1_penalty(net)

    errors = []
    for layer, wg, bg in zip(net.layers, analytic.weight_grads, analytic.bias_grads):
        for arr, grad in ((layer.weights, wg), (layer.bias, bg)):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + step
                hi = loss()
                flat[idx] = orig - step
                lo = loss()
                flat[idx] = orig
                numeric = (hi - lo) / (2.0 * step)
                a = gflat[idx]
                errors.append(abs(a - numeric) / max(abs(a), abs(numeric), 1e-6))
    return np.array(errors)
