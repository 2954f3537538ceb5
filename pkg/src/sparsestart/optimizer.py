"""Adam optimizer with bias correction and mask-respecting steps.

The optimizer is the one place parameters are mutated: ``adam_step``
updates layers and moments in place. ``masked_step`` additionally projects
each weight matrix onto its sparsity mask after the update, so pruned
weights stay exactly zero; their moment buffers are zeroed too so a pruned
weight never accumulates stale momentum. Biases are never masked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .masks import SparseMask
from .matrix import Matrix, ShapeMismatchError
from .network import Gradients, LayerParams


@dataclass
class AdamState:
    """First/second moment buffers per parameter plus the shared step count."""

    m_weights: list[Matrix]
    v_weights: list[Matrix]
    m_biases: list[Matrix]
    v_biases: list[Matrix]
    step_count: int = 0
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_layers(
        cls,
        layers: list[LayerParams],
        learning_rate: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> "AdamState":
        return cls(
            m_weights=[np.zeros_like(l.weights) for l in layers],
            v_weights=[np.zeros_like(l.weights) for l in layers],
            m_biases=[np.zeros_like(l.bias) for l in layers],
            v_biases=[np.zeros_like(l.bias) for l in layers],
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )


def _update(param: Matrix, grad: Matrix, m: Matrix, v: Matrix, state: AdamState) -> None:
    if grad.shape != param.shape:
        raise ShapeMismatchError(f"adam: gradient {grad.shape} vs parameter {param.shape}")
    m *= state.beta1
    m += (1.0 - state.beta1) * grad
    v *= state.beta2
    v += (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**state.step_count)
    v_hat = v / (1.0 - state.beta2**state.step_count)
    param -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)


def adam_step(layers: list[LayerParams], grads: Gradients, state: AdamState) -> None:
    """One Adam update, in place: m <- b1 m + (1-b1) g, v <- b2 v + (1-b2) g^2,
    bias-corrected m_hat/v_hat, then p <- p - lr * m_hat / (sqrt(v_hat) + eps)."""
    if len(grads.weight_grads) != len(layers):
        raise ShapeMismatchError(
            f"adam: {len(grads.weight_grads)} gradient layers vs {len(layers)} parameter layers"
        )
    state.step_count += 1
    for i, layer in enumerate(layers):
        _update(layer.weights, grads.weight_grads[i], state.m_weights[i], state.v_weights[i], state)
        _update(layer.bias, grads.bias_grads[i], state.m_biases[i], state.v_biases[i], state)


def masked_step(
    layers: list[LayerParams],
    grads: Gradients,
    state: AdamState,
    masks: list[SparseMask] | None,
) -> None:
    """adam_step followed by W <- W * mask per layer; masked moments are zeroed."""
    adam_step(layers, grads, state)
    if masks is None:
        return
    if len(masks) != len(layers):
        raise ShapeMismatchError(f"masked_step: {len(masks)} masks vs {len(layers)} layers")
    for i, (layer, mask) in enumerate(zip(layers, masks)):
        if mask.bits.shape != layer.weights.shape:
            raise ShapeMismatchError(
                f"masked_step: mask {mask.bits.shape} vs weights {layer.weights.shape}"
            )
        layer.weights *= mask.bits
        state.m_weights[i] *= mask.bits
        state.v_weights[i] *= mask.bits
