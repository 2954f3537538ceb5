"""Forward/backward chain checked against independent oracles.

The backward pass is verified three ways: central finite differences of
the full loss, a fully hand-expanded scalar derivative for a 1x1 layer,
and exactness cases (perfect prediction ==> zero gradient).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsestart.matrix import ShapeMismatchError
from sparsestart.network import (
    DegenerateTargetError,
    LayerParams,
    MlpNetwork,
    accuracy,
    backward,
    forward,
    gradient_check,
    init_network,
    l1_penalty,
    nmse,
    sigmoid,
    sigmoid_prime,
)

SIGMOID_2 = 1.0 / (1.0 + math.exp(-2.0))  # 0.8807970779778823


class TestSigmoid:
    def test_zero_maps_to_half(self):
        np.testing.assert_array_equal(sigmoid(np.zeros((2, 2))), np.full((2, 2), 0.5))

    def test_direct_evaluation_at_two(self):
        assert sigmoid(np.array([[2.0]]))[0, 0] == pytest.approx(SIGMOID_2, abs=1e-15)

    @given(st.floats(-36, 36))
    @settings(max_examples=50, deadline=None)
    def test_symmetry_and_bounds(self, s):
        # restricted to the float64 range where sigmoid has not saturated
        a = sigmoid(np.array([[s]]))[0, 0]
        b = sigmoid(np.array([[-s]]))[0, 0]
        assert a + b == pytest.approx(1.0, abs=1e-12)
        assert 0.0 < a < 1.0

    def test_prime_maximum_at_zero(self):
        assert sigmoid_prime(np.zeros((1, 1)))[0, 0] == 0.25

    @given(st.floats(-36, 36))
    @settings(max_examples=50, deadline=None)
    def test_prime_even_and_bounded(self, s):
        a = sigmoid_prime(np.array([[s]]))[0, 0]
        b = sigmoid_prime(np.array([[-s]]))[0, 0]
        assert a == pytest.approx(b, rel=1e-12)
        assert 0.0 < a <= 0.25

    def test_prime_matches_central_differences(self):
        rng = np.random.default_rng(0)
        s = rng.uniform(-8, 8, size=(5, 5))
        h = 1e-5
        numeric = (sigmoid(s + h) - sigmoid(s - h)) / (2 * h)
        np.testing.assert_allclose(sigmoid_prime(s), numeric, atol=1e-8)


class TestForward:
    def test_zero_single_layer_outputs_half(self):
        net = MlpNetwork([LayerParams(np.zeros((3, 4)), np.zeros((3, 1)))])
        trace = forward(net, np.random.default_rng(1).uniform(size=(4, 6)))
        np.testing.assert_array_equal(trace.output, np.full((3, 6), 0.5))

    def test_scalar_evaluation(self):
        net = MlpNetwork([LayerParams(np.array([[1.0]]), np.array([[0.0]]))])
        trace = forward(net, np.array([[2.0]]))
        assert trace.output[0, 0] == pytest.approx(SIGMOID_2, abs=1e-15)

    def test_trace_is_definitionally_consistent(self):
        rng = np.random.default_rng(2)
        net = init_network([5, 7, 6, 4, 3], rng=rng)
        trace = forward(net, rng.uniform(size=(5, 8)))
        assert len(trace.pre_activations) == len(trace.activations) == 4
        for out, act in zip(trace.pre_activations, trace.activations):
            np.testing.assert_array_equal(act, sigmoid(out))
            assert ((act > 0.0) & (act < 1.0)).all()

    def test_dimension_mismatch_names_layer(self):
        net = init_network([4, 3, 2], rng=np.random.default_rng(3))
        with pytest.raises(ShapeMismatchError):
            forward(net, np.zeros((5, 2)))


class TestNmse:
    def test_perfect_prediction_is_zero(self):
        y = np.random.default_rng(4).uniform(size=(3, 5))
        assert nmse(y, y) == 0.0

    def test_constant_prediction_at_target_mean(self):
        rng = np.random.default_rng(5)
        y_true = rng.uniform(size=(4, 6))
        n = y_true.size
        y_pred = np.full_like(y_true, y_true.mean())
        assert nmse(y_pred, y_true) == pytest.approx((n - 1) / n, rel=1e-12)

    def test_hand_computed_ratio(self):
        y_pred = np.array([[1.0, 2.0, 3.0]])
        y_true = np.array([[2.0, 4.0, 6.0]])
        # numerator mean([1,4,9]) = 14/3, unbiased variance of target = 4
        assert nmse(y_pred, y_true) == pytest.approx(7.0 / 6.0, rel=1e-12)

    def test_constant_target_rejected(self):
        with pytest.raises(DegenerateTargetError):
            nmse(np.zeros((2, 2)), np.ones((2, 2)))

    def test_single_element_rejected(self):
        with pytest.raises(DegenerateTargetError):
            nmse(np.zeros((1, 1)), np.ones((1, 1)))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_non_negative_and_zero_iff_equal(self, seed):
        rng = np.random.default_rng(seed)
        y_true = rng.uniform(size=(3, 4))
        y_pred = rng.uniform(size=(3, 4))
        value = nmse(y_pred, y_true)
        assert value >= 0.0
        assert (value == 0.0) == bool((y_pred == y_true).all())


class TestL1Penalty:
    def test_zero_lambda(self):
        net = init_network([3, 2], 0.0, np.random.default_rng(6))
        assert l1_penalty(net) == 0.0

    def test_hand_sum(self):
        net = MlpNetwork(
            [LayerParams(np.array([[-1.0, 2.0], [-3.0, 4.0]]), np.zeros((2, 1)))],
            l1_lambda=1.0,
        )
        assert l1_penalty(net) == 10.0

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(7)
        w = rng.normal(size=(3, 4))
        net_pos = MlpNetwork([LayerParams(w.copy(), np.zeros((3, 1)))], l1_lambda=0.5)
        net_neg = MlpNetwork([LayerParams(-w, np.zeros((3, 1)))], l1_lambda=0.5)
        assert l1_penalty(net_pos) == l1_penalty(net_neg)


class TestBackward:
    def test_zero_gradients_at_perfect_prediction(self):
        rng = np.random.default_rng(8)
        net = init_network([4, 3, 2], 0.0, rng)
        x = rng.uniform(size=(4, 5))
        trace = forward(net, x)
        grads = backward(net, trace, trace.output.copy())
        for wg, bg in zip(grads.weight_grads, grads.bias_grads):
            np.testing.assert_array_equal(wg, np.zeros_like(wg))
            np.testing.assert_array_equal(bg, np.zeros_like(bg))

    def test_scalar_hand_expansion(self):
        # one 1x1 layer on a batch of two samples, plus L1
        w, b, lam = 0.7, -0.2, 0.01
        x1, x2, t1, t2 = 0.5, -1.5, 0.9, 0.2
        net = MlpNetwork([LayerParams(np.array([[w]]), np.array([[b]]))], l1_lambda=lam)
        x = np.array([[x1, x2]])
        y_true = np.array([[t1, t2]])

        y1 = 1.0 / (1.0 + math.exp(-(w * x1 + b)))
        y2 = 1.0 / (1.0 + math.exp(-(w * x2 + b)))
        denom = (t1 - t2) ** 2 / 2.0  # unbiased variance of [t1, t2]
        dw = ((y1 - t1) * y1 * (1 - y1) * x1 + (y2 - t2) * y2 * (1 - y2) * x2) / denom
        dw += lam * math.copysign(1.0, w)
        db = ((y1 - t1) * y1 * (1 - y1) + (y2 - t2) * y2 * (1 - y2)) / denom

        grads = backward(net, forward(net, x), y_true)
        assert grads.weight_grads[0][0, 0] == pytest.approx(dw, rel=1e-12)
        assert grads.bias_grads[0][0, 0] == pytest.approx(db, rel=1e-12)

    @pytest.mark.parametrize("lam", [0.0, 1e-3])
    def test_finite_difference_oracle(self, lam):
        rng = np.random.default_rng(9)
        net = init_network([6, 5, 4, 3], lam, rng)
        if lam > 0:
            for layer in net.layers:
                layer.weights += 0.05 * np.where(layer.weights >= 0, 1.0, -1.0)
        x = rng.uniform(size=(6, 4))
        y_true = rng.uniform(size=(3, 4))
        errors = gradient_check(net, x, y_true, step=1e-5)
        assert (errors <= 1e-4).mean() >= 0.99
        assert errors.max() < 1e-3

    def test_duplicated_batch_scales_by_variance_correction(self):
        # With the unbiased (n-1) target variance, duplicating every sample
        # rescales gradients by exactly (2n-1)/(2n-2); checking that factor
        # pins down the mean-based batch semantics.
        rng = np.random.default_rng(10)
        net = init_network([4, 3, 2], 0.0, rng)
        x = rng.uniform(size=(4, 5))
        y_true = rng.uniform(size=(2, 5))
        n = y_true.size
        factor = (2 * n - 1) / (2 * n - 2)

        single = backward(net, forward(net, x), y_true)
        x2 = np.concatenate([x, x], axis=1)
        y2 = np.concatenate([y_true, y_true], axis=1)
        doubled = backward(net, forward(net, x2), y2)
        for wg1, wg2 in zip(single.weight_grads, doubled.weight_grads):
            np.testing.assert_allclose(wg2, wg1 * factor, rtol=1e-12, atol=1e-15)
        for bg1, bg2 in zip(single.bias_grads, doubled.bias_grads):
            np.testing.assert_allclose(bg2, bg1 * factor, rtol=1e-12, atol=1e-15)

    def test_shape_mismatch_rejected(self):
        rng = np.random.default_rng(11)
        net = init_network([3, 2], 0.0, rng)
        trace = forward(net, rng.uniform(size=(3, 4)))
        with pytest.raises(ShapeMismatchError):
            backward(net, trace, np.zeros((2, 5)))


class TestAccuracy:
    def test_one_hot_predictions(self):
        labels = np.array([2, 0, 1])
        y_pred = np.zeros((3, 3))
        y_pred[labels, np.arange(3)] = 1.0
        assert accuracy(y_pred, labels) == 1.0

    def test_ties_break_to_class_zero(self):
        y_pred = np.full((4, 3), 0.5)
        assert accuracy(y_pred, np.array([0, 0, 0])) == 1.0
        assert accuracy(y_pred, np.array([1, 2, 3])) == 0.0

    def test_against_per_sample_loop_oracle(self):
        rng = np.random.default_rng(12)
        y_pred = rng.uniform(size=(10, 40))
        labels = rng.integers(0, 10, size=40)
        hits = 0
        for j in range(40):
            best = 0
            for i in range(10):
                if y_pred[i, j] > y_pred[best, j]:
                    best = i
            hits += best == labels[j]
        assert accuracy(y_pred, labels) == hits / 40

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            accuracy(np.zeros((3, 2)), np.array([0, 3]))


class TestInitNetwork:
    def test_glorot_bounds_and_zero_biases(self):
        rng = np.random.default_rng(13)
        net = init_network([100, 50, 10], rng=rng)
        for layer, (fan_in, fan_out) in zip(net.layers, [(100, 50), (50, 10)]):
            r = math.sqrt(6.0 / (fan_in + fan_out))
            assert np.abs(layer.weights).max() <= r
            np.testing.assert_array_equal(layer.bias, np.zeros_like(layer.bias))

    def test_same_seed_same_network(self):
        a = init_network([5, 4, 3], rng=np.random.default_rng(99))
        b = init_network([5, 4, 3], rng=np.random.default_rng(99))
        for la, lb in zip(a.layers, b.layers):
            np.testing.assert_array_equal(la.weights, lb.weights)

    def test_bad_dims_rejected(self):
        with pytest.raises(ValueError):
            init_network([5])
        with pytest.raises(ValueError):
            init_network([5, 0, 3])
