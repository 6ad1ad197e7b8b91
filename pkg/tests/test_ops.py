import numpy as np
import pytest
from src.engine.ops import (
    channel_affine,
    channel_mul,
    concat_channels,
    cross_entropy,
    elementwise,
    interpolation_matrix,
    relu,
    resize_bilinear,
    resize_to,
    sigmoid,
    slice_channels,
    softmax_channels,
    tanh,
)
from src.engine.tensor import Tensor
from src.models.errors import ShapeError


def _x(rng, shape=(2, 3, 4, 6)):
    return Tensor(rng.normal(size=shape), requires_grad=True)


class TestElementwise:
    def test_sigmoid_of_zero_is_exactly_half(self):
        assert sigmoid(Tensor(np.zeros(3))).data.tolist() == [0.5, 0.5, 0.5]

    def test_sigmoid_saturates_without_overflow(self):
        out = sigmoid(Tensor(np.array([-1000.0, 1000.0]))).data
        np.testing.assert_array_equal(out, [0.0, 1.0])

    def test_dispatch_by_name(self, rng):
        a, b = _x(rng), _x(rng)
        np.testing.assert_array_equal(elementwise("mul", a, b).data, a.data * b.data)
        np.testing.assert_array_equal(elementwise("relu", a).data, np.maximum(a.data, 0))

    def test_binary_dispatch_needs_two_operands(self, rng):
        with pytest.raises(ShapeError):
            elementwise("add", _x(rng))

    def test_mismatched_shapes_raise(self, rng):
        with pytest.raises(ShapeError):
            elementwise("add", _x(rng, (1, 2, 3, 3)), _x(rng, (1, 2, 3, 4)))

    def test_tanh_matches_numpy(self, rng):
        x = _x(rng)
        np.testing.assert_allclose(tanh(x).data, np.tanh(x.data), rtol=0, atol=1e-15)

    def test_multiplying_by_zeros_gives_zeros(self, rng):
        x = _x(rng)
        np.testing.assert_array_equal(elementwise("mul", x, Tensor(np.zeros(x.shape))).data, 0.0)

    @pytest.mark.parametrize("op", [sigmoid, tanh, relu, softmax_channels])
    def test_unary_gradients(self, op, rng, fd_check, project):
        x = _x(rng)
        weights = rng.normal(size=x.shape)
        fd_check(lambda: project(op(x), weights), [x])


class TestChannelOps:
    def test_channel_mul_broadcasts_per_channel(self, rng):
        x = _x(rng)
        w = Tensor(np.array([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(channel_mul(x, w).data[:, 2], 3.0 * x.data[:, 2])

    def test_channel_ops_gradients(self, rng, fd_check, project):
        x = _x(rng)
        w = Tensor(rng.normal(size=3), requires_grad=True)
        gamma = Tensor(rng.normal(size=3), requires_grad=True)
        beta = Tensor(rng.normal(size=3), requires_grad=True)
        weights = rng.normal(size=x.shape)
        fd_check(lambda: project(channel_affine(channel_mul(x, w), gamma, beta), weights), [x, w, gamma, beta])

    def test_concat_puts_first_operand_first(self, rng):
        a, b = _x(rng, (1, 2, 3, 3)), _x(rng, (1, 4, 3, 3))
        out = concat_channels(a, b)
        assert out.shape == (1, 6, 3, 3)
        np.testing.assert_array_equal(out.data[:, :2], a.data)
        np.testing.assert_array_equal(out.data[:, 2:], b.data)

    def test_concat_rejects_spatial_mismatch(self, rng):
        with pytest.raises(ShapeError):
            concat_channels(_x(rng, (1, 2, 3, 3)), _x(rng, (1, 2, 3, 4)))

    def test_concat_and_slice_gradients(self, rng, fd_check, project):
        a, b = _x(rng, (1, 2, 3, 3)), _x(rng, (1, 3, 3, 3))
        weights = rng.normal(size=(1, 3, 3, 3))
        fd_check(lambda: project(slice_channels(concat_channels(a, b), 1, 4), weights), [a, b])

    def test_slice_out_of_range_raises(self, rng):
        with pytest.raises(ShapeError):
            slice_channels(_x(rng), 2, 5)


class TestResampling:
    def test_interpolation_rows_sum_to_one(self):
        for n_in, n_out in [(4, 8), (8, 4), (5, 7)]:
            np.testing.assert_allclose(interpolation_matrix(n_in, n_out).sum(axis=1), 1.0)

    def test_constant_maps_stay_constant(self):
        x = Tensor(np.full((1, 2, 4, 6), 0.25))
        np.testing.assert_allclose(resize_bilinear(x, 2).data, 0.25)
        np.testing.assert_allclose(resize_bilinear(x, 0.5).data, 0.25)

    def test_halving_averages_pixel_pairs(self):
        x = Tensor(np.arange(16.0).reshape(1, 1, 4, 4))
        expected = x.data.reshape(1, 1, 2, 2, 2, 2).mean(axis=(3, 5))
        np.testing.assert_allclose(resize_bilinear(x, 0.5).data, expected)

    def test_upscaling_matches_hand_computed_table(self):
        x = Tensor(np.array([[0.0, 1.0], [2.0, 3.0]]).reshape(1, 1, 2, 2))
        expected = [
            [0.0, 0.25, 0.75, 1.0],
            [0.5, 0.75, 1.25, 1.5],
            [1.5, 1.75, 2.25, 2.5],
            [2.0, 2.25, 2.75, 3.0],
        ]
        np.testing.assert_allclose(resize_bilinear(x, 2).data[0, 0], expected, rtol=0, atol=1e-12)

    def test_upscaling_clamps_border_samples(self):
        np.testing.assert_allclose(
            interpolation_matrix(2, 4), [[1, 0], [0.75, 0.25], [0.25, 0.75], [0, 1]], rtol=0, atol=1e-15
        )

    def test_same_size_is_identity(self, rng):
        x = _x(rng)
        assert resize_to(x, x.shape[2:]) is x

    def test_unsupported_factor_raises(self, rng):
        with pytest.raises(ShapeError):
            resize_bilinear(_x(rng), 3)

    def test_odd_extent_cannot_be_halved(self, rng):
        with pytest.raises(ShapeError):
            resize_bilinear(_x(rng, (1, 1, 5, 4)), 0.5)

    def test_resize_gradients(self, rng, fd_check, project):
        x = _x(rng)
        weights = rng.normal(size=(2, 3, 7, 5))
        fd_check(lambda: project(resize_to(x, (7, 5)), weights), [x])


class TestSoftmax:
    def test_pixels_sum_to_one_and_stay_positive(self, rng):
        probs = softmax_channels(Tensor(5.0 * rng.normal(size=(2, 6, 4, 5)))).data
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, rtol=0, atol=1e-9)
        assert np.all(probs > 0)

    def test_adding_a_per_pixel_constant_changes_nothing(self, rng):
        logits = rng.normal(size=(1, 4, 3, 3))
        shift = rng.normal(size=(1, 1, 3, 3)) * 10.0
        np.testing.assert_allclose(
            softmax_channels(Tensor(logits + shift)).data, softmax_channels(Tensor(logits)).data, rtol=0, atol=1e-12
        )

    def test_hand_computed_pixel(self):
        probs = softmax_channels(Tensor(np.array([1.0, 2.0, 3.0]).reshape(1, 3, 1, 1))).data.ravel()
        np.testing.assert_allclose(probs, [0.0900, 0.2447, 0.6652], atol=5e-5)

    def test_uniform_logits_give_one_over_c(self):
        probs = softmax_channels(Tensor(np.full((1, 5, 2, 2), 0.7))).data
        np.testing.assert_allclose(probs, 0.2, rtol=0, atol=1e-15)


class TestCrossEntropy:
    def test_uniform_logits_give_log_k(self):
        logits = Tensor(np.zeros((2, 4, 3, 3)))
        labels = np.zeros((2, 3, 3), dtype=np.int64)
        assert cross_entropy(logits, labels).item() == pytest.approx(np.log(4))

    def test_label_out_of_range_raises(self):
        with pytest.raises(ShapeError):
            cross_entropy(Tensor(np.zeros((1, 2, 2, 2))), np.full((1, 2, 2), 2))

    def test_gradient(self, rng, fd_check):
        logits = _x(rng, (2, 4, 3, 5))
        labels = rng.integers(0, 4, size=(2, 3, 5))
        fd_check(lambda: cross_entropy(logits, labels), [logits])
