import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from core.errors import ArgumentError, DimensionError
from core.tensor import (
    ConvParams,
    as_tensor,
    conv2d_backward,
    conv2d_valid,
    relu,
    relu_backward,
    resize_bilinear,
    scaled_size,
)
from tests.gradcheck import numerical_gradients, rel_error
from tests.oracles import naive_conv2d


def _params(rng, k, c, kh, kw):
    return ConvParams(rng.normal(size=(k, c, kh, kw)), rng.normal(size=k))


# ── as_tensor / ConvParams ───────────────────────────────────────────────────

def test_as_tensor_rejects_wrong_rank_and_empty_axes():
    with pytest.raises(DimensionError):
        as_tensor(np.zeros((4, 4)))
    with pytest.raises(DimensionError):
        as_tensor(np.zeros((1, 0, 3)))


def test_as_tensor_is_contiguous_and_keeps_float_dtype():
    x = np.zeros((3, 4, 5))[:, ::2, :]
    t = as_tensor(x)
    assert t.flags["C_CONTIGUOUS"]
    assert t.dtype == np.float64
    assert as_tensor(np.zeros((1, 2, 2), dtype=np.uint8)).dtype == np.float32


def test_conv_params_validate_kernel_and_bias():
    with pytest.raises(DimensionError):
        ConvParams(np.zeros((1, 1, 2, 3)), np.zeros(1))
    with pytest.raises(DimensionError):
        ConvParams(np.zeros((2, 1, 3, 3)), np.zeros(3))


# ── conv2d_valid ─────────────────────────────────────────────────────────────

def test_conv_of_ones_sums_the_window():
    out = conv2d_valid(np.ones((1, 3, 3)), ConvParams(np.ones((1, 1, 3, 3)), np.zeros(1)))
    assert out.shape == (1, 1, 1)
    assert out[0, 0, 0] == 9


def test_conv_identity_kernel_returns_input(rng):
    x = rng.normal(size=(1, 6, 4))
    out = conv2d_valid(x, ConvParams(np.ones((1, 1, 1, 1)), np.zeros(1)))
    assert_array_equal(out, x)


def test_conv_matches_loop_oracle_on_documented_case(rng):
    x = rng.normal(size=(2, 7, 6))
    p = _params(rng, 3, 2, 3, 3)
    assert_allclose(conv2d_valid(x, p), naive_conv2d(x, p.weights, p.bias), rtol=0, atol=1e-10)


def test_conv_without_bias_is_linear(rng):
    p = ConvParams(rng.normal(size=(3, 2, 3, 5)), np.zeros(3))
    for _ in range(20):
        x, y = rng.normal(size=(2, 2, 9, 8))
        a, b = rng.normal(size=2)
        mixed = conv2d_valid(a * x + b * y, p)
        assert_allclose(mixed, a * conv2d_valid(x, p) + b * conv2d_valid(y, p), rtol=0, atol=1e-8)


def test_conv_matches_loop_oracle_on_random_instances(rng):
    for _ in range(200):
        c, k = rng.integers(1, 5, size=2)
        kh, kw = rng.choice([1, 3, 5], size=2)
        h = int(rng.integers(kh, 9))
        w = int(rng.integers(kw, 9))
        x = rng.normal(size=(c, h, w))
        p = _params(rng, k, c, kh, kw)
        assert np.max(np.abs(conv2d_valid(x, p) - naive_conv2d(x, p.weights, p.bias))) < 1e-10


def test_conv_shape_errors_name_both_shapes(rng):
    p = _params(rng, 2, 3, 3, 3)
    with pytest.raises(DimensionError, match=r"\(2, 5, 5\).*\(2, 3, 3, 3\)"):
        conv2d_valid(np.zeros((2, 5, 5)), p)
    with pytest.raises(DimensionError):
        conv2d_valid(np.zeros((3, 2, 5)), p)


def test_conv_keeps_float32():
    x = np.ones((2, 4, 4), dtype=np.float32)
    p = ConvParams(np.ones((1, 2, 3, 3), dtype=np.float32), np.zeros(1, dtype=np.float32))
    assert conv2d_valid(x, p).dtype == np.float32


# ── conv2d_backward ──────────────────────────────────────────────────────────

def test_conv_backward_zero_cotangent(rng):
    x = rng.normal(size=(2, 5, 5))
    p = _params(rng, 3, 2, 3, 3)
    gx, gp = conv2d_backward(x, p, np.zeros((3, 3, 3)))
    assert not gx.any() and not gp.weights.any() and not gp.bias.any()


def test_conv_backward_1x1_closed_form(rng):
    x = rng.normal(size=(1, 4, 5))
    g = rng.normal(size=(1, 4, 5))
    _, gp = conv2d_backward(x, ConvParams(np.full((1, 1, 1, 1), 2.0), np.zeros(1)), g)
    assert_allclose(gp.bias, [g.sum()])
    assert_allclose(gp.weights[0, 0, 0, 0], np.sum(g * x))


def test_conv_backward_matches_finite_differences(rng):
    x = rng.normal(size=(2, 6, 5))
    p = _params(rng, 3, 2, 3, 3)
    g = rng.normal(size=(3, 4, 3))

    def scalar(arrays):
        xx, ww, bb = arrays
        return float(np.sum(conv2d_valid(xx, ConvParams(ww, bb)) * g))

    gx, gp = conv2d_backward(x, p, g)
    numeric = numerical_gradients(scalar, [x, p.weights, p.bias], eps=1e-4)
    assert rel_error([gx, gp.weights, gp.bias], numeric) < 1e-5


def test_conv_backward_rejects_wrong_cotangent_shape(rng):
    p = _params(rng, 1, 1, 3, 3)
    with pytest.raises(DimensionError):
        conv2d_backward(np.zeros((1, 5, 5)), p, np.zeros((1, 2, 3)))


# ── relu ─────────────────────────────────────────────────────────────────────

def test_relu_values_and_idempotence(rng):
    assert_array_equal(relu(np.array([[[-1.0, 0.0, 2.0]]])), [[[0.0, 0.0, 2.0]]])
    x = rng.normal(size=(2, 3, 4))
    assert_array_equal(relu(relu(x)), relu(x))


def test_relu_backward_masks_non_positive_inputs():
    out = relu_backward(np.array([[[-1.0, 2.0, 0.0]]]), np.array([[[5.0, 7.0, 9.0]]]))
    assert_array_equal(out, [[[0.0, 7.0, 0.0]]])


# ── resize_bilinear ──────────────────────────────────────────────────────────

def test_resize_scale_one_is_exact_copy(rng):
    x = rng.normal(size=(2, 5, 3))
    out = resize_bilinear(x, 1.0)
    assert_array_equal(out, x)
    assert out is not x


def test_resize_preserves_constants():
    out = resize_bilinear(np.full((1, 2, 2), 7.0), 2.0)
    assert out.shape == (1, 4, 4)
    assert_allclose(out, 7.0)


def test_resize_interpolates_a_column():
    out = resize_bilinear(np.array([[[0.0], [10.0]]]), 2.0)
    assert out.shape == (1, 4, 2)
    col = out[0, :, 0]
    assert_allclose(col, [0.0, 10 / 3, 20 / 3, 10.0])
    assert np.all(np.diff(col) > 0)


def test_resize_output_dims_round_half_up():
    assert scaled_size(143, 0.5) == 72
    assert scaled_size(188, 0.5) == 94
    assert scaled_size(1, 0.5) == 1
    assert resize_bilinear(np.zeros((1, 188, 143)), 2.0).shape == (1, 376, 286)


@pytest.mark.parametrize("scale", [0.0, -1.0])
def test_resize_rejects_non_positive_scale(scale):
    with pytest.raises(ArgumentError):
        resize_bilinear(np.zeros((1, 2, 2)), scale)
