from typing import Literal, Optional, Tuple
import numpy as np
from ..models.errors import ShapeError
from .tensor import Tensor, record


def _require_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"'{op}' requires identical shapes.", details=(a.shape, b.shape))


def _require_nchw(op: str, x: Tensor) -> None:
    if x.ndim != 4:
        raise ShapeError(f"'{op}' expects a (batch, channels, height, width) tensor.", details=x.shape)


# ---------------------------------Elementwise---------------------------------------------
def add(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("add", a, b)
    return record("add", (a, b), a.data + b.data, lambda g: (g, g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("mul", a, b)
    return record("mul", (a, b), a.data * b.data, lambda g: (g * b.data, g * a.data))


def sigmoid(x: Tensor) -> Tensor:
    # tanh form is overflow-free and gives sigmoid(0) == 0.5 exactly.
    out = 0.5 * (1.0 + np.tanh(0.5 * x.data))
    return record("sigmoid", (x,), out, lambda g: (g * out * (1.0 - out),))


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)
    return record("tanh", (x,), out, lambda g: (g * (1.0 - out * out),))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    out = np.where(mask, x.data, 0.0).astype(x.dtype, copy=False)
    return record("relu", (x,), out, lambda g: (g * mask,))


ElementwiseOp = Literal["add", "mul", "sigmoid", "tanh", "relu"]


def elementwise(op: ElementwiseOp, a: Tensor, b: Optional[Tensor] = None) -> Tensor:
    """
    Dispatches one of the gate-arithmetic ops by name. Binary ops need `b`.
    """

    if op in ("add", "mul"):
        if b is None:
            raise ShapeError(f"'{op}' is binary and needs a second operand.")
        return add(a, b) if op == "add" else mul(a, b)
    if op == "sigmoid":
        return sigmoid(a)
    if op == "tanh":
        return tanh(a)
    if op == "relu":
        return relu(a)
    raise ShapeError(f"Unknown elementwise op '{op}'.")


# ---------------------------------Per-channel---------------------------------------------
def channel_mul(x: Tensor, weight: Tensor) -> Tensor:
    """
    Hadamard product of `x` with a per-channel weight broadcast over batch and space.
    """

    _require_nchw("channel_mul", x)
    if weight.shape != (x.shape[1],):
        raise ShapeError("Per-channel weight does not match channel count.", details=(x.shape, weight.shape))

    w = weight.data[None, :, None, None]

    def backward(g: np.ndarray):
        return g * w, (g * x.data).sum(axis=(0, 2, 3))

    return record("channel_mul", (x, weight), x.data * w, backward)


def channel_affine(x: Tensor, gamma: Tensor, beta: Tensor) -> Tensor:
    """
    Learnable per-channel scale and shift, used in place of batch statistics.
    """

    _require_nchw("channel_affine", x)
    channels = x.shape[1]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise ShapeError("Affine parameters do not match channel count.", details=(x.shape, gamma.shape, beta.shape))

    scale = gamma.data[None, :, None, None]
    shift = beta.data[None, :, None, None]

    def backward(g: np.ndarray):
        return g * scale, (g * x.data).sum(axis=(0, 2, 3)), g.sum(axis=(0, 2, 3))

    return record("channel_affine", (x, gamma, beta), x.data * scale + shift, backward)


# ---------------------------------Layout---------------------------------------------
def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    """
    Stacks `a` then `b` along the channel axis: `a` owns channels [0, Ca), `b` owns [Ca, Ca + Cb).
    """

    _require_nchw("concat_channels", a)
    _require_nchw("concat_channels", b)
    if a.shape[0] != b.shape[0] or a.shape[2:] != b.shape[2:]:
        raise ShapeError("concat_channels requires equal batch and spatial extents.", details=(a.shape, b.shape))

    split = a.shape[1]
    out = np.concatenate([a.data, b.data], axis=1)
    return record("concat_channels", (a, b), out, lambda g: (g[:, :split], g[:, split:]))


def slice_channels(x: Tensor, start: int, stop: int) -> Tensor:
    _require_nchw("slice_channels", x)
    if not 0 <= start <= stop <= x.shape[1]:
        raise ShapeError("Channel slice out of range.", details=(x.shape, start, stop))

    def backward(g: np.ndarray):
        grad = np.zeros_like(x.data)
        grad[:, start:stop] = g
        return (grad,)

    return record("slice_channels", (x,), x.data[:, start:stop].copy(), backward)


# ---------------------------------Resampling---------------------------------------------
def interpolation_matrix(n_in: int, n_out: int) -> np.ndarray:
    """
    Returns the (n_out, n_in) linear-interpolation matrix of one axis under the
    align-corners=false convention: output sample i reads input coordinate
    (i + 0.5) * n_in / n_out - 0.5, clamped to the border.
    """

    scale = n_in / n_out
    src = np.clip((np.arange(n_out) + 0.5) * scale - 0.5, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = src - lo

    matrix = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    np.add.at(matrix, (rows, lo), 1.0 - frac)
    np.add.at(matrix, (rows, hi), frac)
    return matrix


def resize_to(x: Tensor, size: Tuple[int, int]) -> Tensor:
    """
    Bilinear resize of the spatial axes to `size` = (height, width).
    """

    _require_nchw("resize", x)
    height, width = size
    if (height, width) == x.shape[2:]:
        return x

    rows = interpolation_matrix(x.shape[2], height).astype(x.dtype)
    cols = interpolation_matrix(x.shape[3], width).astype(x.dtype)
    out = rows @ x.data @ cols.T

    return record("resize_bilinear", (x,), out, lambda g: (rows.T @ g @ cols,))


def resize_bilinear(x: Tensor, factor: float) -> Tensor:
    """
    Down- or upsamples by exactly 2 (`factor` 0.5 or 2).
    """

    _require_nchw("resize_bilinear", x)
    height, width = x.shape[2:]
    if factor == 2:
        return resize_to(x, (height * 2, width * 2))
    if factor == 0.5:
        if height % 2 or width % 2:
            raise ShapeError("Downscaling by 2 needs even spatial extents.", details=x.shape)
        return resize_to(x, (height // 2, width // 2))
    raise ShapeError("resize_bilinear supports factors 0.5 and 2 only.", details=factor)


# ---------------------------------Heads and reductions---------------------------------------------
def _softmax(data: np.ndarray) -> np.ndarray:
    shifted = data - data.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def softmax_channels(x: Tensor) -> Tensor:
    _require_nchw("softmax_channels", x)
    out = _softmax(x.data)

    def backward(g: np.ndarray):
        return (out * (g - (g * out).sum(axis=1, keepdims=True)),)

    return record("softmax_channels", (x,), out, backward)


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """
    Mean per-pixel cross-entropy of channel logits against integer class maps.

    Args:
        - logits: (N, K, H, W) tensor of unnormalized scores.
        - labels: (N, H, W) integer array with values in [0, K).

    Returns:
        A scalar tensor.
    """

    _require_nchw("cross_entropy", logits)
    batch, classes, height, width = logits.shape
    if labels.shape != (batch, height, width):
        raise ShapeError("Label map does not match logits.", details=(logits.shape, labels.shape))
    if labels.min() < 0 or labels.max() >= classes:
        raise ShapeError("Label value outside [0, K).", details=(int(labels.min()), int(labels.max())))

    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    picked = np.take_along_axis(log_probs, labels[:, None].astype(np.int64), axis=1)
    count = batch * height * width
    loss = np.asarray(-picked.sum() / count, dtype=logits.dtype)

    def backward(g: np.ndarray):
        grad = np.exp(log_probs)
        np.put_along_axis(
            grad,
            labels[:, None].astype(np.int64),
            np.take_along_axis(grad, labels[:, None].astype(np.int64), axis=1) - 1.0,
            axis=1,
        )
        return (grad * (g / count),)

    return record("cross_entropy", (logits,), loss, backward)


def sum_all(x: Tensor) -> Tensor:
    out = np.asarray(x.data.sum(), dtype=x.dtype)
    return record("sum", (x,), out, lambda g: (np.broadcast_to(g, x.shape).copy(),))


def mean_all(x: Tensor) -> Tensor:
    size = x.data.size
    out = np.asarray(x.data.mean(), dtype=x.dtype)
    return record("mean", (x,), out, lambda g: (np.full(x.shape, g / size, dtype=x.dtype),))
