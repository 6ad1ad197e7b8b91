import contextvars
from contextlib import contextmanager
from typing import Callable, Dict, Iterator, Optional
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from ..core.config import env_settings
from ..models.errors import InstrumentationError, ShapeError
from .tensor import Tensor, record


class MacCounter:
    """
    Tally of multiply-accumulates performed by forward convolutions.
    """

    def __init__(self):
        self.total = 0
        self.by_op: Dict[str, int] = {}

    def add(self, op: str, macs: int) -> None:
        self.total += macs
        self.by_op[op] = self.by_op.get(op, 0) + macs


# Per execution context, never shared between threads.
_MAC_COUNTER: contextvars.ContextVar[Optional[MacCounter]] = contextvars.ContextVar(
    "mac_counter", default=None
)


@contextmanager
def count_macs() -> Iterator[MacCounter]:
    """
    Counts the MACs of every conv, depthwise and pointwise forward op executed
    inside the block.

    Raises:
        InstrumentationError: when SEGKIT_ENABLE_MAC_COUNTER is off.
    """

    if not env_settings.ENABLE_MAC_COUNTER:
        raise InstrumentationError("MAC instrumentation is disabled (SEGKIT_ENABLE_MAC_COUNTER=false).")

    counter = MacCounter()
    token = _MAC_COUNTER.set(counter)
    try:
        yield counter
    finally:
        _MAC_COUNTER.reset(token)


def measured_macs(execution: Callable[[], object]) -> int:
    """
    Runs `execution` once and returns the MACs its convolutions performed.
    """

    with count_macs() as counter:
        execution()
    return counter.total


def _count(op: str, macs: int) -> None:
    counter = _MAC_COUNTER.get()
    if counter is not None:
        counter.add(op, macs)


def _windows(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    # Zero "same" padding; returns a (N, C, H, W, kh, kw) view.
    padded = np.pad(x, ((0, 0), (0, 0), (kh // 2, kh // 2), (kw // 2, kw // 2)))
    return sliding_window_view(padded, (kh, kw), axis=(2, 3))


def _conv_same(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    windows = _windows(x, kernel.shape[2], kernel.shape[3])
    out = np.tensordot(windows, kernel, axes=([1, 4, 5], [1, 2, 3]))
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2))


def _depthwise_same(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    windows = _windows(x, kernel.shape[1], kernel.shape[2])
    return np.einsum("nchwij,cij->nchw", windows, kernel)


def _check_bias(bias: Optional[Tensor], channels: int) -> None:
    if bias is not None and bias.shape != (channels,):
        raise ShapeError("Bias does not match output channels.", details=(bias.shape, channels))


def conv2d(input: Tensor, kernel: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """
    Cross-correlation with zero "same" padding and stride 1.

    Args:
        - input: (N, I, H, W) tensor.
        - kernel: (O, I, Ky, Kx) tensor with odd spatial extents.
        - bias: optional (O,) tensor.

    Returns:
        (N, O, H, W) tensor.
    """

    if input.ndim != 4 or kernel.ndim != 4:
        raise ShapeError("conv2d expects a 4-D input and a 4-D kernel.", details=(input.shape, kernel.shape))
    batch, channels, height, width = input.shape
    out_channels, kernel_channels, kh, kw = kernel.shape
    if kernel_channels != channels:
        raise ShapeError("conv2d channel mismatch between input and kernel.", details=(input.shape, kernel.shape))
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError("conv2d kernel extents must be odd.", details=kernel.shape)
    _check_bias(bias, out_channels)

    out = _conv_same(input.data, kernel.data)
    if bias is not None:
        out += bias.data[None, :, None, None]
    _count("conv2d", batch * out_channels * channels * height * width * kh * kw)

    def backward(g: np.ndarray):
        grad_input = None
        if input.requires_grad:
            flipped = kernel.data[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)
            grad_input = _conv_same(g, np.ascontiguousarray(flipped))
        grad_kernel = None
        if kernel.requires_grad:
            windows = _windows(input.data, kh, kw)
            grad_kernel = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_bias = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return grad_input, grad_kernel, grad_bias

    inputs = (input, kernel) if bias is None else (input, kernel, bias)
    return record("conv2d", inputs, out, backward)


def depthwise_conv2d(input: Tensor, kernel: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """
    Per-channel spatial convolution: output channel c reads input channel c only.

    Args:
        - input: (N, C, H, W) tensor.
        - kernel: (C, Ky, Kx) tensor with odd spatial extents.
        - bias: optional (C,) tensor.
    """

    if input.ndim != 4 or kernel.ndim != 3:
        raise ShapeError("depthwise_conv2d expects a 4-D input and a 3-D kernel.", details=(input.shape, kernel.shape))
    batch, channels, height, width = input.shape
    kernel_channels, kh, kw = kernel.shape
    if kernel_channels != channels:
        raise ShapeError("depthwise_conv2d channel mismatch between input and kernel.", details=(input.shape, kernel.shape))
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError("depthwise_conv2d kernel extents must be odd.", details=kernel.shape)
    _check_bias(bias, channels)

    out = _depthwise_same(input.data, kernel.data)
    if bias is not None:
        out += bias.data[None, :, None, None]
    _count("depthwise_conv2d", batch * channels * height * width * kh * kw)

    def backward(g: np.ndarray):
        grad_input = None
        if input.requires_grad:
            grad_input = _depthwise_same(g, np.ascontiguousarray(kernel.data[:, ::-1, ::-1]))
        grad_kernel = None
        if kernel.requires_grad:
            grad_kernel = np.einsum("nchw,nchwij->cij", g, _windows(input.data, kh, kw))
        grad_bias = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return grad_input, grad_kernel, grad_bias

    inputs = (input, kernel) if bias is None else (input, kernel, bias)
    return record("depthwise_conv2d", inputs, out, backward)


def pointwise_conv2d(input: Tensor, kernel: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """
    1x1 convolution: a per-pixel linear map across channels.

    Args:
        - input: (N, I, H, W) tensor.
        - kernel: (O, I) tensor.
        - bias: optional (O,) tensor.
    """

    if input.ndim != 4 or kernel.ndim != 2:
        raise ShapeError("pointwise_conv2d expects a 4-D input and a 2-D kernel.", details=(input.shape, kernel.shape))
    batch, channels, height, width = input.shape
    out_channels, kernel_channels = kernel.shape
    if kernel_channels != channels:
        raise ShapeError("pointwise_conv2d channel mismatch between input and kernel.", details=(input.shape, kernel.shape))
    _check_bias(bias, out_channels)

    out = np.ascontiguousarray(
        np.tensordot(kernel.data, input.data, axes=([1], [1])).transpose(1, 0, 2, 3)
    )
    if bias is not None:
        out += bias.data[None, :, None, None]
    _count("pointwise_conv2d", batch * out_channels * channels * height * width)

    def backward(g: np.ndarray):
        grad_input = None
        if input.requires_grad:
            grad_input = np.ascontiguousarray(
                np.tensordot(kernel.data, g, axes=([0], [1])).transpose(1, 0, 2, 3)
            )
        grad_kernel = None
        if kernel.requires_grad:
            grad_kernel = np.tensordot(g, input.data, axes=([0, 2, 3], [0, 2, 3]))
        grad_bias = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return grad_input, grad_kernel, grad_bias

    inputs = (input, kernel) if bias is None else (input, kernel, bias)
    return record("pointwise_conv2d", inputs, out, backward)
