from dataclasses import dataclass
from typing import Dict, Optional, Tuple
import numpy as np
from ..engine.conv import conv2d, depthwise_conv2d
from ..engine.ops import add, channel_mul, mul, sigmoid, slice_channels, tanh
from ..engine.tensor import Tensor
from ..models.errors import ShapeError

GATES = ("i", "f", "c", "o")


@dataclass(frozen=True)
class CellState:
    h: Tensor  # hidden map
    c: Tensor  # cell memory map

    def __post_init__(self):
        if self.h.shape != self.c.shape:
            raise ShapeError("Hidden and cell maps must share a shape.", details=(self.h.shape, self.c.shape))

    @property
    def channels(self) -> int:
        return self.h.shape[1]

    @classmethod
    def zeros(cls, batch: int, channels: int, height: int, width: int, dtype: np.dtype) -> "CellState":
        shape = (batch, channels, height, width)
        return cls(Tensor.zeros(shape, dtype), Tensor.zeros(shape, dtype))


def uniform_fan_in(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int, dtype: np.dtype) -> Tensor:
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape).astype(dtype), requires_grad=True)


def _gate_bias(gate: str, channels: int, dtype: np.dtype) -> Tensor:
    # Forget gate starts open.
    value = 1.0 if gate == "f" else 0.0
    return Tensor(np.full((channels,), value, dtype=dtype), requires_grad=True)


def _peepholes(channels: int, dtype: np.dtype) -> Dict[str, Tensor]:
    return {
        f"p_{gate}": Tensor(np.zeros((channels,), dtype=dtype), requires_grad=True)
        for gate in ("i", "f", "o")
    }


def _lstm_update(
    z: Dict[str, Tensor], state: CellState, params: Dict[str, Tensor]
) -> Tuple[Tensor, CellState]:
    # Peephole convLSTM: input/forget gates read c, the output gate reads c'.
    c = state.c
    i = sigmoid(add(z["i"], channel_mul(c, params["p_i"])))
    f = sigmoid(add(z["f"], channel_mul(c, params["p_f"])))
    c_next = add(mul(f, c), mul(i, tanh(z["c"])))
    o = sigmoid(add(z["o"], channel_mul(c_next, params["p_o"])))
    h_next = mul(o, tanh(c_next))
    return h_next, CellState(h_next, c_next)


def _check_state(x: Tensor, state: CellState, hidden: int) -> None:
    if x.ndim != 4:
        raise ShapeError("Cell input must be (batch, channels, height, width).", details=x.shape)
    if state.h.shape[0] != x.shape[0] or state.h.shape[2:] != x.shape[2:]:
        raise ShapeError("Input and state extents differ.", details=(x.shape, state.h.shape))
    if state.channels != hidden:
        raise ShapeError("State channels do not match the cell's hidden size.", details=(state.channels, hidden))


class ConvLSTMCell:
    """
    Peephole convLSTM. The four gate convolutions over x and the four over h are
    each fused into one conv with 4 * hidden output channels; the MAC count is
    identical to eight separate convolutions.
    """

    def __init__(
        self,
        in_channels: int,
        hidden_channels: int,
        kernel: Tuple[int, int] = (3, 3),
        rng: Optional[np.random.Generator] = None,
        dtype: np.dtype = np.float64,
    ):
        rng = rng or np.random.default_rng(0)
        kx, ky = kernel  # (width, height) extents
        self.in_channels = in_channels
        self.hidden_channels = hidden_channels
        self.kernel = kernel
        self.params: Dict[str, Tensor] = {
            "w_x": uniform_fan_in(rng, (4 * hidden_channels, in_channels, ky, kx), in_channels * kx * ky, dtype),
            "w_h": uniform_fan_in(rng, (4 * hidden_channels, hidden_channels, ky, kx), hidden_channels * kx * ky, dtype),
            "b": Tensor(
                np.concatenate([np.full(hidden_channels, 1.0 if gate == "f" else 0.0) for gate in GATES]),
                requires_grad=True,
                dtype=dtype,
            ),
            **_peepholes(hidden_channels, dtype),
        }

    def zero_state(self, batch: int, height: int, width: int) -> CellState:
        return CellState.zeros(batch, self.hidden_channels, height, width, self.params["w_x"].dtype)

    def step(self, x: Tensor, state: CellState) -> Tuple[Tensor, CellState]:
        if x.ndim == 4 and x.shape[1] != self.in_channels:
            raise ShapeError("Input channels do not match the cell.", details=(x.shape, self.in_channels))
        _check_state(x, state, self.hidden_channels)

        hidden = self.hidden_channels
        stacked = add(conv2d(x, self.params["w_x"], self.params["b"]), conv2d(state.h, self.params["w_h"]))
        z = {
            gate: slice_channels(stacked, k * hidden, (k + 1) * hidden)
            for k, gate in enumerate(GATES)
        }
        return _lstm_update(z, state, self.params)


class SepConvLSTMCell:
    """
    Depth-convLSTM: every gate convolution, on x and on h, is depthwise, so the
    cell never mixes channels and needs equal input and hidden widths.
    """

    def __init__(
        self,
        channels: int,
        kernel: Tuple[int, int] = (3, 3),
        rng: Optional[np.random.Generator] = None,
        dtype: np.dtype = np.float64,
    ):
        rng = rng or np.random.default_rng(0)
        kx, ky = kernel  # (width, height) extents
        self.in_channels = channels
        self.hidden_channels = channels
        self.kernel = kernel
        self.params: Dict[str, Tensor] = {}
        for gate in GATES:
            self.params[f"wx_{gate}"] = uniform_fan_in(rng, (channels, ky, kx), kx * ky, dtype)
            self.params[f"wh_{gate}"] = uniform_fan_in(rng, (channels, ky, kx), kx * ky, dtype)
            self.params[f"b_{gate}"] = _gate_bias(gate, channels, dtype)
        self.params.update(_peepholes(channels, dtype))

    def zero_state(self, batch: int, height: int, width: int) -> CellState:
        return CellState.zeros(batch, self.hidden_channels, height, width, self.params["wx_i"].dtype)

    def step(self, x: Tensor, state: CellState) -> Tuple[Tensor, CellState]:
        if x.ndim == 4 and x.shape[1] != self.in_channels:
            raise ShapeError("Depth-convLSTM needs input channels equal to hidden channels.", details=(x.shape, self.in_channels))
        _check_state(x, state, self.hidden_channels)

        z = {
            gate: add(
                depthwise_conv2d(x, self.params[f"wx_{gate}"], self.params[f"b_{gate}"]),
                depthwise_conv2d(state.h, self.params[f"wh_{gate}"]),
            )
            for gate in GATES
        }
        return _lstm_update(z, state, self.params)


def convlstm_step(x: Tensor, state: CellState, cell: ConvLSTMCell) -> Tuple[Tensor, CellState]:
    return cell.step(x, state)


def sep_convlstm_step(x: Tensor, state: CellState, cell: SepConvLSTMCell) -> Tuple[Tensor, CellState]:
    return cell.step(x, state)
