from typing import Dict, Optional, Tuple
import numpy as np
from ..engine.conv import pointwise_conv2d
from ..engine.ops import concat_channels
from ..engine.tensor import Tensor
from ..models.errors import ShapeError
from ..models.network_schema import RecurrentUnitSpec
from .cells import CellState, ConvLSTMCell, SepConvLSTMCell, uniform_fan_in


class Pointwise:
    """
    1x1 convolution parameters (kernel (O, I), zero-initialized bias).
    """

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator, dtype: np.dtype):
        self.params: Dict[str, Tensor] = {
            "w": uniform_fan_in(rng, (out_channels, in_channels), in_channels, dtype),
            "b": Tensor(np.zeros((out_channels,), dtype=dtype), requires_grad=True),
        }

    def __call__(self, x: Tensor) -> Tensor:
        return pointwise_conv2d(x, self.params["w"], self.params["b"])


class RecurrentUnit:
    """
    Insertable recurrent block mapping I channels to I channels.

    - standard: a convLSTM with I hidden channels.
    - fast: concat(convLSTM with I/2 hidden channels over x, 1x1 conv I -> I/2 over x).
    - faster: concat(depth-convLSTM over a 1x1 reduction I -> I/2, 1x1 conv I -> I/2 over x).

    The recurrent branch always occupies the first channels of the output.
    """

    def __init__(
        self,
        spec: RecurrentUnitSpec,
        rng: Optional[np.random.Generator] = None,
        dtype: np.dtype = np.float64,
    ):
        rng = rng or np.random.default_rng(0)
        self.spec = spec
        channels, half = spec.in_channels, spec.in_channels // 2
        self.reduce: Optional[Pointwise] = None
        self.bypass: Optional[Pointwise] = None

        if spec.design == "standard":
            self.cell = ConvLSTMCell(channels, channels, spec.kernel, rng, dtype)
        elif spec.design == "fast":
            self.cell = ConvLSTMCell(channels, half, spec.kernel, rng, dtype)
            self.bypass = Pointwise(channels, half, rng, dtype)
        else:
            self.reduce = Pointwise(channels, half, rng, dtype)
            self.cell = SepConvLSTMCell(half, spec.kernel, rng, dtype)
            self.bypass = Pointwise(channels, half, rng, dtype)

    @property
    def state_channels(self) -> int:
        return self.spec.state_channels

    def parameters(self) -> Dict[str, Tensor]:
        params = {f"cell.{name}": tensor for name, tensor in self.cell.params.items()}
        if self.reduce is not None:
            params.update({f"reduce.{name}": tensor for name, tensor in self.reduce.params.items()})
        if self.bypass is not None:
            params.update({f"bypass.{name}": tensor for name, tensor in self.bypass.params.items()})
        return params

    def zero_state(self, batch: int, height: int, width: int) -> CellState:
        return self.cell.zero_state(batch, height, width)

    def forward(self, x: Tensor, state: CellState) -> Tuple[Tensor, CellState]:
        if x.ndim != 4 or x.shape[1] != self.spec.in_channels:
            raise ShapeError("Recurrent unit input has the wrong channel count.", details=(x.shape, self.spec.in_channels))
        if state.channels != self.state_channels:
            raise ShapeError(
                f"State does not belong to a {self.spec.design} unit.",
                details=(state.channels, self.state_channels),
            )

        recurrent_input = self.reduce(x) if self.reduce is not None else x
        h, new_state = self.cell.step(recurrent_input, state)
        if self.bypass is None:
            return h, new_state
        return concat_channels(h, self.bypass(x)), new_state


def recurrent_unit_forward(unit: RecurrentUnit, x: Tensor, state: CellState) -> Tuple[Tensor, CellState]:
    return unit.forward(x, state)
