from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
from ..engine.conv import conv2d
from ..engine.ops import add, channel_affine, relu, resize_bilinear, resize_to, softmax_channels
from ..engine.tensor import Tensor
from ..models.errors import ShapeError
from ..models.network_schema import HEAD_PLACEMENT, NetworkConfig, ParameterSummary
from .cells import CellState, uniform_fan_in
from .units import Pointwise, RecurrentUnit

# One CellState per placed recurrent unit, keyed by placement id.
NetworkState = Dict[str, CellState]

BRANCHES = (("high", "branch_high"), ("mid", "branch_mid"), ("low", "branch_low"))


class SegNetwork:
    """
    Three-branch cascade segmentation network.

    The full, 1/2 and 1/4 resolution copies of the frame each pass through a
    conv + affine + ReLU stack (deepest on the coarsest input). Two cascade
    fusions upsample the coarser features, project both inputs with 1x1 convs to
    the finer width, sum and apply ReLU. A 1x1 classifier maps to K channels,
    which are resized to the input extents and passed through softmax.

    Recurrent units are inserted at the placements of `config.version`.
    Backbone and recurrent parameters draw from separate seeded streams, so
    every version built with the same seed shares its backbone initialization.
    """

    def __init__(self, config: NetworkConfig, seed: int = 0):
        self.config = config
        self.dtype = np.dtype(config.precision)
        backbone_rng = np.random.default_rng([seed, 0])
        recurrent_rng = np.random.default_rng([seed, 1])

        self.params: Dict[str, Tensor] = {}
        k = config.kernel_size
        for (branch, _), depth, width in zip(BRANCHES, config.branch_depths, config.branch_widths):
            in_channels = 3
            for layer in range(depth):
                prefix = f"backbone.{branch}.conv{layer}"
                self.params[f"{prefix}.w"] = uniform_fan_in(
                    backbone_rng, (width, in_channels, k, k), in_channels * k * k, self.dtype
                )
                self.params[f"{prefix}.b"] = self._constant((width,), 0.0)
                self.params[f"{prefix}.gamma"] = self._constant((width,), 1.0)
                self.params[f"{prefix}.beta"] = self._constant((width,), 0.0)
                in_channels = width

        high, mid, low = config.branch_widths
        self.fusions = {
            "cff_mid": (Pointwise(low, mid, backbone_rng, self.dtype), Pointwise(mid, mid, backbone_rng, self.dtype)),
            "cff_high": (Pointwise(mid, high, backbone_rng, self.dtype), Pointwise(high, high, backbone_rng, self.dtype)),
        }
        for name, (coarse, fine) in self.fusions.items():
            for key, tensor in coarse.params.items():
                self.params[f"backbone.{name}.coarse.{key}"] = tensor
            for key, tensor in fine.params.items():
                self.params[f"backbone.{name}.fine.{key}"] = tensor

        self.classifier = Pointwise(high, config.num_classes, backbone_rng, self.dtype)
        for key, tensor in self.classifier.params.items():
            self.params[f"backbone.classifier.{key}"] = tensor

        self.units: Dict[str, RecurrentUnit] = {}
        for placement in config.placements:
            unit = RecurrentUnit(config.unit_spec(placement), recurrent_rng, self.dtype)
            self.units[placement] = unit
            for key, tensor in unit.parameters().items():
                self.params[f"recurrent.{placement}.{key}"] = tensor

        for name, tensor in self.params.items():
            tensor.name = name

    def _constant(self, shape: Tuple[int, ...], value: float) -> Tensor:
        return Tensor(np.full(shape, value, dtype=self.dtype), requires_grad=True)

    # ---------------------------------Parameters---------------------------------------------
    def backbone_parameters(self) -> Dict[str, Tensor]:
        return {name: p for name, p in self.params.items() if name.startswith("backbone.")}

    def recurrent_parameters(self) -> Dict[str, Tensor]:
        return {name: p for name, p in self.params.items() if name.startswith("recurrent.")}

    def summary(self) -> ParameterSummary:
        per_placement = {
            placement: sum(p.data.size for p in unit.parameters().values())
            for placement, unit in self.units.items()
        }
        backbone = sum(p.data.size for p in self.backbone_parameters().values())
        recurrent = sum(per_placement.values())
        return ParameterSummary(
            total=backbone + recurrent,
            backbone=backbone,
            recurrent=recurrent,
            per_placement=per_placement,
            names=sorted(self.params),
        )

    def load_arrays(self, arrays: Dict[str, np.ndarray], prefix: str = "") -> List[str]:
        """
        Copies arrays into same-named parameters (optionally only those starting
        with `prefix`). Returns the names that were loaded.
        """

        loaded: List[str] = []
        for name, array in arrays.items():
            if not name.startswith(prefix) or name not in self.params:
                continue
            param = self.params[name]
            if param.shape != array.shape:
                raise ShapeError(f"Shape mismatch while loading '{name}'.", details=(param.shape, array.shape))
            param.data = np.array(array, dtype=self.dtype)
            loaded.append(name)
        return loaded

    def zero_state(self, batch: int = 1) -> NetworkState:
        state: NetworkState = {}
        for placement, unit in self.units.items():
            _, height, width = self.config.placement_geometry(placement)
            state[placement] = unit.zero_state(batch, height, width)
        return state

    # ---------------------------------Forward---------------------------------------------
    def _branch(self, branch: str, depth: int, x: Tensor) -> Tensor:
        for layer in range(depth):
            prefix = f"backbone.{branch}.conv{layer}"
            x = conv2d(x, self.params[f"{prefix}.w"], self.params[f"{prefix}.b"])
            x = relu(channel_affine(x, self.params[f"{prefix}.gamma"], self.params[f"{prefix}.beta"]))
        return x

    def _fuse(self, name: str, coarse: Tensor, fine: Tensor) -> Tensor:
        coarse_proj, fine_proj = self.fusions[name]
        return relu(add(coarse_proj(resize_bilinear(coarse, 2)), fine_proj(fine)))

    def _recur(self, placement: str, x: Tensor, state: NetworkState, new_state: NetworkState) -> Tensor:
        unit = self.units.get(placement)
        if unit is None:
            return x
        y, new_state[placement] = unit.forward(x, state[placement])
        return y

    def frame_logits(self, x: Tensor, state: Optional[NetworkState] = None) -> Tuple[Tensor, NetworkState]:
        """
        Runs one frame and returns the pre-softmax class scores with the advanced state.
        """

        expected = (3, self.config.height, self.config.width)
        if x.ndim != 4 or x.shape[1:] != expected:
            raise ShapeError("Frame does not match the configured extents.", details=(x.shape, expected))
        if x.dtype != self.dtype:
            x = Tensor(x.data, dtype=self.dtype)

        state = state if state is not None else self.zero_state(x.shape[0])
        new_state: NetworkState = dict(state)

        inputs = {"high": x}
        inputs["mid"] = resize_bilinear(inputs["high"], 0.5)
        inputs["low"] = resize_bilinear(inputs["mid"], 0.5)

        features: Dict[str, Tensor] = {}
        for (branch, placement), depth in zip(BRANCHES, self.config.branch_depths):
            features[branch] = self._recur(placement, self._branch(branch, depth, inputs[branch]), state, new_state)

        fused = self._fuse("cff_mid", features["low"], features["mid"])
        fused = self._fuse("cff_high", fused, features["high"])
        logits = self._recur(HEAD_PLACEMENT, self.classifier(fused), state, new_state)
        return resize_to(logits, (self.config.height, self.config.width)), new_state


def build(config: NetworkConfig, seed: int = 0) -> SegNetwork:
    return SegNetwork(config, seed)


def forward_frame(net: SegNetwork, x: Tensor, state: Optional[NetworkState] = None) -> Tuple[Tensor, NetworkState]:
    logits, new_state = net.frame_logits(x, state)
    return softmax_channels(logits), new_state


def sequence_logits(
    net: SegNetwork, frames: Sequence[Tensor], state: Optional[NetworkState] = None
) -> Tuple[Tensor, NetworkState]:
    """
    Threads the state through every frame and returns only the final frame's logits.
    """

    if not frames:
        raise ShapeError("A sequence needs at least one frame.")
    state = state if state is not None else net.zero_state(frames[0].shape[0])
    logits = None
    for frame in frames:
        logits, state = net.frame_logits(frame, state)
    return logits, state


def forward_sequence(
    net: SegNetwork, frames: Sequence[Tensor], state: Optional[NetworkState] = None
) -> Tuple[Tensor, NetworkState]:
    logits, state = sequence_logits(net, frames, state)
    return softmax_channels(logits), state


def predict_sequence(net: SegNetwork, frames: Sequence[Tensor]) -> List[np.ndarray]:
    """
    Returns the per-frame argmax label maps (N, H, W) of a sequence, threading state.
    """

    if not frames:
        raise ShapeError("A sequence needs at least one frame.")
    state = net.zero_state(frames[0].shape[0])
    predictions: List[np.ndarray] = []
    for frame in frames:
        logits, state = net.frame_logits(frame, state)
        predictions.append(np.argmax(logits.data, axis=1))
    return predictions
