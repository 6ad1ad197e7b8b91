import contextvars
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import numpy as np
from ..core.config import env_settings
from ..models.errors import NonFiniteError, TapeError

# A backward function receives the gradient of the record's output and returns
# one gradient (or None) per recorded input, in input order.
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

# The tape that is currently recording. Context-local, so distinct threads
# (or asyncio tasks) can each record their own tape.
_ACTIVE_TAPE: contextvars.ContextVar[Optional["GradTape"]] = contextvars.ContextVar(
    "active_tape", default=None
)


def default_dtype() -> np.dtype:
    return np.dtype(env_settings.DEFAULT_DTYPE)


class Tensor:
    """
    Dense real array in (batch, channels, height, width) layout with an optional
    gradient. Operations never mutate `data` in place.
    """

    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        dtype: Optional[np.dtype] = None,
        name: Optional[str] = None,
        copy: bool = True,
    ):
        if dtype is None:
            dtype = (
                data.dtype
                if isinstance(data, np.ndarray) and data.dtype.kind == "f"
                else default_dtype()
            )
        self.data: np.ndarray = (
            np.array(data, dtype=dtype) if copy else np.asarray(data, dtype=dtype)
        )
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @classmethod
    def zeros(cls, shape: Tuple[int, ...], dtype: Optional[np.dtype] = None) -> "Tensor":
        return cls(np.zeros(shape, dtype=dtype or default_dtype()), copy=False)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, dtype=self.data.dtype)

    def __add__(self, other: "Tensor") -> "Tensor":
        from .ops import add

        return add(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        from .ops import mul

        return mul(self, other)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, requires_grad={self.requires_grad})"


@dataclass
class TapeRecord:
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class GradTape:
    """
    Ordered record of executed operations. Use as a context manager; every op
    run inside the block whose inputs require gradients is appended in execution
    order, and `backward` replays the records in exact reverse order.
    """

    def __init__(self):
        self.records: List[TapeRecord] = []
        self._consumed = False
        self._tokens: List[contextvars.Token] = []

    def __enter__(self) -> "GradTape":
        self._tokens.append(_ACTIVE_TAPE.set(self))
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE_TAPE.reset(self._tokens.pop())

    def append(self, record: TapeRecord) -> None:
        if self._consumed:
            raise TapeError("Cannot record on a tape that was already replayed, call reset() first.")
        self.records.append(record)

    def ops(self) -> List[str]:
        return [record.op for record in self.records]

    def reset(self) -> None:
        self.records = []
        self._consumed = False

    def backward(self, loss: Tensor) -> None:
        """
        Accumulates d(loss)/d(t) into `t.grad` for every leaf tensor `t` on the
        tape that requires gradients.

        Args:
            - loss: A scalar tensor produced by ops recorded on this tape.

        Raises:
            TapeError: non-scalar loss, empty tape, or a second call without reset().
        """

        if self._consumed:
            raise TapeError("backward() was already called on this tape, call reset() first.")
        if loss.data.size != 1:
            raise TapeError("Loss must be a scalar tensor.", details=loss.shape)
        if not self.records:
            raise TapeError("The tape is empty, nothing to differentiate.")

        self._consumed = True
        produced = {id(record.output) for record in self.records}
        leaves: Dict[int, Tensor] = {}
        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}

        for record in reversed(self.records):
            grad_output = grads.pop(id(record.output), None)
            if grad_output is None:
                continue

            input_grads = record.backward(grad_output)
            for tensor, grad in zip(record.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                # Fan-out: the same tensor feeds several ops.
                grads[key] = grads[key] + grad if key in grads else grad
                if key not in produced:
                    leaves[key] = tensor

        for key, tensor in leaves.items():
            tensor.grad = grads[key]


def active_tape() -> Optional[GradTape]:
    return _ACTIVE_TAPE.get()


def check_finite(array: np.ndarray, op: str) -> None:
    if env_settings.CHECK_FINITE and not np.all(np.isfinite(array)):
        raise NonFiniteError(f"Non-finite value produced by '{op}'.", details=array.shape)


def record(
    op: str, inputs: Sequence[Tensor], output: np.ndarray, backward: BackwardFn
) -> Tensor:
    """
    Wraps an op's output array in a Tensor and appends the op to the active tape
    when any of its inputs requires gradients.
    """

    check_finite(output, op)
    requires_grad = any(tensor.requires_grad for tensor in inputs)
    result = Tensor(output, requires_grad=requires_grad, dtype=output.dtype, copy=False)

    tape = _ACTIVE_TAPE.get()
    if tape is not None and requires_grad:
        tape.append(TapeRecord(op, tuple(inputs), result, backward))

    return result


def zero_grad(params: Dict[str, Tensor]) -> None:
    for param in params.values():
        param.grad = None


def gradients(params: Dict[str, Tensor]) -> Dict[str, np.ndarray]:
    """
    Returns the gradient of every named parameter, zeros where no gradient
    reached the parameter.
    """

    return {
        name: param.grad if param.grad is not None else np.zeros_like(param.data)
        for name, param in params.items()
    }
