from typing import Callable, Sequence
import numpy as np
import pytest
from src.dataset.generator import generate_dataset
from src.engine.ops import mul, sum_all
from src.engine.tensor import GradTape, Tensor
from src.models.network_schema import NetworkConfig

FD_EPS = 1e-5
FD_TOLERANCE = 1e-4


def finite_difference_error(
    build_loss: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    eps: float = FD_EPS,
    max_entries: int = 12,
    seed: int = 0,
) -> float:
    """
    Largest relative error between tape gradients and central differences over
    a random subset of entries of every tensor. All tensors must be float64.
    """

    for tensor in tensors:
        tensor.grad = None
    with GradTape() as tape:
        loss = build_loss()
    tape.backward(loss)
    analytic = [
        tensor.grad.copy() if tensor.grad is not None else np.zeros_like(tensor.data) for tensor in tensors
    ]

    rng = np.random.default_rng(seed)
    worst = 0.0
    for tensor, grad in zip(tensors, analytic):
        flat = tensor.data.reshape(-1)
        assert np.shares_memory(flat, tensor.data)
        picks = rng.choice(flat.size, size=min(max_entries, flat.size), replace=False)
        numeric = np.empty(len(picks))
        for n, index in enumerate(picks):
            original = flat[index]
            flat[index] = original + eps
            plus = build_loss().item()
            flat[index] = original - eps
            minus = build_loss().item()
            flat[index] = original
            numeric[n] = (plus - minus) / (2 * eps)
        exact = grad.reshape(-1)[picks]
        scale = max(np.linalg.norm(exact) + np.linalg.norm(numeric), 1e-12)
        worst = max(worst, float(np.linalg.norm(exact - numeric) / scale))
    return worst


def weighted_sum(out: Tensor, weights: np.ndarray) -> Tensor:
    # Random projection to a scalar, so no gradient entry is trivially symmetric.
    return sum_all(mul(out, Tensor(weights)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def fd_check():
    def check(build_loss, tensors, **kwargs) -> None:
        error = finite_difference_error(build_loss, tensors, **kwargs)
        assert error < FD_TOLERANCE, f"relative gradient error {error:.3e}"

    return check


@pytest.fixture
def tiny_network() -> NetworkConfig:
    return NetworkConfig(
        num_classes=3, base_channels=2, branch_depths=(1, 1, 1), height=16, width=32, precision="float64"
    )


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny_dataset")
    manifest = generate_dataset(
        root, seed=3, n_train=4, n_val=2, num_classes=3, length=2, height=16, width=32, quiet=True
    )
    return root, manifest


@pytest.fixture(scope="session")
def shuffle_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("shuffle_dataset")
    manifest = generate_dataset(
        root, seed=11, n_train=10, n_val=1, num_classes=2, length=2, height=16, width=16, quiet=True
    )
    return root, manifest


@pytest.fixture
def project():
    return weighted_sum
