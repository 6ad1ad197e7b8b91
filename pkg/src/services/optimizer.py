from typing import Dict, Tuple
import numpy as np
from ..engine.tensor import Tensor
from ..models.errors import TrainingError
from ..models.train_schema import TrainConfig


def poly_lr(iteration: int, cfg: TrainConfig) -> float:
    """
    initial_lr * (1 - iteration / total_iters) ** poly_power.
    """

    if iteration < 0 or iteration > cfg.total_iters:
        raise TrainingError(
            f"Iteration {iteration} lies outside [0, {cfg.total_iters}].", details=iteration
        )
    return cfg.initial_lr * (1.0 - iteration / cfg.total_iters) ** cfg.poly_power


def global_norm(grads: Dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads.values())))


def clip_grad_norm(grads: Dict[str, np.ndarray], clip_norm: float) -> Tuple[Dict[str, np.ndarray], float]:
    """
    Rescales all gradients by one factor so that their global L2 norm is at most
    `clip_norm`. Gradients below the threshold are returned unchanged.

    Returns:
        The (possibly rescaled) gradients and the norm before clipping.
    """

    norm = global_norm(grads)
    if norm <= clip_norm:
        return grads, norm
    scale = clip_norm / norm
    return {name: g * scale for name, g in grads.items()}, norm


class AdamOptimizer:
    """
    Adam with bias correction. State is kept per parameter name.
    """

    def __init__(
        self,
        params: Dict[str, Tensor],
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        self.params = params
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.step_count = 0
        self.m = {name: np.zeros_like(p.data) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in params.items()}

    def step(self, grads: Dict[str, np.ndarray], lr: float) -> None:
        self.step_count += 1
        correction1 = 1.0 - self.beta1**self.step_count
        correction2 = 1.0 - self.beta2**self.step_count
        for name, param in self.params.items():
            g = grads.get(name)
            if g is None:
                continue
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            m_hat = self.m[name] / correction1
            v_hat = self.v[name] / correction2
            update = lr * m_hat / (np.sqrt(v_hat) + self.eps)
            param.data = (param.data - update).astype(param.data.dtype, copy=False)
