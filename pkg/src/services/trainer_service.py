from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union
import numpy as np
from tqdm import tqdm
from ..augment.policy import augment_for_training
from ..core.seeding import derive_seed
from ..dataset.loader import batch_iterator, collate, load_manifest, prefetch
from ..dataset.sample import VideoSample
from ..engine.ops import cross_entropy
from ..engine.tensor import GradTape, Tensor, gradients, zero_grad
from ..models.dataset_schema import DatasetManifest
from ..models.errors import NonFiniteError, TrainingError
from ..models.metrics_schema import MetricsReport, RunResult
from ..models.train_schema import TrainConfig, TrainOutcome, TrainSummary
from ..nn.segnet import SegNetwork, build, sequence_logits
from ..utils.checkpoint_utils import load_checkpoint, save_checkpoint
from .evaluator_service import check_compatible, evaluate, summarize
from .optimizer import AdamOptimizer, clip_grad_norm, poly_lr

PathLike = Union[str, Path]


def warm_start(net: SegNetwork, checkpoint: PathLike) -> List[str]:
    """
    Copies every backbone.* parameter from a checkpoint; recurrent parameters
    keep their fresh initialization.
    """

    _, arrays = load_checkpoint(checkpoint)
    loaded = net.load_arrays(arrays, prefix="backbone.")
    if not loaded:
        raise TrainingError("Warm-start checkpoint holds no backbone parameters.", details=str(checkpoint))
    return loaded


def train_step(
    net: SegNetwork,
    optimizer: AdamOptimizer,
    frames: List[np.ndarray],
    labels: np.ndarray,
    lr: float,
    clip_norm: float,
) -> Tuple[float, float]:
    """
    One optimization step on a batch: cross-entropy of the final frame only,
    global-norm clipping, then Adam.

    Returns:
        The loss and the gradient norm before clipping.
    """

    inputs = [Tensor(frame, dtype=net.dtype) for frame in frames]
    with GradTape() as tape:
        logits, _ = sequence_logits(net, inputs)
        loss = cross_entropy(logits, labels)
    tape.backward(loss)

    value = loss.item()
    if not np.isfinite(value):
        raise TrainingError("Loss is not finite.", details=value)

    grads, norm = clip_grad_norm(gradients(net.params), clip_norm)
    optimizer.step(grads, lr)
    zero_grad(net.params)
    return value, norm


def _batches(cfg: TrainConfig, manifest: DatasetManifest, root: PathLike, seed: int) -> Iterator[List[VideoSample]]:
    epoch = 0
    while True:
        produced = False
        for batch in batch_iterator(manifest, root, "train", cfg.batch_size, seed, epoch):
            produced = True
            if cfg.augment_enabled:
                batch = [
                    augment_for_training(sample, cfg.augment, derive_seed(seed, epoch, int(sample.sample_id or 0)))
                    for sample in batch
                ]
            yield batch
        if not produced:
            raise TrainingError("The train split is empty.")
        epoch += 1


def train_once(
    cfg: TrainConfig,
    manifest: DatasetManifest,
    root: PathLike,
    checkpoint: PathLike,
    seed: Optional[int] = None,
    quiet: bool = False,
) -> Tuple[SegNetwork, TrainOutcome]:
    """
    Trains one network from scratch (or from a warm-start backbone) and saves it.

    Args:
        - cfg: Training configuration.
        - manifest, root: The dataset.
        - checkpoint: Where the final parameters are written.
        - seed: Overrides cfg.seed; drives initialization, shuffling and augmentation.

    Returns:
        The trained network and a summary of the run.
    """

    seed = cfg.seed if seed is None else seed
    net = build(cfg.network, seed)
    check_compatible(net, manifest)
    warm = warm_start(net, cfg.warm_start) if cfg.warm_start else []

    optimizer = AdamOptimizer(net.params, betas=cfg.betas, eps=cfg.eps)
    losses: List[float] = []
    batches = prefetch(_batches(cfg, manifest, root, seed), cfg.prefetch)
    bar = tqdm(range(cfg.total_iters), desc=f"Train {cfg.network.version}/{cfg.network.unit_design}", disable=quiet)
    try:
        for iteration in bar:
            frames, labels = collate(next(batches))
            lr = poly_lr(iteration, cfg)
            try:
                loss, norm = train_step(net, optimizer, frames, labels, lr, cfg.clip_norm)
            except NonFiniteError as e:
                raise TrainingError(f"Training diverged at iteration {iteration}.", details=str(e)) from e
            losses.append(loss)
            if iteration % cfg.log_every == 0 or iteration == cfg.total_iters - 1:
                bar.set_postfix(loss=f"{loss:.4f}", lr=f"{lr:.2e}", grad_norm=f"{norm:.2f}")
    finally:
        bar.close()
        batches.close()

    meta = {"seed": seed, "iterations": cfg.total_iters, "final_loss": losses[-1]}
    path = save_checkpoint(checkpoint, net, meta)
    if not quiet:
        print(f"💾 Checkpoint: {path} (final loss {losses[-1]:.4f})")
    return net, TrainOutcome(
        seed=seed,
        checkpoint=str(path),
        iterations=cfg.total_iters,
        final_loss=losses[-1],
        losses=losses,
        warm_started=warm,
    )


def run_result(reports: List[MetricsReport]) -> RunResult:
    mean, std = summarize(reports)
    return RunResult(repetitions=len(reports), per_repetition=reports, mean=mean, std=std)


def train(
    cfg: TrainConfig,
    root: PathLike,
    out_dir: PathLike,
    split: str = "val",
    quiet: bool = False,
) -> TrainSummary:
    """
    Trains `cfg.repetitions` networks, scores each on clean `split` data and
    aggregates the scores into a RunResult.
    """

    manifest = load_manifest(root)
    out_dir = Path(out_dir)
    runs: List[TrainOutcome] = []
    reports: List[MetricsReport] = []
    for repetition in range(cfg.repetitions):
        seed = cfg.seed + repetition if cfg.vary_seed else cfg.seed
        if not quiet:
            print(f"🚀 Repetition {repetition + 1}/{cfg.repetitions} (seed {seed})")
        net, outcome = train_once(cfg, manifest, root, out_dir / f"rep{repetition}.ckpt", seed, quiet)
        runs.append(outcome)
        reports.append(evaluate(net, manifest, root, split, seed=seed, quiet=quiet))

    summary = TrainSummary(config=cfg, runs=runs, result=run_result(reports))
    (out_dir / "train_summary.json").write_text(summary.model_dump_json(indent=2, by_alias=True))
    return summary
