from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union
import numpy as np
from tqdm import tqdm
from ..analyzer.metrics import ConfusionMatrix, accumulate, metrics_report, mfip
from ..augment.policy import apply_policy
from ..augment.weather import RAIN_PRESETS, rain_preset
from ..core.config import env_settings
from ..core.seeding import derive_seed
from ..dataset.loader import load_entry, load_manifest, split_entries
from ..dataset.sample import VideoSample
from ..engine.tensor import Tensor
from ..models.augment_schema import DisturbancePolicy, RainDisturbance
from ..models.dataset_schema import DatasetManifest
from ..models.errors import DatasetError
from ..models.metrics_schema import FlickerReport, MetricsReport
from ..models.train_schema import EvalCondition, EvalReport, RainSweepReport
from ..nn.segnet import SegNetwork, predict_sequence
from ..utils.checkpoint_utils import restore_network

PathLike = Union[str, Path]

CLEAN = EvalCondition(name="clean")


def rain_condition(level: str, policy: str = "last_frame_only", seed: int = 0) -> EvalCondition:
    return EvalCondition(
        name=f"{level}_rain_{'all' if policy == 'all_frames' else 'last'}",
        disturbance=RainDisturbance(params=rain_preset(level, seed)),
        policy=DisturbancePolicy(mode=policy),
    )


def check_compatible(net: SegNetwork, manifest: DatasetManifest) -> None:
    config = net.config
    if manifest.num_classes != config.num_classes:
        raise DatasetError(
            "Dataset and network class counts differ.", details=(manifest.num_classes, config.num_classes)
        )
    if (manifest.height, manifest.width) != (config.height, config.width):
        raise DatasetError(
            "Dataset and network extents differ.",
            details=((manifest.height, manifest.width), (config.height, config.width)),
        )


def evaluate_sample(
    net: SegNetwork, sample: VideoSample, condition: EvalCondition, seed: int
) -> Tuple[ConfusionMatrix, Optional[FlickerReport]]:
    """
    Runs one sequence (optionally disturbed first) and scores the final frame's
    prediction. The flicker report covers every consecutive frame pair.
    """

    if condition.disturbance is not None:
        sample = apply_policy(sample, condition.policy, condition.disturbance, seed)
    frames = [Tensor(frame[None], dtype=net.dtype) for frame in sample.frames]
    predictions = [prediction[0] for prediction in predict_sequence(net, frames)]
    cm = accumulate(ConfusionMatrix(net.config.num_classes), predictions[-1], sample.label)
    flicker = mfip(predictions) if len(predictions) > 1 else None
    return cm, flicker


def evaluate(
    net: SegNetwork,
    manifest: DatasetManifest,
    root: PathLike,
    split: str = "val",
    condition: EvalCondition = CLEAN,
    seed: int = 0,
    workers: Optional[int] = None,
    quiet: bool = False,
) -> MetricsReport:
    """
    Scores a network on a dataset split under one evaluation condition.

    Args:
        - net: The network to evaluate.
        - manifest, root: The dataset.
        - split: Split name.
        - condition: Optional disturbance and the policy that places it.
        - seed: Base seed; sequence i is disturbed with a seed derived from (seed, i).
        - workers: Threads scoring sequences concurrently, defaults to SEGKIT_EVAL_WORKERS.

    Returns:
        Accuracy and mIoU of the final frames plus mFIP over all sequences.
    """

    check_compatible(net, manifest)
    entries = split_entries(manifest, split)
    if not entries:
        raise DatasetError(f"Split '{split}' is empty.")
    workers = workers or env_settings.EVAL_WORKERS

    def score(index: int) -> Tuple[ConfusionMatrix, Optional[FlickerReport]]:
        sample = load_entry(root, entries[index], manifest)
        return evaluate_sample(net, sample, condition, derive_seed(seed, index))

    indices = range(len(entries))
    bar = tqdm(total=len(entries), desc=f"Eval {condition.name}", disable=quiet, leave=False)
    results: List[Tuple[ConfusionMatrix, Optional[FlickerReport]]] = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map() keeps sequence order, so the summed matrix does not depend on scheduling.
            for result in pool.map(score, indices):
                results.append(result)
                bar.update()
    else:
        for index in indices:
            results.append(score(index))
            bar.update()
    bar.close()

    cm = ConfusionMatrix(net.config.num_classes)
    for partial, _ in results:
        cm = cm + partial
    flicker = [report for _, report in results if report is not None]
    return metrics_report(cm, flicker, sequences=len(results))


def evaluate_checkpoint(
    checkpoint: PathLike,
    root: PathLike,
    split: str = "val",
    condition: EvalCondition = CLEAN,
    seed: int = 0,
    workers: Optional[int] = None,
    quiet: bool = False,
) -> EvalReport:
    net, _ = restore_network(checkpoint)
    manifest = load_manifest(root)
    metrics = evaluate(net, manifest, root, split, condition, seed, workers, quiet)
    return EvalReport(checkpoint=str(checkpoint), split=split, condition=condition, seed=seed, metrics=metrics)


def rain_sweep(
    checkpoint: PathLike,
    root: PathLike,
    split: str = "val",
    policy: str = "last_frame_only",
    seed: int = 0,
    workers: Optional[int] = None,
    quiet: bool = False,
) -> RainSweepReport:
    """
    Evaluates one checkpoint on clean data and under each rain intensity.
    """

    net, _ = restore_network(checkpoint)
    manifest = load_manifest(root)
    metrics: Dict[str, MetricsReport] = {
        "clean": evaluate(net, manifest, root, split, CLEAN, seed, workers, quiet)
    }
    for level in RAIN_PRESETS:
        metrics[level] = evaluate(net, manifest, root, split, rain_condition(level, policy, seed), seed, workers, quiet)
    return RainSweepReport(
        checkpoint=str(checkpoint),
        split=split,
        metrics=metrics,
        miou_course={name: report.miou for name, report in metrics.items()},
    )


def summarize(reports: List[MetricsReport]) -> Tuple[Dict[str, float], Dict[str, float]]:
    """
    Mean and population standard deviation of accuracy, mIoU and mFIP across runs.
    """

    columns: Dict[str, List[float]] = {"accuracy": [], "mIoU": []}
    for report in reports:
        columns["accuracy"].append(report.accuracy)
        columns["mIoU"].append(report.miou)
    if reports and all(report.mfip_percent is not None for report in reports):
        columns["mFIP_percent"] = [report.mfip_percent for report in reports]
    mean = {key: float(np.mean(values)) for key, values in columns.items()}
    std = {key: float(np.std(values)) for key, values in columns.items()}
    return mean, std
