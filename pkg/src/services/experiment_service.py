from pathlib import Path
from typing import Dict, List, Union
from pydantic import ValidationError
from ..dataset.loader import load_manifest
from ..models.errors import ConfigError
from ..models.metrics_schema import MetricsReport
from ..models.network_schema import NetworkConfig
from ..models.train_schema import ComparisonReport, EvalCondition, TrainConfig
from .evaluator_service import CLEAN, evaluate, rain_condition
from .trainer_service import run_result, train_once

PathLike = Union[str, Path]


def comparison_conditions(seed: int) -> List[EvalCondition]:
    return [
        CLEAN.model_copy(update={"name": "sunny"}),
        rain_condition("heavy", "last_frame_only", seed),
        rain_condition("heavy", "all_frames", seed),
    ]


def compare(
    cfg: TrainConfig,
    root: PathLike,
    out_dir: PathLike,
    version: str = "v5",
    design: str = "faster",
    split: str = "val",
    quiet: bool = False,
) -> ComparisonReport:
    """
    Trains the Base network and one recurrent variant `cfg.repetitions` times
    each and scores every run under sunny, heavy-rain-last-frame and
    heavy-rain-all-frames conditions.

    The variant of repetition r warm-starts its backbone from the Base network
    of repetition r, so both share one trained backbone initialization.
    """

    manifest = load_manifest(root)
    out_dir = Path(out_dir)
    conditions = comparison_conditions(cfg.seed)
    base_cfg = cfg.model_copy(update={"network": cfg.network.model_copy(update={"version": "base"})})
    try:
        variant_network = NetworkConfig.model_validate(
            cfg.network.model_dump() | {"version": version, "unit_design": design}
        )
    except ValidationError as e:
        raise ConfigError(f"Cannot build {version}/{design}.", details=e.errors(include_url=False)) from e

    keys = ("base", f"{version}/{design}")
    reports: Dict[str, Dict[str, List[MetricsReport]]] = {
        key: {condition.name: [] for condition in conditions} for key in keys
    }
    for repetition in range(cfg.repetitions):
        seed = cfg.seed + repetition if cfg.vary_seed else cfg.seed
        base_path = out_dir / "base" / f"rep{repetition}.ckpt"
        variant_cfg = cfg.model_copy(update={"network": variant_network, "warm_start": str(base_path)})
        if not quiet:
            print(f"🚀 Repetition {repetition + 1}/{cfg.repetitions} (seed {seed})")

        base_net, _ = train_once(base_cfg, manifest, root, base_path, seed, quiet)
        variant_net, _ = train_once(
            variant_cfg, manifest, root, out_dir / f"{version}_{design}" / f"rep{repetition}.ckpt", seed, quiet
        )
        for key, net in zip(keys, (base_net, variant_net)):
            for condition in conditions:
                reports[key][condition.name].append(evaluate(net, manifest, root, split, condition, seed, quiet=quiet))

    report = ComparisonReport(
        results={
            key: {name: run_result(runs) for name, runs in per_condition.items()}
            for key, per_condition in reports.items()
        },
        conditions=[condition.name for condition in conditions],
        repetitions=cfg.repetitions,
    )
    (out_dir / "comparison.json").write_text(report.model_dump_json(indent=2, by_alias=True))
    return report
