import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar
from pydantic import BaseModel, TypeAdapter, ValidationError
from ..analyzer.flops import DESIGNS, network_cost_report, unit_cost_report
from ..augment.weather import RAIN_PRESETS, rain_preset
from ..core.config import env_settings
from ..dataset.generator import generate_dataset
from ..models.augment_schema import Disturbance, DisturbancePolicy, RainDisturbance
from ..models.cost_schema import UnitCostInputs
from ..models.errors import ConfigError, SegKitError
from ..models.network_schema import NetworkConfig, VERSION_PLACEMENTS
from ..models.train_schema import EvalCondition, TrainConfig
from ..services.bench_service import bench
from ..services.evaluator_service import CLEAN, evaluate_checkpoint, rain_sweep
from ..services.experiment_service import compare
from ..services.perturb_service import perturb_dataset
from ..services.trainer_service import train
from ..utils.report_utils import (
    flatten_bench,
    flatten_comparison,
    flatten_cost_report,
    flatten_metrics,
    flatten_rain_sweep,
    flatten_run_result,
    flatten_unit_costs,
    render_table,
    write_report,
)

M = TypeVar("M", bound=BaseModel)

POLICIES = ("last_frame_only", "all_frames", "random_subset")


# ---------------------------------Config loading---------------------------------------------
def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        elif value is not None:
            merged[key] = value
    return merged


def load_config(model: Type[M], path: Optional[str], overrides: Optional[Dict[str, Any]] = None) -> M:
    """
    Builds a config from an optional JSON file plus flag overrides (None values
    are ignored). Any failure surfaces as ConfigError before outputs are written.
    """

    data: Dict[str, Any] = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError as e:
            raise ConfigError("Config file not found.", details=path) from e
        except json.JSONDecodeError as e:
            raise ConfigError("Config file is not valid JSON.", details=f"{path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("Config file must hold a JSON object.", details=path)
    try:
        return model.model_validate(_merge(data, overrides or {}))
    except ValidationError as e:
        raise ConfigError(f"Invalid {model.__name__}.", details=e.errors(include_url=False)) from e


def _disturbance(args: argparse.Namespace) -> Optional[Disturbance]:
    if getattr(args, "disturbance", None):
        try:
            return TypeAdapter(Disturbance).validate_json(Path(args.disturbance).read_text())
        except FileNotFoundError as e:
            raise ConfigError("Disturbance file not found.", details=args.disturbance) from e
        except ValidationError as e:
            raise ConfigError("Invalid disturbance.", details=e.errors(include_url=False)) from e
    if getattr(args, "rain", None):
        return RainDisturbance(params=rain_preset(args.rain, args.seed))
    return None


def _out(args: argparse.Namespace, command: str) -> Path:
    return Path(args.out) if args.out else Path(env_settings.OUTPUT_DIR) / command


def _echo(args: argparse.Namespace, title: str, rows: List[Dict]) -> None:
    if not args.quiet:
        print(f"\n📊 {title}\n{render_table(rows)}")


# ---------------------------------Subcommands---------------------------------------------
def run_generate_data(args: argparse.Namespace) -> int:
    manifest = generate_dataset(
        _out(args, "data"),
        seed=args.seed,
        n_train=args.n_train,
        n_val=args.n_val,
        num_classes=args.classes,
        length=args.length,
        height=args.height,
        width=args.width,
        quiet=args.quiet,
    )
    _echo(args, "Dataset", [{"Split": name, "Sequences": size} for name, size in manifest.split_sizes.items()])
    return 0


def _train_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "network": {"version": args.version, "unit_design": args.design},
        "total_iters": args.iters,
        "initial_lr": args.lr,
        "batch_size": args.batch_size,
        "seed": args.seed,
        "repetitions": args.repetitions,
        "warm_start": args.warm_start,
        "prefetch": args.prefetch,
        "augment_enabled": False if args.no_augment else None,
    }


def run_train(args: argparse.Namespace) -> int:
    cfg = load_config(TrainConfig, args.config, _train_overrides(args))
    out = _out(args, "train")
    summary = train(cfg, args.data, out, quiet=args.quiet)
    _echo(args, "Training", [flatten_run_result(f"{cfg.network.version}/{cfg.network.unit_design}", summary.result)])
    if not args.quiet:
        print(f"📁 Summary: {out / 'train_summary.json'}")
    return 0


def run_eval(args: argparse.Namespace) -> int:
    out = _out(args, "eval")
    if args.rain_sweep:
        report = rain_sweep(args.checkpoint, args.data, args.split, args.policy, args.seed, args.workers, args.quiet)
        write_report(out / "rain_sweep.json", report)
        _echo(args, "Rain sweep", flatten_rain_sweep(report))
        return 0

    disturbance = _disturbance(args)
    condition = CLEAN
    if disturbance is not None:
        condition = EvalCondition(
            name=f"{args.rain or disturbance.kind}_{args.policy}",
            disturbance=disturbance,
            policy=DisturbancePolicy(mode=args.policy),
        )
    report = evaluate_checkpoint(args.checkpoint, args.data, args.split, condition, args.seed, args.workers, args.quiet)
    write_report(out / f"eval_{condition.name}.json", report)
    _echo(args, "Evaluation", [flatten_metrics(condition.name, report.metrics)])
    return 0


def run_perturb(args: argparse.Namespace) -> int:
    disturbance = _disturbance(args)
    if disturbance is None:
        raise ConfigError("perturb needs --rain or --disturbance.")
    perturb_dataset(
        args.data,
        _out(args, "perturbed"),
        disturbance,
        DisturbancePolicy(mode=args.policy),
        args.seed,
        args.splits,
        args.quiet,
    )
    return 0


def run_flops(args: argparse.Namespace) -> int:
    out = _out(args, "flops")
    if args.config or args.version:
        config = load_config(NetworkConfig, args.config, {"version": args.version, "unit_design": args.design})
        report = network_cost_report(config)
        write_report(out / "network_flops.json", report)
        _echo(args, f"Network FLOPs ({config.version}/{config.unit_design})", flatten_cost_report(report))
        return 0

    try:
        inputs = UnitCostInputs(I=args.I, O=args.O, Kx=args.K, Ky=args.K, Dx=args.D, Dy=args.D)
    except ValidationError as e:
        raise ConfigError("Invalid cost inputs.", details=e.errors(include_url=False)) from e
    report = unit_cost_report(inputs)
    write_report(out / "unit_flops.json", report)
    _echo(args, "Unit FLOPs", flatten_unit_costs(report))
    if not args.quiet:
        for name, value in report.percent.items():
            print(f"   {name}: {value}")
    return 0


def run_bench(args: argparse.Namespace) -> int:
    report = bench(
        args.designs,
        I=args.I,
        O=args.O,
        Kx=args.K,
        Ky=args.K,
        Dx=args.D,
        Dy=args.D,
        repeats=args.repeats,
        warmup=args.warmup,
        seed=args.seed,
        quiet=args.quiet,
    )
    write_report(_out(args, "bench") / "bench.json", report)
    _echo(args, "Benchmark", flatten_bench(report))
    return 0


def run_compare(args: argparse.Namespace) -> int:
    cfg = load_config(TrainConfig, args.config, _train_overrides(args) | {"network": {}})
    report = compare(cfg, args.data, _out(args, "compare"), args.version or "v5", args.design or "faster", quiet=args.quiet)
    _echo(args, "Comparison", flatten_comparison(report))
    return 0


# ---------------------------------Parser---------------------------------------------
def _train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TrainConfig JSON file.")
    parser.add_argument("--data", required=True, help="Dataset root.")
    parser.add_argument("--version", choices=list(VERSION_PLACEMENTS))
    parser.add_argument("--design", choices=DESIGNS)
    parser.add_argument("--iters", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--repetitions", type=int)
    parser.add_argument("--warm-start", help="Checkpoint whose backbone initializes the network.")
    parser.add_argument("--prefetch", type=int)
    parser.add_argument("--no-augment", action="store_true")


def _unit_flags(parser: argparse.ArgumentParser, D: int) -> None:
    parser.add_argument("--I", type=int, default=128, help="Input channels.")
    parser.add_argument("--O", type=int, default=128, help="Output channels.")
    parser.add_argument("--K", type=int, default=3, help="Kernel extent (square).")
    parser.add_argument("--D", type=int, default=D, help="Feature-map extent (square).")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="Output directory (defaults under SEGKIT_OUTPUT_DIR).")
    common.add_argument("--quiet", action="store_true", help="Disable progress bars and tables.")

    parser = argparse.ArgumentParser(prog="videoseg-lab", description="Recurrent video segmentation toolkit.")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate-data", parents=[common], help="Generate the synthetic video dataset.")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--n-train", type=int, default=200)
    gen.add_argument("--n-val", type=int, default=50)
    gen.add_argument("--classes", type=int, default=8)
    gen.add_argument("--length", type=int, default=4)
    gen.add_argument("--height", type=int, default=64)
    gen.add_argument("--width", type=int, default=128)
    gen.set_defaults(handler=run_generate_data)

    trn = commands.add_parser("train", parents=[common], help="Train R repetitions and score them.")
    _train_flags(trn)
    trn.set_defaults(handler=run_train)

    evl = commands.add_parser("eval", parents=[common], help="Evaluate a checkpoint.")
    evl.add_argument("--checkpoint", required=True)
    evl.add_argument("--data", required=True)
    evl.add_argument("--split", default="val")
    evl.add_argument("--rain", choices=list(RAIN_PRESETS))
    evl.add_argument("--disturbance", help="Disturbance JSON file.")
    evl.add_argument("--policy", choices=POLICIES, default="last_frame_only")
    evl.add_argument("--rain-sweep", action="store_true", help="Clean plus every rain intensity.")
    evl.add_argument("--seed", type=int, default=0)
    evl.add_argument("--workers", type=int)
    evl.set_defaults(handler=run_eval)

    per = commands.add_parser("perturb", parents=[common], help="Write a disturbed copy of a dataset.")
    per.add_argument("--data", required=True)
    per.add_argument("--rain", choices=list(RAIN_PRESETS))
    per.add_argument("--disturbance", help="Disturbance JSON file.")
    per.add_argument("--policy", choices=POLICIES, default="last_frame_only")
    per.add_argument("--seed", type=int, default=0)
    per.add_argument("--splits", nargs="+")
    per.set_defaults(handler=run_perturb)

    flp = commands.add_parser("flops", parents=[common], help="Analytic unit or network FLOPs.")
    _unit_flags(flp, D=1)
    flp.add_argument("--config", help="NetworkConfig JSON file, reports the whole network.")
    flp.add_argument("--version", choices=list(VERSION_PLACEMENTS))
    flp.add_argument("--design", choices=DESIGNS)
    flp.set_defaults(handler=run_flops)

    bch = commands.add_parser("bench", parents=[common], help="Time one forward step per unit design.")
    _unit_flags(bch, D=64)
    bch.add_argument("--designs", nargs="+", choices=DESIGNS, default=list(DESIGNS))
    bch.add_argument("--repeats", type=int, default=30)
    bch.add_argument("--warmup", type=int, default=2)
    bch.add_argument("--seed", type=int, default=0)
    bch.set_defaults(handler=run_bench)

    cmp_ = commands.add_parser("compare", parents=[common], help="Base versus a recurrent variant, R runs each.")
    _train_flags(cmp_)
    cmp_.set_defaults(handler=run_compare)

    return parser


def cli(argv: Optional[List[str]] = None) -> int:
    """
    Parses `argv`, runs the subcommand and returns the process exit code.
    """

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits on --help (0) and on usage errors (2).
        return int(e.code or 0)

    try:
        return args.handler(args)
    except SegKitError as error:
        print(f"❌ {error}", file=sys.stderr)
        return error.exit_code
    except Exception as error:
        print(f"An unhandled error occurred: {str(error)}", file=sys.stderr)
        return 2
