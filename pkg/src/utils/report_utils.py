from pathlib import Path
from typing import Dict, List, Optional, Union
from pydantic import BaseModel
from ..models.cost_schema import CostReport, UnitCostReport
from ..models.metrics_schema import MetricsReport, RunResult
from ..models.train_schema import BenchReport, ComparisonReport, RainSweepReport


def _pct(value: Optional[float]) -> str:
    return "-" if value is None else f"{100 * value:.2f}"


def flatten_unit_costs(report: UnitCostReport) -> List[Dict]:
    """
    This function flattens a UnitCostReport into one row per unit design.
    """

    flattened_data: List[Dict] = []
    for design in ("standard", "fast", "faster"):
        flattened_data.append(
            {
                "Design": design.title(),
                "FLOPs": f"{getattr(report, design):,}",
                "vs Standard": f"{100 * getattr(report, design) / report.standard:.2f}%",
            }
        )
    return flattened_data


def flatten_cost_report(report: CostReport) -> List[Dict]:
    """
    This function flattens a CostReport into one row per version/design variant.
    """

    flattened_data: List[Dict] = []
    for variant, total in report.variant_totals.items():
        flattened_data.append(
            {
                "Variant": variant,
                "Recurrent FLOPs": f"{report.variant_recurrent[variant]:,}",
                "Total FLOPs": f"{total:,}",
                "Base / Total": f"{report.backbone_flops / total:.4f}",
            }
        )
    return flattened_data


def flatten_metrics(name: str, report: MetricsReport) -> Dict:
    return {
        "Condition": name,
        "Accuracy %": _pct(report.accuracy),
        "mIoU %": _pct(report.miou),
        "mFIP %": "-" if report.mfip_percent is None else f"{report.mfip_percent:.2f}",
        "Sequences": report.sequences,
    }


def flatten_rain_sweep(report: RainSweepReport) -> List[Dict]:
    return [flatten_metrics(name, metrics) for name, metrics in report.metrics.items()]


def _mean_std(result: RunResult, key: str, scale: float = 100.0) -> str:
    if key not in result.mean:
        return "-"
    return f"{scale * result.mean[key]:.2f} ± {scale * result.std[key]:.2f}"


def flatten_run_result(name: str, result: RunResult) -> Dict:
    return {
        "Run": name,
        "R": result.repetitions,
        "Accuracy %": _mean_std(result, "accuracy"),
        "mIoU %": _mean_std(result, "mIoU"),
        "mFIP %": _mean_std(result, "mFIP_percent", scale=1.0),
    }


def flatten_comparison(report: ComparisonReport) -> List[Dict]:
    """
    This function flattens a ComparisonReport into one row per variant and condition.
    """

    flattened_data: List[Dict] = []
    for variant, per_condition in report.results.items():
        for condition in report.conditions:
            row = flatten_run_result(variant, per_condition[condition])
            row["Condition"] = condition
            flattened_data.append(row)
    return flattened_data


def flatten_bench(report: BenchReport) -> List[Dict]:
    flattened_data: List[Dict] = []
    for design in report.ordering:
        flattened_data.append(
            {
                "Design": design.title(),
                "Median ms": f"{report.median_ms[design]:.3f}",
                "vs Standard": f"{report.time_ratios[design]:.3f}" if report.time_ratios else "-",
                "FLOPs/pixel": f"{report.formula_flops[design] // (report.extents[0] * report.extents[1]):,}",
            }
        )
    return flattened_data


def render_table(rows: List[Dict]) -> str:
    """
    Renders flattened rows as a left-aligned text table; columns follow the first row's keys.
    """

    if not rows:
        return "(empty)"
    headers = list(rows[0].keys())
    cells = [[str(row.get(header, "")) for header in headers] for row in rows]
    widths = [max(len(header), *(len(line[i]) for line in cells)) for i, header in enumerate(headers)]
    lines = [
        "  ".join(header.ljust(width) for header, width in zip(headers, widths)),
        "  ".join("-" * width for width in widths),
    ]
    lines += ["  ".join(cell.ljust(width) for cell, width in zip(line, widths)) for line in cells]
    return "\n".join(lines)


def write_report(path: Union[str, Path], report: BaseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2, by_alias=True))
    return path
