import json
from src.analyzer.flops import unit_cost_report
from src.models.cost_schema import UnitCostInputs
from src.models.metrics_schema import MetricsReport, RunResult
from src.utils.report_utils import flatten_run_result, flatten_unit_costs, render_table, write_report


def _metrics(accuracy, miou, mfip=None):
    return MetricsReport(accuracy=accuracy, miou=miou, per_class_iou=[miou], mfip_percent=mfip)


class TestFlatten:
    def test_unit_costs(self):
        rows = flatten_unit_costs(unit_cost_report(UnitCostInputs(I=128, O=128)))
        assert [row["Design"] for row in rows] == ["Standard", "Fast", "Faster"]
        assert rows[0]["FLOPs"] == "2,364,032"
        assert rows[2]["vs Standard"] == "1.88%"

    def test_run_result_without_flicker(self):
        result = RunResult(
            repetitions=2,
            per_repetition=[_metrics(0.5, 0.25), _metrics(0.5, 0.25)],
            mean={"accuracy": 0.5, "mIoU": 0.25},
            std={"accuracy": 0.0, "mIoU": 0.0},
        )
        row = flatten_run_result("base", result)
        assert row["mIoU %"] == "25.00 ± 0.00"
        assert row["mFIP %"] == "-"


class TestRender:
    def test_columns_are_aligned(self):
        table = render_table([{"Name": "a", "Value": "1"}, {"Name": "longer", "Value": "22"}])
        lines = table.splitlines()
        assert len(lines) == 4
        assert len({line.index(cell) for line, cell in zip(lines[2:], ("1", "22"))}) == 1

    def test_empty(self):
        assert render_table([]) == "(empty)"

    def test_reports_use_wire_names(self, tmp_path):
        path = write_report(tmp_path / "nested" / "m.json", _metrics(1.0, 1.0, 0.0))
        assert json.loads(path.read_text())["mIoU"] == 1.0
