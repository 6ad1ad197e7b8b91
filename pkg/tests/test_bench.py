import pytest
from src.analyzer.flops import unit_flops
from src.models.cost_schema import UnitCostInputs
from src.models.errors import ConfigError
from src.nn.units import RecurrentUnit
from src.services import bench_service
from src.services.bench_service import bench


class TestBench:
    def test_too_few_repeats(self):
        with pytest.raises(ConfigError):
            bench(I=4, O=4, Dx=4, Dy=4, repeats=2, quiet=True)

    def test_unknown_design(self):
        with pytest.raises(ConfigError):
            bench(designs=("standard", "fastest"), I=4, O=4, Dx=4, Dy=4, repeats=3, quiet=True)

    def test_invalid_unit(self):
        with pytest.raises(ConfigError):
            bench(designs=("fast",), I=5, O=5, Dx=4, Dy=4, repeats=3, quiet=True)

    def test_report_contents(self):
        report = bench(I=8, O=8, Dx=8, Dy=8, repeats=5, warmup=0, quiet=True)
        assert report.designs == ["standard", "fast", "faster"]
        assert all(len(values) == 5 for values in report.timings_ms.values())
        assert sorted(report.ordering) == sorted(report.designs)
        assert report.time_ratios["standard"] == 1.0
        inputs = UnitCostInputs(I=8, O=8, Kx=3, Ky=3, Dx=8, Dy=8)
        assert report.formula_flops == {design: unit_flops(design, inputs) for design in report.designs}

    def test_non_square_kernel_is_width_first(self, monkeypatch):
        built = []

        def recording_unit(spec, rng, dtype):
            built.append(spec)
            return RecurrentUnit(spec, rng, dtype)

        monkeypatch.setattr(bench_service, "RecurrentUnit", recording_unit)
        report = bench(designs=("standard",), I=4, O=4, Kx=5, Ky=1, Dx=6, Dy=4, repeats=3, warmup=0, quiet=True)
        assert report.kernel == (5, 1)
        assert built[0].kernel == (5, 1)
        assert report.formula_flops["standard"] == unit_flops("standard", UnitCostInputs(I=4, O=4, Kx=5, Ky=1, Dx=6, Dy=4))

    def test_subset_without_standard_has_no_ratios(self):
        report = bench(designs=("faster",), I=4, O=4, Dx=4, Dy=4, repeats=3, warmup=0, quiet=True)
        assert report.time_ratios == {}
        assert report.ordering == ["faster"]


@pytest.mark.slow
class TestBenchOrdering:
    def test_faster_is_quickest_at_full_width(self):
        report = bench(I=128, O=128, Dx=64, Dy=64, repeats=30, quiet=True)
        assert report.ordering == ["faster", "fast", "standard"]
