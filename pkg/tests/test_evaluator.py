import numpy as np
import pytest
from src.analyzer.metrics import mfip
from src.dataset.loader import load_entry
from src.engine.tensor import Tensor
from src.models.errors import DatasetError
from src.nn.segnet import build
from src.services.evaluator_service import (
    CLEAN,
    evaluate,
    evaluate_checkpoint,
    rain_condition,
    rain_sweep,
    summarize,
)
from src.utils.checkpoint_utils import save_checkpoint


@pytest.fixture
def checkpoint(tmp_path, tiny_network):
    return save_checkpoint(tmp_path / "net.ckpt", build(tiny_network.model_copy(update={"version": "v2"}), seed=1))


class TestEvaluate:
    def test_repeated_evaluation_is_identical(self, tiny_dataset, tiny_network):
        root, manifest = tiny_dataset
        net = build(tiny_network)
        condition = rain_condition("heavy", "all_frames", seed=3)
        first = evaluate(net, manifest, root, condition=condition, seed=3, quiet=True)
        again = evaluate(net, manifest, root, condition=condition, seed=3, quiet=True)
        assert first == again
        assert first.sequences == 2

    def test_thread_count_does_not_change_results(self, tiny_dataset, tiny_network):
        root, manifest = tiny_dataset
        net = build(tiny_network.model_copy(update={"version": "v5"}))
        condition = rain_condition("moderate", "last_frame_only")
        single = evaluate(net, manifest, root, condition=condition, workers=1, quiet=True)
        threaded = evaluate(net, manifest, root, condition=condition, workers=2, quiet=True)
        assert single == threaded

    def test_base_flicker_equals_frame_independent_predictions(self, tiny_dataset, tiny_network):
        root, manifest = tiny_dataset
        net = build(tiny_network)
        expected = []
        for entry in manifest.splits["val"]:
            sample = load_entry(root, entry, manifest)
            predictions = [
                np.argmax(net.frame_logits(Tensor(frame[None], dtype=net.dtype))[0].data, axis=1)[0]
                for frame in sample.frames
            ]
            expected.append(mfip(predictions).mfip_percent)
        report = evaluate(net, manifest, root, quiet=True)
        assert report.mfip_percent == pytest.approx(np.mean(expected))

    def test_incompatible_network_is_rejected(self, tiny_dataset, tiny_network):
        root, manifest = tiny_dataset
        with pytest.raises(DatasetError):
            evaluate(build(tiny_network.model_copy(update={"height": 32})), manifest, root, quiet=True)

    def test_empty_or_unknown_split(self, tiny_dataset, tiny_network):
        root, manifest = tiny_dataset
        with pytest.raises(DatasetError):
            evaluate(build(tiny_network), manifest, root, split="test", quiet=True)


class TestCheckpointEvaluation:
    def test_report_carries_the_condition(self, checkpoint, tiny_dataset):
        root, _ = tiny_dataset
        report = evaluate_checkpoint(checkpoint, root, condition=CLEAN, quiet=True)
        assert report.condition.name == "clean"
        assert 0.0 <= report.metrics.accuracy <= 1.0
        assert report.split == "val"

    def test_rain_sweep_covers_every_intensity(self, checkpoint, tiny_dataset):
        root, _ = tiny_dataset
        sweep = rain_sweep(checkpoint, root, quiet=True)
        assert list(sweep.metrics) == ["clean", "light", "moderate", "heavy"]
        assert sweep.miou_course["clean"] == sweep.metrics["clean"].miou

    def test_condition_names(self):
        assert rain_condition("heavy").name == "heavy_rain_last"
        assert rain_condition("light", "all_frames").name == "light_rain_all"


class TestSummarize:
    def test_population_standard_deviation(self, tiny_dataset, tiny_network):
        root, manifest = tiny_dataset
        report = evaluate(build(tiny_network), manifest, root, quiet=True)
        low = report.model_copy(update={"accuracy": 0.2, "miou": 0.1, "mfip_percent": 4.0})
        high = report.model_copy(update={"accuracy": 0.4, "miou": 0.3, "mfip_percent": 8.0})
        mean, std = summarize([low, high])
        assert mean == pytest.approx({"accuracy": 0.3, "mIoU": 0.2, "mFIP_percent": 6.0})
        assert std == pytest.approx({"accuracy": 0.1, "mIoU": 0.1, "mFIP_percent": 2.0})

    def test_missing_flicker_is_left_out(self, tiny_dataset, tiny_network):
        root, manifest = tiny_dataset
        report = evaluate(build(tiny_network), manifest, root, quiet=True).model_copy(update={"mfip_percent": None})
        mean, _ = summarize([report])
        assert set(mean) == {"accuracy", "mIoU"}
