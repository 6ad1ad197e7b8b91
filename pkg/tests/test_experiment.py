import json
from pathlib import Path
import numpy as np
import pytest
from src.augment.weather import rain_preset
from src.cli.commands import load_config
from src.dataset.anymap import read_pgm, read_ppm
from src.dataset.generator import generate_dataset
from src.dataset.loader import load_manifest
from src.models.augment_schema import DisturbancePolicy, GaussianNoise, RainDisturbance
from src.models.errors import ConfigError, DatasetError
from src.models.train_schema import TrainConfig
from src.services.experiment_service import compare
from src.services.perturb_service import SIDECAR_NAME, perturb_dataset

DESK_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "desk_compare.json"


class TestPerturbDataset:
    def test_last_frame_only_copy(self, tiny_dataset, tmp_path):
        root, manifest = tiny_dataset
        out = tmp_path / "rainy"
        disturbance = RainDisturbance(params=rain_preset("heavy", seed=2))
        perturb_dataset(root, out, disturbance, DisturbancePolicy(), seed=1, quiet=True)

        assert load_manifest(out) == manifest
        for entry in manifest.splits["train"]:
            np.testing.assert_array_equal(read_ppm(out / entry.frames[0]), read_ppm(root / entry.frames[0]))
            assert not np.array_equal(read_ppm(out / entry.frames[-1]), read_ppm(root / entry.frames[-1]))
            np.testing.assert_array_equal(read_pgm(out / entry.label), read_pgm(root / entry.label))

        sidecar = json.loads((out / SIDECAR_NAME).read_text())
        assert sidecar["disturbance"]["kind"] == "rain"
        assert sidecar["splits"] == ["train", "val"]

    def test_selected_splits_only(self, tiny_dataset, tmp_path):
        root, _ = tiny_dataset
        out = tmp_path / "noisy"
        perturb_dataset(root, out, GaussianNoise(), DisturbancePolicy(mode="all_frames"), splits=["val"], quiet=True)
        assert set(load_manifest(out).splits) == {"val"}
        assert not (out / "train").exists()

    def test_same_seed_is_reproducible(self, tiny_dataset, tmp_path):
        root, manifest = tiny_dataset
        for name in ("a", "b"):
            perturb_dataset(root, tmp_path / name, GaussianNoise(), DisturbancePolicy(), seed=3, quiet=True)
        frame = manifest.splits["val"][0].frames[-1]
        assert (tmp_path / "a" / frame).read_bytes() == (tmp_path / "b" / frame).read_bytes()

    def test_refuses_in_place(self, tiny_dataset):
        root, _ = tiny_dataset
        with pytest.raises(DatasetError):
            perturb_dataset(root, root, GaussianNoise(), DisturbancePolicy(), quiet=True)


class TestCompare:
    def test_structure(self, tiny_dataset, tiny_network, tmp_path):
        root, _ = tiny_dataset
        cfg = TrainConfig(network=tiny_network, initial_lr=1e-3, total_iters=1, repetitions=1)
        report = compare(cfg, root, tmp_path, version="v5", design="standard", quiet=True)
        assert set(report.results) == {"base", "v5/standard"}
        assert report.conditions == ["sunny", "heavy_rain_last", "heavy_rain_all"]
        assert report.results["base"]["sunny"].repetitions == 1
        assert (tmp_path / "base" / "rep0.ckpt").is_file()
        assert (tmp_path / "v5_standard" / "rep0.ckpt").is_file()
        written = json.loads((tmp_path / "comparison.json").read_text())
        assert "mIoU" in written["results"]["v5/standard"]["sunny"]["mean"]

    def test_unbuildable_variant(self, tiny_dataset, tiny_network, tmp_path):
        root, _ = tiny_dataset
        cfg = TrainConfig(network=tiny_network, total_iters=1, repetitions=1)
        with pytest.raises(ConfigError):
            compare(cfg, root, tmp_path, version="v2", design="fast", quiet=True)
        assert not (tmp_path / "comparison.json").exists()


@pytest.mark.slow
class TestDeskScaleTrends:
    @pytest.fixture(scope="class")
    def comparison(self, tmp_path_factory):
        root = tmp_path_factory.mktemp("desk_data")
        generate_dataset(root, seed=0, quiet=True)
        cfg = load_config(TrainConfig, str(DESK_CONFIG))
        return compare(cfg, root, tmp_path_factory.mktemp("desk_compare"), version="v5", design="faster", quiet=True)

    def test_recurrent_network_is_more_robust_to_last_frame_rain(self, comparison):
        base, variant = comparison.results["base"], comparison.results["v5/faster"]
        assert variant["heavy_rain_last"].mean["mIoU"] - base["heavy_rain_last"].mean["mIoU"] >= 0.05
        assert abs(variant["sunny"].mean["mIoU"] - base["sunny"].mean["mIoU"]) <= 0.05

    def test_recurrent_network_flickers_less_in_rain(self, comparison):
        base, variant = comparison.results["base"], comparison.results["v5/faster"]
        assert variant["heavy_rain_all"].mean["mFIP_percent"] <= 0.5 * base["heavy_rain_all"].mean["mFIP_percent"]
