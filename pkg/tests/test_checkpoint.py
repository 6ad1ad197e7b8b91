import json
import numpy as np
import pytest
from src.models.checkpoint_schema import CHECKPOINT_FORMAT
from src.models.errors import CheckpointError
from src.nn.segnet import build
from src.utils.checkpoint_utils import load_checkpoint, restore_network, save_checkpoint


@pytest.fixture
def saved(tmp_path, tiny_network):
    net = build(tiny_network.model_copy(update={"version": "v2"}), seed=4)
    path = save_checkpoint(tmp_path / "net.ckpt", net, meta={"seed": 4})
    return net, path


class TestCheckpointFormat:
    def test_header_line(self, saved):
        net, path = saved
        header_line = path.read_bytes().split(b"\n", 1)[0]
        header = json.loads(header_line)
        assert header["format"] == CHECKPOINT_FORMAT
        assert header["dtype"] == "<f4"
        assert header["config_hash"] == net.config.config_hash()
        names = [entry["name"] for entry in header["parameters"]]
        assert names == sorted(net.params)
        assert header["meta"] == {"seed": 4}

    def test_payload_is_float32_in_name_order(self, saved):
        net, path = saved
        payload = path.read_bytes().split(b"\n", 1)[1]
        assert len(payload) == 4 * sum(param.data.size for param in net.params.values())
        first = sorted(net.params)[0]
        size = net.params[first].data.size
        np.testing.assert_array_equal(
            np.frombuffer(payload[: 4 * size], dtype="<f4"), net.params[first].data.astype("<f4").reshape(-1)
        )

    def test_round_trip(self, saved):
        net, path = saved
        header, arrays = load_checkpoint(path)
        assert header.network == net.config
        for name, param in net.params.items():
            assert arrays[name].dtype == np.float32
            np.testing.assert_array_equal(arrays[name], param.data.astype(np.float32))

    def test_restore_rebuilds_the_network(self, saved):
        net, path = saved
        restored, _ = restore_network(path, expected=net.config)
        for name, param in net.params.items():
            np.testing.assert_allclose(restored.params[name].data, param.data, rtol=1e-6, atol=1e-7)


class TestCheckpointErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "none.ckpt")

    def test_tampered_hash(self, saved):
        _, path = saved
        header_line, payload = path.read_bytes().split(b"\n", 1)
        header = json.loads(header_line)
        header["config_hash"] = "0" * 64
        path.write_bytes(json.dumps(header).encode() + b"\n" + payload)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_edited_network_config(self, saved):
        _, path = saved
        header_line, payload = path.read_bytes().split(b"\n", 1)
        header = json.loads(header_line)
        header["network"]["num_classes"] = 5
        path.write_bytes(json.dumps(header).encode() + b"\n" + payload)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_truncated_payload(self, saved):
        _, path = saved
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_unterminated_header(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b'{"format": "segkit-checkpoint"')
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"not json\n")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_restore_with_a_different_expected_config(self, saved, tiny_network):
        _, path = saved
        with pytest.raises(CheckpointError):
            restore_network(path, expected=tiny_network)
