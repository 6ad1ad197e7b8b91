from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union
import numpy as np
from pydantic import ValidationError
from ..models.checkpoint_schema import CheckpointHeader, ParameterEntry
from ..models.errors import CheckpointError
from ..models.network_schema import NetworkConfig
from ..nn.segnet import SegNetwork, build

PathLike = Union[str, Path]

PAYLOAD_DTYPE = np.dtype("<f4")


def save_checkpoint(path: PathLike, net: SegNetwork, meta: Optional[Dict[str, Any]] = None) -> Path:
    """
    Writes a checkpoint: one JSON header line (network config, its hash and the
    parameter table) followed by every parameter as little-endian float32, ordered
    by name.
    """

    path = Path(path)
    entries = []
    chunks = []
    offset = 0
    for name in sorted(net.params):
        data = np.ascontiguousarray(net.params[name].data, dtype=PAYLOAD_DTYPE)
        entries.append(ParameterEntry(name=name, shape=data.shape, offset=offset, count=data.size))
        chunks.append(data.tobytes())
        offset += data.nbytes

    header = CheckpointHeader(
        network=net.config,
        config_hash=net.config.config_hash(),
        parameters=entries,
        payload_bytes=offset,
        meta=meta or {},
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header.model_dump_json().encode() + b"\n" + b"".join(chunks))
    return path


def load_checkpoint(path: PathLike) -> Tuple[CheckpointHeader, Dict[str, np.ndarray]]:
    """
    Reads a checkpoint into its header and a name -> float32 array mapping.

    Raises:
        CheckpointError: missing file, malformed header, hash mismatch or truncated payload.
    """

    path = Path(path)
    if not path.is_file():
        raise CheckpointError("Checkpoint not found.", details=str(path))

    raw = path.read_bytes()
    split = raw.find(b"\n")
    if split < 0:
        raise CheckpointError("Checkpoint header is not terminated.", details=str(path))
    try:
        header = CheckpointHeader.model_validate_json(raw[:split])
    except ValidationError as e:
        raise CheckpointError("Malformed checkpoint header.", details=e.errors(include_url=False)) from e

    if header.config_hash != header.network.config_hash():
        raise CheckpointError("Checkpoint config hash does not match its network config.", details=str(path))

    payload = raw[split + 1 :]
    if len(payload) != header.payload_bytes:
        raise CheckpointError(
            "Checkpoint payload has the wrong size.", details=(len(payload), header.payload_bytes)
        )

    arrays: Dict[str, np.ndarray] = {}
    for entry in header.parameters:
        end = entry.offset + entry.count * PAYLOAD_DTYPE.itemsize
        if end > len(payload):
            raise CheckpointError(f"Parameter '{entry.name}' runs past the payload.")
        arrays[entry.name] = (
            np.frombuffer(payload[entry.offset : end], dtype=PAYLOAD_DTYPE).reshape(entry.shape).copy()
        )
    return header, arrays


def restore_network(path: PathLike, expected: Optional[NetworkConfig] = None) -> Tuple[SegNetwork, CheckpointHeader]:
    """
    Rebuilds the network stored in a checkpoint. With `expected`, the stored
    network config must hash identically.
    """

    header, arrays = load_checkpoint(path)
    if expected is not None and expected.config_hash() != header.config_hash:
        raise CheckpointError(
            "Checkpoint was written for a different network config.",
            details={"checkpoint": header.network.model_dump(), "expected": expected.model_dump()},
        )

    net = build(header.network)
    missing = sorted(set(net.params) - set(arrays))
    if missing:
        raise CheckpointError("Checkpoint lacks parameters of its own network.", details=missing[:5])
    net.load_arrays(arrays)
    return net, header
