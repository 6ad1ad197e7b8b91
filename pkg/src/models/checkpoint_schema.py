from typing import Any, Dict, List, Literal, Tuple
from pydantic import BaseModel
from .network_schema import NetworkConfig

CHECKPOINT_FORMAT = "segkit-checkpoint"


class ParameterEntry(BaseModel):
    name: str
    shape: Tuple[int, ...]
    # Byte offset into the payload that follows the header line.
    offset: int
    count: int


class CheckpointHeader(BaseModel):
    format: Literal["segkit-checkpoint"] = CHECKPOINT_FORMAT
    version: int = 1
    dtype: Literal["<f4"] = "<f4"
    network: NetworkConfig
    config_hash: str
    # Ordered by name.
    parameters: List[ParameterEntry]
    payload_bytes: int
    meta: Dict[str, Any] = {}
