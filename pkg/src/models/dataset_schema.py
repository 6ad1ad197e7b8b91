from typing import Dict, List, Literal, Tuple
from pydantic import BaseModel, Field, model_validator

Split = Literal["train", "val"]


class SampleEntry(BaseModel):
    sample_id: str
    frames: List[str] = Field(description="Frame paths relative to the dataset root, in temporal order.")
    label: str = Field(description="Label path relative to the dataset root.")
    # Per-class velocity (dy, dx) in pixels per frame, keyed by class index.
    velocities: Dict[int, Tuple[int, int]] = {}


class DatasetManifest(BaseModel):
    num_classes: int = Field(ge=2)
    class_names: List[str]
    sequence_length: int = Field(ge=1)
    height: int = Field(ge=1)
    width: int = Field(ge=1)
    seed: int
    splits: Dict[str, List[SampleEntry]]

    @model_validator(mode="after")
    def check_consistency(self):
        if len(self.class_names) != self.num_classes:
            raise ValueError("class_names must list exactly num_classes names.")
        for entries in self.splits.values():
            for entry in entries:
                if len(entry.frames) != self.sequence_length:
                    raise ValueError(f"Sample {entry.sample_id} has {len(entry.frames)} frames.")
        return self

    @property
    def split_sizes(self) -> Dict[str, int]:
        return {name: len(entries) for name, entries in self.splits.items()}
