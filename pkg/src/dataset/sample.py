from dataclasses import dataclass, field
from typing import List, Optional
import numpy as np
from ..models.errors import DatasetError


@dataclass
class VideoSample:
    """
    T frames of shape (3, H, W) in [0, 1] and one class map (H, W) aligned to the last frame.
    """

    frames: List[np.ndarray]
    label: np.ndarray
    sample_id: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.frames:
            shape = self.frames[0].shape
            if any(frame.shape != shape for frame in self.frames):
                raise DatasetError("All frames of a sample must share extents.", details=self.sample_id)
            if self.label.shape != shape[1:]:
                raise DatasetError("Label extents differ from the frames.", details=(self.label.shape, shape))

    @property
    def length(self) -> int:
        return len(self.frames)

    def replace(
        self, frames: Optional[List[np.ndarray]] = None, label: Optional[np.ndarray] = None
    ) -> "VideoSample":
        return VideoSample(
            frames=self.frames if frames is None else frames,
            label=self.label if label is None else label,
            sample_id=self.sample_id,
            meta=dict(self.meta),
        )
