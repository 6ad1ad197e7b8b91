from typing import Tuple
import numpy as np
from ..dataset.sample import VideoSample
from ..engine.ops import interpolation_matrix
from ..models.errors import AugmentError


def hflip(sample: VideoSample) -> VideoSample:
    """
    Mirrors every frame and the label map left to right.
    """

    frames = [np.ascontiguousarray(frame[:, :, ::-1]) for frame in sample.frames]
    return sample.replace(frames=frames, label=np.ascontiguousarray(sample.label[:, ::-1]))


def _nearest_indices(n_in: int, n_out: int) -> np.ndarray:
    return np.minimum(((np.arange(n_out) + 0.5) * n_in / n_out).astype(np.int64), n_in - 1)


def _fit_axis(array: np.ndarray, axis: int, target: int, offset: int) -> np.ndarray:
    # Crops (if larger) or edge-pads (if smaller) one axis to `target`.
    size = array.shape[axis]
    if size >= target:
        return np.take(array, np.arange(offset, offset + target), axis=axis)
    pad = [(0, 0)] * array.ndim
    pad[axis] = (offset, target - size - offset)
    return np.pad(array, pad, mode="edge")


def random_scale(sample: VideoSample, low: float, high: float, seed: int) -> VideoSample:
    """
    Rescales frames (bilinear) and label (nearest) by one factor drawn from
    [low, high], then crops or edge-pads back to the original extents at one
    random offset shared by all frames and the label.
    """

    if not 0.0 < low <= high:
        raise AugmentError("Scale range must satisfy 0 < low <= high.", details=(low, high))
    if not sample.frames:
        raise AugmentError("Cannot scale an empty sequence.")

    rng = np.random.default_rng(seed)
    factor = float(rng.uniform(low, high))
    _, height, width = sample.frames[0].shape
    new_h, new_w = max(1, round(height * factor)), max(1, round(width * factor))
    offsets: Tuple[int, int] = (
        int(rng.integers(0, abs(new_h - height) + 1)),
        int(rng.integers(0, abs(new_w - width) + 1)),
    )

    rows = interpolation_matrix(height, new_h)
    cols = interpolation_matrix(width, new_w)
    frames = []
    for frame in sample.frames:
        resized = np.clip(rows @ frame @ cols.T, 0.0, 1.0)
        resized = _fit_axis(resized, 1, height, offsets[0])
        frames.append(_fit_axis(resized, 2, width, offsets[1]))

    label = sample.label[_nearest_indices(height, new_h)][:, _nearest_indices(width, new_w)]
    label = _fit_axis(_fit_axis(label, 0, height, offsets[0]), 1, width, offsets[1])
    return sample.replace(frames=frames, label=label)
