import colorsys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Tuple, Union
import numpy as np
from tqdm import tqdm
from ..core.seeding import make_rng
from ..models.dataset_schema import DatasetManifest, SampleEntry
from ..models.errors import DatasetError
from .anymap import LABEL_NAME, frame_name, write_sample
from .sample import VideoSample

MIN_EXTENT = 16
MIN_VISIBLE_PIXELS = 4
MAX_PLACEMENT_TRIES = 100
SPLIT_INDEX = {"train": 0, "val": 1}

MaskFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]

# Offsets (dy, dx) from the shape center and its radius r.
SHAPES: Dict[str, MaskFn] = {
    "circle": lambda dy, dx, r: dy**2 + dx**2 <= r**2,
    "rectangle": lambda dy, dx, r: (np.abs(dy) <= 0.6 * r) & (np.abs(dx) <= r),
    "triangle": lambda dy, dx, r: (dy >= -r) & (dy <= r) & (np.abs(dx) <= (dy + r) / 2),
    "diamond": lambda dy, dx, r: np.abs(dy) + np.abs(dx) <= r,
    "ellipse": lambda dy, dx, r: (dy / (0.5 * r)) ** 2 + (dx / r) ** 2 <= 1.0,
    "cross": lambda dy, dx, r: ((np.abs(dy) <= r / 3) & (np.abs(dx) <= r))
    | ((np.abs(dx) <= r / 3) & (np.abs(dy) <= r)),
    "ring": lambda dy, dx, r: (dy**2 + dx**2 <= r**2) & (dy**2 + dx**2 >= (r / 2) ** 2),
    "square": lambda dy, dx, r: (np.abs(dy) <= 0.7 * r) & (np.abs(dx) <= 0.7 * r),
}
SHAPE_NAMES = list(SHAPES)


@dataclass(frozen=True)
class ShapeTrack:
    """
    One moving shape: class index, shape type, radius, center at frame 0 and
    a constant velocity in pixels per frame.
    """

    class_index: int
    shape: str
    radius: int
    center: Tuple[int, int]
    velocity: Tuple[int, int]

    def center_at(self, t: int) -> Tuple[int, int]:
        return (self.center[0] + t * self.velocity[0], self.center[1] + t * self.velocity[1])


def class_names(num_classes: int) -> List[str]:
    return ["background"] + [
        SHAPE_NAMES[(k - 1) % len(SHAPE_NAMES)] + ("" if k <= len(SHAPE_NAMES) else f"_{k}")
        for k in range(1, num_classes)
    ]


def palette(num_classes: int) -> np.ndarray:
    """
    Returns (K, 3) RGB colors; class 0 (background) is unused and left black.
    """

    colors = np.zeros((num_classes, 3))
    for k in range(1, num_classes):
        colors[k] = colorsys.hsv_to_rgb((k - 1) / max(1, num_classes - 1), 0.85, 0.95)
    return colors


def shape_mask(track: ShapeTrack, t: int, height: int, width: int) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width]
    cy, cx = track.center_at(t)
    return SHAPES[track.shape](yy - cy, xx - cx, float(track.radius))


def _background(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width]
    fy, fx = rng.uniform(1.0, 4.0, size=2)
    phase_y, phase_x = rng.uniform(0.0, 1.0, size=2)
    texture = (
        0.4
        + 0.08 * np.sin(2 * np.pi * (fy * yy / height + phase_y))
        + 0.08 * np.sin(2 * np.pi * (fx * xx / width + phase_x))
    )
    tint = rng.uniform(0.85, 1.0, size=3)
    return tint[:, None, None] * texture[None]


def _draw_tracks(
    rng: np.random.Generator, num_classes: int, length: int, height: int, width: int
) -> List[ShapeTrack]:
    short = min(height, width)
    r_min = max(2, short // 10)
    r_max = max(r_min, short // 6)
    tracks = []
    for k in range(1, num_classes):
        radius = int(rng.integers(r_min, r_max + 1))
        velocity = (0, 0)
        while velocity == (0, 0):
            velocity = (int(rng.integers(-2, 3)), int(rng.integers(-2, 3)))
        center = []
        for extent, v in zip((height, width), velocity):
            travel = (length - 1) * v
            low = radius + max(0, -travel)
            high = extent - 1 - radius - max(0, travel)
            if low > high:
                raise DatasetError(
                    "Extents too small for the shapes and their motion.", details=(height, width, radius, velocity)
                )
            center.append(int(rng.integers(low, high + 1)))
        tracks.append(
            ShapeTrack(
                class_index=k,
                shape=SHAPE_NAMES[(k - 1) % len(SHAPE_NAMES)],
                radius=radius,
                center=(center[0], center[1]),
                velocity=velocity,
            )
        )
    return tracks


def render_label(tracks: List[ShapeTrack], t: int, height: int, width: int) -> np.ndarray:
    # Fixed z-order: higher class indices are drawn on top.
    label = np.zeros((height, width), dtype=np.int64)
    for track in sorted(tracks, key=lambda track: track.class_index):
        label[shape_mask(track, t, height, width)] = track.class_index
    return label


def render_sample(
    rng: np.random.Generator,
    num_classes: int,
    length: int,
    height: int,
    width: int,
    sample_id: str = "",
) -> Tuple[VideoSample, List[ShapeTrack]]:
    """
    Renders one moving-shapes sequence and its final-frame label.

    Placement is redrawn until every shape class is visible (at least a few
    pixels) in the final label map.
    """

    if num_classes < 2:
        raise DatasetError("The generator needs at least two classes (background and one shape).")
    if min(height, width) < MIN_EXTENT:
        raise DatasetError(f"Frame extents must be at least {MIN_EXTENT} pixels.", details=(height, width))

    background = _background(rng, height, width)
    colors = palette(num_classes)
    tracks = _draw_tracks(rng, num_classes, length, height, width)
    for _ in range(MAX_PLACEMENT_TRIES):
        final = render_label(tracks, length - 1, height, width)
        counts = np.bincount(final.reshape(-1), minlength=num_classes)
        if np.all(counts[1:] >= MIN_VISIBLE_PIXELS):
            break
        tracks = _draw_tracks(rng, num_classes, length, height, width)

    frames = []
    for t in range(length):
        label_t = render_label(tracks, t, height, width)
        frame = background.copy()
        shaped = label_t > 0
        frame[:, shaped] = colors[label_t[shaped]].T
        frames.append(frame)

    sample = VideoSample(
        frames=frames,
        label=render_label(tracks, length - 1, height, width),
        sample_id=sample_id,
        meta={"velocities": {track.class_index: track.velocity for track in tracks}},
    )
    return sample, tracks


def generate_dataset(
    root: Union[str, Path],
    seed: int,
    n_train: int = 200,
    n_val: int = 50,
    num_classes: int = 8,
    length: int = 4,
    height: int = 64,
    width: int = 128,
    quiet: bool = False,
) -> DatasetManifest:
    """
    Generates the synthetic moving-shapes dataset under `root` and writes its manifest.

    Args:
        - root: Output directory; `manifest.json` and one folder per split are created.
        - seed: Generator seed. Equal seeds give byte-identical trees.
        - n_train, n_val: Split sizes.
        - num_classes: K, background included.
        - length: Frames per sequence (T).
        - height, width: Frame extents.

    Returns:
        The DatasetManifest that was written.
    """

    root = Path(root)
    if min(height, width) < MIN_EXTENT:
        raise DatasetError(f"Frame extents must be at least {MIN_EXTENT} pixels.", details=(height, width))

    splits: Dict[str, List[SampleEntry]] = {}
    for split, count in (("train", n_train), ("val", n_val)):
        entries = []
        for index in tqdm(range(count), desc=f"Generating {split}", disable=quiet):
            sample_id = f"{index:05d}"
            rng = make_rng(seed, SPLIT_INDEX[split], index)
            sample, tracks = render_sample(rng, num_classes, length, height, width, sample_id)
            directory = root / split / sample_id
            write_sample(directory, sample, num_classes)
            entries.append(
                SampleEntry(
                    sample_id=sample_id,
                    frames=[f"{split}/{sample_id}/{frame_name(t)}" for t in range(length)],
                    label=f"{split}/{sample_id}/{LABEL_NAME}",
                    velocities={track.class_index: track.velocity for track in tracks},
                )
            )
        splits[split] = entries

    manifest = DatasetManifest(
        num_classes=num_classes,
        class_names=class_names(num_classes),
        sequence_length=length,
        height=height,
        width=width,
        seed=seed,
        splits=splits,
    )
    root.mkdir(parents=True, exist_ok=True)
    (root / "manifest.json").write_text(manifest.model_dump_json(indent=2))
    if not quiet:
        print(f"📦 Dataset: {n_train} train / {n_val} val sequences written to {root}")
    return manifest
