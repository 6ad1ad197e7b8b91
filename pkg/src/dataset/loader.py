import queue
import threading
from pathlib import Path
from typing import Iterable, Iterator, List, Tuple, TypeVar, Union
import numpy as np
from pydantic import ValidationError
from ..core.seeding import make_rng
from ..models.dataset_schema import DatasetManifest, SampleEntry
from ..models.errors import DatasetError
from .anymap import read_pgm, read_ppm
from .sample import VideoSample

PathLike = Union[str, Path]
T = TypeVar("T")

MANIFEST_NAME = "manifest.json"


def load_manifest(root: PathLike) -> DatasetManifest:
    """
    Loads `<root>/manifest.json` and checks that every referenced file exists.
    """

    root = Path(root)
    path = root / MANIFEST_NAME
    if not path.is_file():
        raise DatasetError("Dataset manifest not found.", details=str(path))
    try:
        manifest = DatasetManifest.model_validate_json(path.read_text())
    except ValidationError as e:
        raise DatasetError("Invalid dataset manifest.", details=e.errors(include_url=False)) from e

    missing = [
        relative
        for entries in manifest.splits.values()
        for entry in entries
        for relative in [*entry.frames, entry.label]
        if not (root / relative).is_file()
    ]
    if missing:
        raise DatasetError(f"{len(missing)} dataset files are missing.", details=missing[:5])
    return manifest


def split_entries(manifest: DatasetManifest, split: str) -> List[SampleEntry]:
    if split not in manifest.splits:
        raise DatasetError(f"Unknown split '{split}'.", details=sorted(manifest.splits))
    return manifest.splits[split]


def load_entry(root: PathLike, entry: SampleEntry, manifest: DatasetManifest) -> VideoSample:
    root = Path(root)
    return VideoSample(
        frames=[read_ppm(root / relative) for relative in entry.frames],
        label=read_pgm(root / entry.label, manifest.num_classes),
        sample_id=entry.sample_id,
        meta={"velocities": dict(entry.velocities)},
    )


def epoch_order(size: int, seed: int, epoch: int) -> np.ndarray:
    return make_rng(seed, epoch).permutation(size)


def batch_iterator(
    manifest: DatasetManifest,
    root: PathLike,
    split: str,
    batch: int,
    seed: int,
    epoch: int = 0,
    shuffle: bool = True,
) -> Iterator[List[VideoSample]]:
    """
    Yields lists of up to `batch` samples. The order is a seeded permutation
    per (seed, epoch); the final batch may be partial.
    """

    if batch < 1:
        raise DatasetError("Batch size must be at least 1.", details=batch)
    entries = split_entries(manifest, split)
    order = epoch_order(len(entries), seed, epoch) if shuffle else np.arange(len(entries))
    for start in range(0, len(order), batch):
        yield [load_entry(root, entries[index], manifest) for index in order[start : start + batch]]


def collate(samples: List[VideoSample]) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Stacks a batch into T arrays of shape (N, 3, H, W) and labels (N, H, W).
    """

    if not samples:
        raise DatasetError("Cannot collate an empty batch.")
    length = samples[0].length
    if any(sample.length != length for sample in samples):
        raise DatasetError("All samples of a batch must have the same length.")
    frames = [np.stack([sample.frames[t] for sample in samples]) for t in range(length)]
    labels = np.stack([sample.label for sample in samples])
    return frames, labels


_DONE = object()


def prefetch(iterable: Iterable[T], depth: int) -> Iterator[T]:
    """
    Runs `iterable` on a background thread, buffering at most `depth` items.
    Depth 0 iterates in the caller's thread. Producer errors are re-raised here.
    """

    if depth <= 0:
        yield from iterable
        return

    buffer: "queue.Queue" = queue.Queue(maxsize=depth)
    stop = threading.Event()

    def produce():
        try:
            for item in iterable:
                if stop.is_set():
                    return
                buffer.put(item)
        except BaseException as e:  # noqa: BLE001
            buffer.put(e)
            return
        buffer.put(_DONE)

    worker = threading.Thread(target=produce, daemon=True)
    worker.start()
    try:
        while True:
            item = buffer.get()
            if item is _DONE:
                break
            if isinstance(item, BaseException):
                raise item
            yield item
    finally:
        stop.set()
        # Unblock a producer waiting on a full queue.
        while worker.is_alive():
            try:
                buffer.get_nowait()
            except queue.Empty:
                worker.join(timeout=0.05)
