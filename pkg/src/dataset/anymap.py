from pathlib import Path
from typing import List, Optional, Tuple, Union
import numpy as np
from ..models.errors import AnymapFormatError
from .sample import VideoSample

PathLike = Union[str, Path]

_CHANNELS = {b"P6": 3, b"P5": 1}


def quantize(img: np.ndarray) -> np.ndarray:
    """
    Maps [0, 1] values to 8-bit integers by rounding to the nearest level.
    """

    return np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def _header(magic: bytes, width: int, height: int) -> bytes:
    return magic + f"\n{width} {height}\n255\n".encode("ascii")


def _parse(raw: bytes, path: PathLike) -> Tuple[bytes, int, int, bytes]:
    # Header: magic, width, height, maxval as whitespace separated tokens,
    # followed by exactly one whitespace byte before the payload.
    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise AnymapFormatError("Truncated anymap header.", details=str(path))
        tokens.append(raw[start:pos])

    magic = tokens[0]
    if magic not in _CHANNELS:
        raise AnymapFormatError("Unsupported anymap magic number.", details=(str(path), magic))
    try:
        width, height, maxval = (int(token) for token in tokens[1:])
    except ValueError as e:
        raise AnymapFormatError("Malformed anymap header.", details=(str(path), str(e))) from e
    if maxval != 255:
        raise AnymapFormatError("Only 8-bit anymaps (maxval 255) are supported.", details=(str(path), maxval))
    if width < 1 or height < 1:
        raise AnymapFormatError("Anymap extents must be positive.", details=(str(path), width, height))
    return magic, width, height, raw[pos + 1 :]


def _read(path: PathLike, expected: bytes) -> np.ndarray:
    raw = Path(path).read_bytes()
    magic, width, height, payload = _parse(raw, path)
    if magic != expected:
        raise AnymapFormatError(
            f"Expected a {expected.decode()} anymap.", details=(str(path), magic.decode(errors="replace"))
        )
    channels = _CHANNELS[magic]
    size = width * height * channels
    if len(payload) < size:
        raise AnymapFormatError("Truncated anymap payload.", details=(str(path), len(payload), size))
    return np.frombuffer(payload[:size], dtype=np.uint8).reshape(height, width, channels)


def write_ppm(path: PathLike, img: np.ndarray) -> None:
    """
    Writes a (3, H, W) image in [0, 1] as binary 8-bit PPM (P6).
    """

    if img.ndim != 3 or img.shape[0] != 3:
        raise AnymapFormatError("PPM images must have shape (3, H, W).", details=img.shape)
    _, height, width = img.shape
    pixels = np.ascontiguousarray(quantize(img).transpose(1, 2, 0))
    Path(path).write_bytes(_header(b"P6", width, height) + pixels.tobytes())


def read_ppm(path: PathLike) -> np.ndarray:
    """
    Reads a binary PPM into a float32 (3, H, W) image in [0, 1].
    """

    return (_read(path, b"P6").transpose(2, 0, 1) / 255.0).astype(np.float32)


def write_pgm(path: PathLike, label: np.ndarray, num_classes: Optional[int] = None) -> None:
    """
    Writes an (H, W) class map as binary 8-bit PGM (P5), pixel value = class index.
    """

    if label.ndim != 2:
        raise AnymapFormatError("PGM labels must have shape (H, W).", details=label.shape)
    limit = 256 if num_classes is None else num_classes
    if label.size and (label.min() < 0 or label.max() >= limit):
        raise AnymapFormatError(f"Label values must lie in [0, {limit}).", details=(int(label.min()), int(label.max())))
    height, width = label.shape
    Path(path).write_bytes(_header(b"P5", width, height) + label.astype(np.uint8).tobytes())


def read_pgm(path: PathLike, num_classes: Optional[int] = None) -> np.ndarray:
    label = _read(path, b"P5")[:, :, 0].astype(np.int64)
    if num_classes is not None and label.size and label.max() >= num_classes:
        raise AnymapFormatError(
            f"Label value {int(label.max())} is not below the class count {num_classes}.", details=str(path)
        )
    return label


def frame_name(index: int) -> str:
    return f"frame_{index}.ppm"


LABEL_NAME = "label.pgm"


def write_sample(directory: PathLike, sample: VideoSample, num_classes: Optional[int] = None) -> List[Path]:
    """
    Writes frame_{t}.ppm for every frame and label.pgm into `directory`.

    Returns:
        The written paths, frames first.
    """

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for index, frame in enumerate(sample.frames):
        path = directory / frame_name(index)
        write_ppm(path, frame)
        paths.append(path)
    write_pgm(directory / LABEL_NAME, sample.label, num_classes)
    paths.append(directory / LABEL_NAME)
    return paths


def read_sample(directory: PathLike, num_classes: Optional[int] = None) -> VideoSample:
    directory = Path(directory)
    frame_paths = sorted(
        directory.glob("frame_*.ppm"), key=lambda path: int(path.stem.split("_", 1)[1])
    )
    if not frame_paths:
        raise AnymapFormatError("No frames found.", details=str(directory))
    return VideoSample(
        frames=[read_ppm(path) for path in frame_paths],
        label=read_pgm(directory / LABEL_NAME, num_classes),
        sample_id=directory.name,
    )
