from typing import Union
import numpy as np
from ..models.augment_schema import GaussianNoise, RainLevel, RainParams, SaltPepperNoise
from ..models.errors import AugmentError

# (N lines, line length in pixels) per rain intensity.
RAIN_PRESETS = {
    "light": (500, 10),
    "moderate": (1500, 30),
    "heavy": (2500, 60),
}


def _check_image(img: np.ndarray) -> None:
    if img.ndim != 3:
        raise AugmentError("Expected an image of shape (channels, height, width).", details=img.shape)
    if not np.isfinite(img).all():
        raise AugmentError("Image contains NaN or Inf values.")
    if img.size and (img.min() < 0.0 or img.max() > 1.0):
        raise AugmentError("Image values must lie in [0, 1].", details=(float(img.min()), float(img.max())))


def rain_preset(level: RainLevel, seed: int = 0) -> RainParams:
    n_lines, line_length = RAIN_PRESETS[level]
    return RainParams(n_lines=n_lines, line_length=line_length, brightness_factor=0.7, seed=seed)


def simulate_rain(img: np.ndarray, params: RainParams) -> np.ndarray:
    """
    Draws `n_lines` one-pixel streaks of `line_length` pixels at a single slant,
    then darkens the whole image (streaks included) by `brightness_factor`.

    Args:
        - img: (3, H, W) image in [0, 1].
        - params: Rain parameters, including the seed.

    Returns:
        A new image in [0, 1]. Equal seeds give bitwise-equal outputs.
    """

    _check_image(img)
    rng = np.random.default_rng(params.seed)
    out = img.copy()
    _, height, width = img.shape

    if params.n_lines > 0:
        angle = params.slant_deg if params.slant_deg is not None else rng.uniform(*params.slant_range)
        theta = np.deg2rad(angle)
        x0 = rng.uniform(0, width, size=params.n_lines)
        y0 = rng.uniform(0, height, size=params.n_lines)
        steps = np.arange(params.line_length)
        # Slant measured from the horizontal, image rows grow downwards.
        xs = np.rint(x0[:, None] + steps * np.cos(theta)).astype(np.int64)
        ys = np.rint(y0[:, None] - steps * np.sin(theta)).astype(np.int64)
        inside = (xs >= 0) & (xs < width) & (ys >= 0) & (ys < height)
        out[:, ys[inside], xs[inside]] = params.streak_value

    return np.clip(out * params.brightness_factor, 0.0, 1.0)


def add_noise(img: np.ndarray, noise: Union[GaussianNoise, SaltPepperNoise], seed: int) -> np.ndarray:
    """
    Adds seeded Gaussian noise (per value) or salt-and-pepper noise (per pixel,
    all channels: 0 with probability p/2, 1 with probability p/2).
    """

    _check_image(img)
    rng = np.random.default_rng(seed)

    if isinstance(noise, GaussianNoise):
        if noise.sigma < 0:
            raise AugmentError("Gaussian sigma must be non-negative.", details=noise.sigma)
        return np.clip(img + rng.normal(0.0, noise.sigma, size=img.shape), 0.0, 1.0)

    if not 0.0 <= noise.p <= 1.0:
        raise AugmentError("Salt-and-pepper probability must lie in [0, 1].", details=noise.p)
    draw = rng.random(img.shape[1:])
    out = img.copy()
    out[:, draw < noise.p / 2] = 0.0
    out[:, (draw >= noise.p / 2) & (draw < noise.p)] = 1.0
    return out


def add_white_polygon(
    img: np.ndarray, max_vertices: int, max_extent_fraction: float, seed: int
) -> np.ndarray:
    """
    Paints one seeded convex polygon with value 1.0 on every channel.

    The polygon's vertices lie on the ellipse inscribed in an integer-aligned box
    of at most max_extent_fraction * H * W pixels, so it never covers more than
    that many pixels.
    """

    _check_image(img)
    if not 0.0 < max_extent_fraction <= 1.0:
        raise AugmentError("max_extent_fraction must lie in (0, 1].", details=max_extent_fraction)
    if max_vertices < 3:
        raise AugmentError("A polygon needs at least three vertices.", details=max_vertices)

    rng = np.random.default_rng(seed)
    out = img.copy()
    _, height, width = img.shape
    side = np.sqrt(max_extent_fraction)
    box_h, box_w = int(np.floor(side * height)), int(np.floor(side * width))
    if box_h < 1 or box_w < 1:
        return out

    top = int(rng.integers(0, height - box_h + 1))
    left = int(rng.integers(0, width - box_w + 1))
    n_vertices = int(rng.integers(3, max_vertices + 1))
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n_vertices))
    vx = left + box_w / 2 + (box_w / 2) * np.cos(angles)
    vy = top + box_h / 2 + (box_h / 2) * np.sin(angles)

    yy, xx = np.mgrid[top : top + box_h, left : left + box_w] + 0.5
    crosses = np.stack(
        [
            (vx[(k + 1) % n_vertices] - vx[k]) * (yy - vy[k])
            - (vy[(k + 1) % n_vertices] - vy[k]) * (xx - vx[k])
            for k in range(n_vertices)
        ]
    )
    # Vertices are sorted by angle, so every edge has the same orientation.
    mask = np.all(crosses >= 0, axis=0) | np.all(crosses <= 0, axis=0)
    out[:, top : top + box_h, left : left + box_w][:, mask] = 1.0
    return out


def reduce_brightness(img: np.ndarray, factor: float) -> np.ndarray:
    _check_image(img)
    if not 0.0 < factor <= 1.0:
        raise AugmentError("Brightness factor must lie in (0, 1].", details=factor)
    return np.clip(img * factor, 0.0, 1.0)


def random_brightness(img: np.ndarray, low: float, high: float, seed: int) -> np.ndarray:
    if not 0.0 < low <= high <= 1.0:
        raise AugmentError("Brightness range must satisfy 0 < low <= high <= 1.", details=(low, high))
    factor = float(np.random.default_rng(seed).uniform(low, high))
    return reduce_brightness(img, factor)
