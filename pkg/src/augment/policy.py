from typing import List
import numpy as np
from ..core.seeding import derive_seed, make_rng
from ..dataset.sample import VideoSample
from ..models.augment_schema import (
    AugmentConfig,
    BrightnessDisturbance,
    Disturbance,
    DisturbancePolicy,
    FlipDisturbance,
    GaussianNoise,
    PolygonDisturbance,
    RainDisturbance,
    SaltPepperNoise,
    ScaleDisturbance,
)
from ..models.errors import AugmentError
from .geometric import hflip, random_scale
from .weather import add_noise, add_white_polygon, random_brightness, simulate_rain


def target_frames(policy: DisturbancePolicy, length: int, seed: int) -> List[int]:
    """
    Returns the indices of the frames a policy disturbs.
    """

    if length < 1:
        raise AugmentError("Cannot apply a policy to an empty sequence.")
    if policy.mode == "last_frame_only":
        return [length - 1]
    if policy.mode == "all_frames":
        return list(range(length))
    draws = np.random.default_rng(seed).random(length)
    return [index for index in range(length) if draws[index] < policy.p]


def disturb_frame(img: np.ndarray, disturbance: Disturbance, seed: int) -> np.ndarray:
    """
    Applies one photometric disturbance to a single (3, H, W) frame.
    """

    if isinstance(disturbance, RainDisturbance):
        params = disturbance.params.model_copy(update={"seed": derive_seed(disturbance.params.seed, seed)})
        return simulate_rain(img, params)
    if isinstance(disturbance, (GaussianNoise, SaltPepperNoise)):
        return add_noise(img, disturbance, seed)
    if isinstance(disturbance, PolygonDisturbance):
        return add_white_polygon(img, disturbance.max_vertices, disturbance.max_extent_fraction, seed)
    if isinstance(disturbance, BrightnessDisturbance):
        return random_brightness(img, disturbance.low, disturbance.high, seed)
    raise AugmentError(f"'{disturbance.kind}' is not a per-frame disturbance.")


def apply_policy(
    sample: VideoSample, policy: DisturbancePolicy, disturbance: Disturbance, seed: int
) -> VideoSample:
    """
    Disturbs the frames selected by `policy`.

    Photometric disturbances touch only the targeted frames and never the label.
    Geometric ones (flip, scale) ignore the policy and transform every frame and
    the label identically, keeping them aligned.

    Args:
        - sample: The input sequence (left untouched).
        - policy: Which frames receive the disturbance.
        - disturbance: What to apply.
        - seed: Base seed; each frame derives its own seed from it.

    Returns:
        A new VideoSample.
    """

    if not sample.frames:
        raise AugmentError("Cannot disturb an empty sequence.", details=sample.sample_id)

    if isinstance(disturbance, FlipDisturbance):
        return hflip(sample)
    if isinstance(disturbance, ScaleDisturbance):
        return random_scale(sample, disturbance.low, disturbance.high, seed)

    frames = list(sample.frames)
    for index in target_frames(policy, len(frames), seed):
        frames[index] = disturb_frame(frames[index], disturbance, derive_seed(seed, index))
    return sample.replace(frames=frames)


def _random_photometric(kind: str, rng: np.random.Generator) -> Disturbance:
    if kind == "gaussian":
        return GaussianNoise(sigma=float(rng.uniform(0.02, 0.1)))
    if kind == "salt_pepper":
        return SaltPepperNoise(p=float(rng.uniform(0.01, 0.05)))
    if kind == "polygon":
        return PolygonDisturbance()
    return BrightnessDisturbance()


def augment_for_training(sample: VideoSample, config: AugmentConfig, seed: int) -> VideoSample:
    """
    Random flip and scale of the whole sequence, then (with probability
    `disturbance_prob`) one photometric disturbance applied to the last frame,
    a random subset of frames, or every frame.
    """

    rng = make_rng(seed)
    if config.flip and rng.random() < 0.5:
        sample = hflip(sample)
    if config.scale:
        low, high = config.scale_range
        sample = random_scale(sample, low, high, derive_seed(seed, 1))
    if config.disturbances and rng.random() < config.disturbance_prob:
        kind = config.disturbances[int(rng.integers(len(config.disturbances)))]
        mode = ("last_frame_only", "random_subset", "all_frames")[int(rng.integers(3))]
        sample = apply_policy(
            sample, DisturbancePolicy(mode=mode), _random_photometric(kind, rng), derive_seed(seed, 2)
        )
    return sample
