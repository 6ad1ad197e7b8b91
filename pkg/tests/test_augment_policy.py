import numpy as np
import pytest
from src.augment.geometric import hflip, random_scale
from src.augment.policy import apply_policy, augment_for_training, target_frames
from src.augment.weather import rain_preset
from src.dataset.sample import VideoSample
from src.models.augment_schema import (
    AugmentConfig,
    DisturbancePolicy,
    FlipDisturbance,
    GaussianNoise,
    RainDisturbance,
    ScaleDisturbance,
)
from src.models.errors import AugmentError


@pytest.fixture
def sample(rng):
    return VideoSample(
        frames=[rng.uniform(size=(3, 16, 24)) for _ in range(4)],
        label=rng.integers(0, 5, size=(16, 24)),
        sample_id="s",
    )


HEAVY_RAIN = RainDisturbance(params=rain_preset("heavy", seed=1))


class TestPolicy:
    def test_last_frame_only(self, sample):
        out = apply_policy(sample, DisturbancePolicy(mode="last_frame_only"), HEAVY_RAIN, seed=0)
        for before, after in zip(sample.frames[:-1], out.frames[:-1]):
            np.testing.assert_array_equal(before, after)
        assert not np.array_equal(sample.frames[-1], out.frames[-1])
        np.testing.assert_array_equal(out.label, sample.label)

    def test_all_frames_get_different_streaks(self, sample):
        flat = sample.replace(frames=[np.zeros((3, 16, 24)) for _ in range(4)])
        out = apply_policy(flat, DisturbancePolicy(mode="all_frames"), HEAVY_RAIN, seed=0)
        assert all(not np.array_equal(frame, np.zeros_like(frame)) for frame in out.frames)
        assert not np.array_equal(out.frames[0], out.frames[1])

    def test_random_subset_is_seeded(self, sample):
        policy = DisturbancePolicy(mode="random_subset", p=0.5)
        assert target_frames(policy, 8, seed=3) == target_frames(policy, 8, seed=3)
        a = apply_policy(sample, policy, GaussianNoise(), seed=5)
        b = apply_policy(sample, policy, GaussianNoise(), seed=5)
        for x, y in zip(a.frames, b.frames):
            np.testing.assert_array_equal(x, y)

    def test_random_subset_extremes(self):
        assert target_frames(DisturbancePolicy(mode="random_subset", p=0.0), 5, seed=1) == []
        assert target_frames(DisturbancePolicy(mode="random_subset", p=1.0), 5, seed=1) == [0, 1, 2, 3, 4]

    def test_source_sample_is_untouched(self, sample):
        before = [frame.copy() for frame in sample.frames]
        apply_policy(sample, DisturbancePolicy(mode="all_frames"), GaussianNoise(sigma=0.3), seed=0)
        for original, frame in zip(before, sample.frames):
            np.testing.assert_array_equal(original, frame)

    def test_empty_sequence_raises(self):
        empty = VideoSample(frames=[], label=np.zeros((4, 4), dtype=np.int64))
        with pytest.raises(AugmentError):
            apply_policy(empty, DisturbancePolicy(), HEAVY_RAIN, seed=0)

    def test_geometric_disturbances_move_the_label(self, sample):
        out = apply_policy(sample, DisturbancePolicy(mode="last_frame_only"), FlipDisturbance(), seed=0)
        np.testing.assert_array_equal(out.label, sample.label[:, ::-1])
        np.testing.assert_array_equal(out.frames[0], sample.frames[0][:, :, ::-1])


class TestGeometric:
    def test_double_flip_is_identity(self, sample):
        twice = hflip(hflip(sample))
        np.testing.assert_array_equal(twice.label, sample.label)
        np.testing.assert_array_equal(twice.frames[2], sample.frames[2])

    def test_scale_keeps_extents_and_classes(self, sample):
        for seed in range(5):
            out = random_scale(sample, 0.75, 1.25, seed)
            assert out.frames[0].shape == (3, 16, 24)
            assert out.label.shape == (16, 24)
            assert set(np.unique(out.label)) <= set(np.unique(sample.label))
            assert all(0.0 <= frame.min() and frame.max() <= 1.0 for frame in out.frames)

    def test_unit_scale_is_identity(self, sample):
        out = random_scale(sample, 1.0, 1.0, seed=0)
        np.testing.assert_array_equal(out.label, sample.label)
        np.testing.assert_allclose(out.frames[1], sample.frames[1])

    def test_scale_disturbance_goes_through_policy(self, sample):
        out = apply_policy(sample, DisturbancePolicy(), ScaleDisturbance(low=1.2, high=1.2), seed=4)
        assert out.label.shape == sample.label.shape

    def test_invalid_range_raises(self, sample):
        with pytest.raises(AugmentError):
            random_scale(sample, 1.2, 0.8, seed=0)


class TestTrainingAugmentation:
    def test_is_deterministic_and_shape_preserving(self, sample):
        config = AugmentConfig(disturbance_prob=1.0)
        a = augment_for_training(sample, config, seed=7)
        b = augment_for_training(sample, config, seed=7)
        assert a.length == sample.length
        np.testing.assert_array_equal(a.label, b.label)
        for x, y in zip(a.frames, b.frames):
            np.testing.assert_array_equal(x, y)
            assert x.shape == (3, 16, 24)

    def test_everything_off_is_identity(self, sample):
        config = AugmentConfig(flip=False, scale=False, disturbance_prob=0.0)
        out = augment_for_training(sample, config, seed=1)
        np.testing.assert_array_equal(out.frames[3], sample.frames[3])
        np.testing.assert_array_equal(out.label, sample.label)
