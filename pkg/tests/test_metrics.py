import numpy as np
import pytest
from src.analyzer.metrics import ConfusionMatrix, accumulate, mean_iou, metrics_report, mfip, pixel_accuracy
from src.models.errors import ShapeError


class TestConfusionMatrix:
    def test_perfect_prediction_fills_the_diagonal(self, rng):
        gt = rng.integers(0, 4, size=(6, 7))
        cm = accumulate(ConfusionMatrix(4), gt, gt)
        assert np.count_nonzero(cm.counts - np.diag(np.diag(cm.counts))) == 0
        assert cm.total == 42

    def test_single_pixel_lands_at_gt_row_pred_column(self):
        cm = accumulate(ConfusionMatrix(6), np.array([[5]]), np.array([[2]]))
        assert cm.counts[2, 5] == 1
        assert cm.total == 1

    def test_accumulation_is_additive(self, rng):
        a_pred, a_gt = rng.integers(0, 3, size=(2, 4, 4))
        b_pred, b_gt = rng.integers(0, 3, size=(2, 4, 4))
        streamed = accumulate(accumulate(ConfusionMatrix(3), a_pred, a_gt), b_pred, b_gt)
        joined = accumulate(ConfusionMatrix(3), np.concatenate([a_pred, b_pred]), np.concatenate([a_gt, b_gt]))
        partial = accumulate(ConfusionMatrix(3), a_pred, a_gt) + accumulate(ConfusionMatrix(3), b_pred, b_gt)
        np.testing.assert_array_equal(streamed.counts, joined.counts)
        np.testing.assert_array_equal(partial.counts, joined.counts)

    def test_accumulate_does_not_mutate(self):
        cm = ConfusionMatrix(2)
        cm.accumulate(np.array([1]), np.array([0]))
        assert cm.total == 0

    def test_out_of_range_class_raises(self):
        with pytest.raises(ShapeError):
            accumulate(ConfusionMatrix(3), np.array([[3]]), np.array([[0]]))

    def test_extent_mismatch_raises(self):
        with pytest.raises(ShapeError):
            accumulate(ConfusionMatrix(3), np.zeros((2, 2)), np.zeros((2, 3)))

    def test_ignore_index_skips_pixels(self):
        cm = accumulate(ConfusionMatrix(3), np.array([0, 1, 2]), np.array([0, 2, 2]), ignore_index=2)
        assert cm.total == 1


class TestScores:
    def test_perfect_prediction(self, rng):
        gt = rng.integers(0, 4, size=(5, 5))
        cm = accumulate(ConfusionMatrix(4), gt, gt)
        assert pixel_accuracy(cm) == 1.0
        assert mean_iou(cm)[0] == 1.0

    def test_hand_counted_example(self):
        gt = np.array([[0, 0], [1, 1]])
        pred = np.array([[0, 1], [1, 1]])
        miou, per_class = mean_iou(accumulate(ConfusionMatrix(2), pred, gt))
        assert per_class == pytest.approx([1 / 2, 2 / 3])
        assert miou == pytest.approx(7 / 12)

    def test_absent_class_does_not_lower_miou(self):
        gt = np.array([[0, 0], [1, 1]])
        pred = np.array([[0, 1], [1, 1]])
        two = mean_iou(accumulate(ConfusionMatrix(2), pred, gt))[0]
        miou, per_class = mean_iou(accumulate(ConfusionMatrix(5), pred, gt))
        assert miou == pytest.approx(two)
        assert per_class[2:] == [None, None, None]

    def test_empty_matrix_raises(self):
        with pytest.raises(ShapeError):
            pixel_accuracy(ConfusionMatrix(3))
        with pytest.raises(ShapeError):
            mean_iou(ConfusionMatrix(3))

    def test_consistent_relabeling_keeps_scores(self, rng):
        for _ in range(100):
            gt = rng.integers(0, 4, size=(8, 8))
            pred = rng.integers(0, 4, size=(8, 8))
            perm = rng.permutation(4)
            cm = accumulate(ConfusionMatrix(4), pred, gt)
            relabeled = accumulate(ConfusionMatrix(4), perm[pred], perm[gt])
            assert pixel_accuracy(cm) == pixel_accuracy(relabeled)
            assert mean_iou(cm)[0] == pytest.approx(mean_iou(relabeled)[0])

    def test_report_uses_wire_names(self):
        cm = accumulate(ConfusionMatrix(2), np.array([0, 1]), np.array([0, 1]))
        report = metrics_report(cm, [mfip([np.zeros((2, 2)), np.ones((2, 2))])], sequences=1)
        dumped = report.model_dump(by_alias=True)
        assert dumped["mIoU"] == 1.0
        assert dumped["mFIP_percent"] == 100.0


class TestFlicker:
    def test_static_predictions_do_not_flicker(self):
        frame = np.array([[0, 1], [2, 1]])
        assert mfip([frame, frame.copy(), frame.copy()]).mfip_percent == 0.0

    def test_every_pixel_flipping_is_100_percent(self):
        a, b = np.zeros((3, 3), dtype=int), np.ones((3, 3), dtype=int)
        report = mfip([a, b, a, b])
        assert report.mfip_percent == 100.0
        assert report.pair_count == 3

    def test_one_of_four_pixels_per_pair(self):
        frames = [np.array([[0, 0], [0, 0]]), np.array([[1, 0], [0, 0]]), np.array([[1, 1], [0, 0]])]
        report = mfip(frames)
        assert report.pair_fractions == [0.25, 0.25]
        assert report.mfip_percent == pytest.approx(25.0)

    def test_needs_two_frames(self):
        with pytest.raises(ShapeError):
            mfip([np.zeros((2, 2))])

    def test_relabeling_does_not_change_flicker(self, rng):
        frames = [rng.integers(0, 3, size=(4, 4)) for _ in range(4)]
        perm = np.array([2, 0, 1])
        assert mfip(frames).mfip_percent == mfip([perm[f] for f in frames]).mfip_percent
