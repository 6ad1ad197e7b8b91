from typing import List, Optional, Sequence, Tuple
import numpy as np
from ..models.errors import ShapeError
from ..models.metrics_schema import FlickerReport, MetricsReport


class ConfusionMatrix:
    """
    K x K pixel counts, rows are ground truth and columns are predictions.
    Accumulation returns a new matrix; partial matrices can be summed.
    """

    def __init__(self, num_classes: int, counts: Optional[np.ndarray] = None):
        if num_classes < 1:
            raise ShapeError("A confusion matrix needs at least one class.")
        self.num_classes = num_classes
        self.counts = (
            np.zeros((num_classes, num_classes), dtype=np.int64)
            if counts is None
            else np.array(counts, dtype=np.int64)
        )

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise ShapeError("Cannot add confusion matrices of different class counts.")
        return ConfusionMatrix(self.num_classes, self.counts + other.counts)

    def accumulate(
        self, pred_labels: np.ndarray, gt_labels: np.ndarray, ignore_index: Optional[int] = None
    ) -> "ConfusionMatrix":
        return accumulate(self, pred_labels, gt_labels, ignore_index)


def accumulate(
    cm: ConfusionMatrix,
    pred_labels: np.ndarray,
    gt_labels: np.ndarray,
    ignore_index: Optional[int] = None,
) -> ConfusionMatrix:
    """
    Adds one count per pixel at (ground truth, prediction).

    Args:
        - cm: The matrix to extend (left untouched).
        - pred_labels: Predicted class map, any shape.
        - gt_labels: Ground-truth class map of the same shape.
        - ignore_index: Ground-truth value whose pixels are skipped. Disabled by default.

    Returns:
        A new ConfusionMatrix.
    """

    if pred_labels.shape != gt_labels.shape:
        raise ShapeError("Prediction and ground truth extents differ.", details=(pred_labels.shape, gt_labels.shape))

    pred = pred_labels.reshape(-1).astype(np.int64)
    gt = gt_labels.reshape(-1).astype(np.int64)
    if ignore_index is not None:
        keep = gt != ignore_index
        pred, gt = pred[keep], gt[keep]

    k = cm.num_classes
    if pred.size and (pred.min() < 0 or pred.max() >= k or gt.min() < 0 or gt.max() >= k):
        raise ShapeError(f"Class index outside [0, {k}).")

    counts = np.bincount(gt * k + pred, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(k, cm.counts + counts)


def pixel_accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ShapeError("Accuracy of an empty confusion matrix is undefined.")
    return float(np.trace(cm.counts) / cm.total)


def mean_iou(cm: ConfusionMatrix) -> Tuple[float, List[Optional[float]]]:
    """
    Returns mIoU and the per-class IoU. Classes absent from both ground truth and
    prediction have IoU None and are excluded from the mean.
    """

    if cm.total == 0:
        raise ShapeError("mIoU of an empty confusion matrix is undefined.")

    intersection = np.diag(cm.counts).astype(np.float64)
    union = cm.counts.sum(axis=1) + cm.counts.sum(axis=0) - intersection
    per_class: List[Optional[float]] = [
        float(inter / uni) if uni > 0 else None for inter, uni in zip(intersection, union)
    ]
    present = [value for value in per_class if value is not None]
    return float(np.mean(present)), per_class


def mfip(pred_sequence: Sequence[np.ndarray]) -> FlickerReport:
    """
    Mean Flickering Image Pixels: the fraction of pixels whose predicted class
    changes between consecutive frames, averaged over all pairs, in percent.

    Args:
        - pred_sequence: At least two label maps of equal extents.
    """

    if len(pred_sequence) < 2:
        raise ShapeError("mFIP needs at least two frames.", details=len(pred_sequence))
    shape = pred_sequence[0].shape
    if any(frame.shape != shape for frame in pred_sequence):
        raise ShapeError("All frames of an mFIP sequence must share extents.")

    fractions = [
        float(np.mean(current != previous))
        for previous, current in zip(pred_sequence[:-1], pred_sequence[1:])
    ]
    return FlickerReport(
        pair_fractions=fractions,
        mfip_percent=100.0 * float(np.mean(fractions)),
        pair_count=len(fractions),
    )


def metrics_report(
    cm: ConfusionMatrix, flicker: Optional[Sequence[FlickerReport]] = None, sequences: int = 0
) -> MetricsReport:
    """
    Bundles accuracy, mIoU and (optionally) the mean mFIP over several sequences.
    """

    miou, per_class = mean_iou(cm)
    mfip_percent = None
    if flicker:
        mfip_percent = float(np.mean([report.mfip_percent for report in flicker]))
    return MetricsReport(
        accuracy=pixel_accuracy(cm),
        miou=miou,
        per_class_iou=per_class,
        mfip_percent=mfip_percent,
        sequences=sequences,
    )
