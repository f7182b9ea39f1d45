"""
Evaluation measures: pixel accuracy, (m)IoU, MAE and (m)BER.

Conventions the benchmark tables leave open, and which are recorded in every
report's metadata:

- a class absent from both prediction and label has IoU 100;
- BER skips classes with no positive or no negative pixels in the label;
- Acc, IoU and BER come from confusion counts summed over all images, MAE is
  the mean of the per-image MAEs;
- Acc is plain pixel accuracy over every pixel.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from pydantic import Field

from fakemix_toolkit.common.error_handling import (
    BadInputError,
    NotFoundError,
    ShapeMismatchError,
)
from fakemix_toolkit.common.model import AppModel
from fakemix_toolkit.imagecore import BinaryMask, ClassMask, ImageTensor
from fakemix_toolkit.raster import read_class_mask, read_gray

LOGGER = logging.getLogger(__name__)

LabelLike = Union[ClassMask, BinaryMask, np.ndarray]

REPORT_METADATA = {
    "accuracy": "plain pixel accuracy over all pixels",
    "aggregation": (
        "Acc, IoU and BER from confusion counts summed over images; "
        "MAE averaged over per-image values"
    ),
    "empty_class_iou": "100 when a class is absent from both prediction and label",
    "ber_skipped_classes": "classes without positive or negative label pixels",
    "binary_prediction_rule": "foreground where prediction value / 255 >= 0.5",
}


def _labels(mask: LabelLike) -> np.ndarray:
    data = mask.data if isinstance(mask, (ClassMask, BinaryMask)) else mask
    return np.asarray(data).astype(np.int64)


@dataclass(frozen=True, eq=False)
class ConfusionCounts:
    """One-vs-rest TP/TN/FP/FN per class."""

    tp: np.ndarray
    tn: np.ndarray
    fp: np.ndarray
    fn: np.ndarray

    @classmethod
    def empty(cls, classes: int) -> "ConfusionCounts":
        zeros = np.zeros(classes, dtype=np.int64)
        return cls(tp=zeros, tn=zeros, fp=zeros, fn=zeros)

    @property
    def classes(self) -> int:
        return self.tp.size

    @property
    def pixels(self) -> int:
        """Pixels counted; identical for every class."""
        return int(self.tp[0] + self.tn[0] + self.fp[0] + self.fn[0])

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        if other.classes != self.classes:
            raise ShapeMismatchError(
                detail=f"Cannot add counts over {self.classes} "
                f"and {other.classes} classes"
            )
        return ConfusionCounts(
            tp=self.tp + other.tp,
            tn=self.tn + other.tn,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
        )


class ClassCounts(AppModel):
    tp: int
    tn: int
    fp: int
    fn: int


def confusion_counts(pred: LabelLike, gt: LabelLike, classes: int) -> ConfusionCounts:
    pred_ids, gt_ids = _labels(pred), _labels(gt)
    if pred_ids.shape != gt_ids.shape:
        raise ShapeMismatchError(
            detail=f"Prediction {pred_ids.shape} and label {gt_ids.shape} differ"
        )
    if classes < 1:
        raise BadInputError(detail=f"classes must be >= 1, got {classes}")
    for name, ids in (("prediction", pred_ids), ("label", gt_ids)):
        if ids.size and (ids.min() < 0 or ids.max() >= classes):
            raise BadInputError(
                detail=f"{name} holds ids outside [0, {classes}): "
                f"[{ids.min()}, {ids.max()}]"
            )
    # rows: label, columns: prediction
    matrix = np.bincount(
        (gt_ids * classes + pred_ids).reshape(-1), minlength=classes * classes
    ).reshape(classes, classes)
    tp = np.diag(matrix).astype(np.int64)
    fp = matrix.sum(axis=0) - tp
    fn = matrix.sum(axis=1) - tp
    tn = gt_ids.size - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def iou(counts: ConfusionCounts) -> np.ndarray:
    """Per-class IoU in percent."""
    union = counts.tp + counts.fp + counts.fn
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(union > 0, 100.0 * counts.tp / union, 100.0)
    return values


def miou(counts: ConfusionCounts) -> float:
    return float(iou(counts).mean())


def accuracy_from_counts(counts: ConfusionCounts) -> float:
    if counts.pixels == 0:
        return 100.0
    return 100.0 * float(counts.tp.sum()) / counts.pixels


def pixel_accuracy(pred: LabelLike, gt: LabelLike) -> float:
    pred_ids, gt_ids = _labels(pred), _labels(gt)
    if pred_ids.shape != gt_ids.shape:
        raise ShapeMismatchError(
            detail=f"Prediction {pred_ids.shape} and label {gt_ids.shape} differ"
        )
    return 100.0 * float((pred_ids == gt_ids).sum()) / gt_ids.size


def mae(pred_prob: Union[ImageTensor, np.ndarray], gt: BinaryMask) -> float:
    prob = pred_prob.data if isinstance(pred_prob, ImageTensor) else pred_prob
    prob = np.asarray(prob, dtype=np.float64)
    if prob.ndim == 3:
        prob = prob[:, :, 0]
    if prob.shape != gt.shape:
        raise ShapeMismatchError(
            detail=f"Prediction {prob.shape} and label {gt.shape} differ"
        )
    return float(np.abs(prob - gt.data).mean())


def ber(counts: ConfusionCounts) -> np.ndarray:
    """
    Per-class balanced error rate in percent; NaN for classes whose label has
    no positive or no negative pixels.
    """
    positives = counts.tp + counts.fn
    negatives = counts.tn + counts.fp
    valid = (positives > 0) & (negatives > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = 100.0 * (1.0 - 0.5 * (counts.tp / positives + counts.tn / negatives))
    return np.where(valid, values, np.nan)


def mber(counts: ConfusionCounts) -> Optional[float]:
    values = ber(counts)
    values = values[~np.isnan(values)]
    return float(values.mean()) if values.size else None


class MetricsReport(AppModel):
    acc: float = Field(ge=0.0, le=100.0)
    iou_per_class: dict[str, float]
    miou: float = Field(ge=0.0, le=100.0)
    mae: float = Field(ge=0.0, le=1.0)
    ber_per_class: dict[str, float]
    mber: Optional[float] = Field(default=None, ge=0.0, le=100.0)
    pixel_counts: dict[str, ClassCounts]
    images: int = Field(ge=0)
    splits: dict[str, "MetricsReport"] = Field(default_factory=dict)
    metadata: dict[str, str] = Field(default_factory=dict)


MetricsReport.model_rebuild()


@dataclass(frozen=True, eq=False)
class ImageEvaluation:
    stem: str
    counts: ConfusionCounts
    mae: float


def build_report(
    evaluations: Sequence[ImageEvaluation],
    classes: int,
    metadata: Optional[Mapping[str, str]] = None,
) -> MetricsReport:
    """Order independent reduction of per-image results."""
    counts = ConfusionCounts.empty(classes)
    for evaluation in sorted(evaluations, key=lambda e: e.stem):
        counts = counts + evaluation.counts
    maes = sorted(evaluation.mae for evaluation in evaluations)
    per_class_ber = ber(counts)
    return MetricsReport(
        acc=accuracy_from_counts(counts),
        iou_per_class={str(c): float(v) for c, v in enumerate(iou(counts))},
        miou=miou(counts),
        mae=float(np.mean(maes)) if maes else 0.0,
        ber_per_class={
            str(c): float(v) for c, v in enumerate(per_class_ber) if not np.isnan(v)
        },
        mber=mber(counts),
        pixel_counts={
            str(c): ClassCounts(
                tp=int(counts.tp[c]),
                tn=int(counts.tn[c]),
                fp=int(counts.fp[c]),
                fn=int(counts.fn[c]),
            )
            for c in range(classes)
        },
        images=len(evaluations),
        metadata=dict(metadata or {}),
    )


def evaluate_pair(
    pred_path: Path, gt_path: Path, classes: int, stem: Optional[str] = None
) -> ImageEvaluation:
    """
    Score one prediction file against its label file.

    With two classes the prediction is a foreground probability map (value
    / 255) thresholded at 0.5 and the label reads nonzero as foreground. With
    more classes both files hold raw class ids and MAE compares the
    binarised maps.
    """
    if classes == 2:
        prob = read_gray(pred_path)
        pred_ids = (prob >= 0.5).astype(np.int64)
        gt_ids = (read_class_mask(gt_path).data != 0).astype(np.int64)
    else:
        pred_ids = read_class_mask(pred_path).data
        gt_ids = read_class_mask(gt_path).data
        prob = (pred_ids != 0).astype(np.float64)

    if pred_ids.shape != gt_ids.shape:
        raise ShapeMismatchError(
            detail=f"{Path(pred_path).name}: prediction {pred_ids.shape} and "
            f"label {gt_ids.shape} differ"
        )
    return ImageEvaluation(
        stem=stem or Path(gt_path).stem,
        counts=confusion_counts(pred_ids, gt_ids, classes),
        mae=mae(prob, BinaryMask(gt_ids != 0)),
    )


def _evaluate_job(job: tuple[Path, Path, int, str]) -> ImageEvaluation:
    return evaluate_pair(*job)


def pair_files(pred_dir: Path, gt_dir: Path) -> list[tuple[str, Path, Path]]:
    preds = {path.stem: path for path in Path(pred_dir).glob("*.png")}
    gts = {path.stem: path for path in Path(gt_dir).glob("*.png")}
    missing_pred = sorted(set(gts) - set(preds))
    missing_gt = sorted(set(preds) - set(gts))
    if missing_pred or missing_gt:
        raise NotFoundError(
            detail=f"Unpaired files: no prediction for {missing_pred}, "
            f"no label for {missing_gt}"
        )
    if not gts:
        raise NotFoundError(detail=f"No PNG pairs found in {pred_dir} and {gt_dir}")
    return [(stem, preds[stem], gts[stem]) for stem in sorted(gts)]


def evaluate_dataset(
    pred_dir: Path,
    gt_dir: Path,
    classes: int,
    split_of: Optional[Mapping[str, str]] = None,
    workers: int = 1,
) -> MetricsReport:
    """
    Evaluate every prediction/label pair of two directories (paired by file
    stem). split_of optionally maps stems to split tags, adding one
    sub-report per split.
    """
    if classes < 2:
        raise BadInputError(detail=f"classes must be >= 2, got {classes}")
    jobs = [
        (pred, gt, classes, stem) for stem, pred, gt in pair_files(pred_dir, gt_dir)
    ]
    LOGGER.info("Evaluating %d prediction/label pairs", len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            evaluations = list(pool.map(_evaluate_job, jobs))
    else:
        evaluations = [_evaluate_job(job) for job in jobs]

    report = build_report(evaluations, classes, REPORT_METADATA)
    if split_of:
        grouped: dict[str, list[ImageEvaluation]] = {}
        for evaluation in evaluations:
            tag = split_of.get(evaluation.stem)
            if tag:
                grouped.setdefault(tag, []).append(evaluation)
        report.splits = {
            tag: build_report(group, classes) for tag, group in sorted(grouped.items())
        }
    return report
