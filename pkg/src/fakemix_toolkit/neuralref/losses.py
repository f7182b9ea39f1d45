import logging
from typing import Union

import numpy as np
from scipy.special import log_softmax, softmax

from fakemix_toolkit.common.error_handling import BadInputError, ShapeMismatchError
from fakemix_toolkit.imagecore import BinaryMask, ClassMask, ImageTensor

LOGGER = logging.getLogger(__name__)

DICE_SMOOTH = 1.0

ProbabilityMap = Union[ImageTensor, np.ndarray]


def _probabilities(pred: ProbabilityMap, gt: BinaryMask) -> np.ndarray:
    array = pred.data if isinstance(pred, ImageTensor) else np.asarray(pred, float)
    if array.ndim == 3:
        if array.shape[2] != 1:
            raise ShapeMismatchError(detail="Dice needs a single channel prediction")
        array = array[:, :, 0]
    if array.shape != gt.shape:
        raise ShapeMismatchError(
            detail=f"Prediction {array.shape} and label {gt.shape} differ"
        )
    return array.astype(np.float64)


def dice_loss(pred: ProbabilityMap, gt: BinaryMask, eps: float = DICE_SMOOTH) -> float:
    """1 - (2 * sum(p * g) + eps) / (sum(p) + sum(g) + eps)"""
    p = _probabilities(pred, gt)
    g = gt.data.astype(np.float64)
    overlap = float((p * g).sum())
    total = float(p.sum() + g.sum())
    return 1.0 - (2.0 * overlap + eps) / (total + eps)


def dice_loss_grad(
    pred: ProbabilityMap, gt: BinaryMask, eps: float = DICE_SMOOTH
) -> np.ndarray:
    p = _probabilities(pred, gt)
    g = gt.data.astype(np.float64)
    numerator = 2.0 * float((p * g).sum()) + eps
    denominator = float(p.sum() + g.sum()) + eps
    return -(2.0 * g * denominator - numerator) / denominator**2


def _check_logits(logits: ImageTensor, gt: ClassMask) -> np.ndarray:
    if (logits.height, logits.width) != gt.shape:
        raise ShapeMismatchError(
            detail=f"Logits {logits.shape[:2]} and label {gt.shape} differ"
        )
    labels = gt.data
    if labels.max(initial=0) >= logits.channels:
        raise BadInputError(
            detail=f"Label id {labels.max()} has no logit "
            f"among {logits.channels} classes"
        )
    return labels


def cross_entropy_loss(logits: ImageTensor, gt: ClassMask) -> float:
    """Mean over pixels of -log softmax(logits)[gt]."""
    labels = _check_logits(logits, gt)
    log_probs = log_softmax(logits.data, axis=2)
    picked = np.take_along_axis(log_probs, labels[:, :, np.newaxis], axis=2)
    return float(-picked.mean())


def cross_entropy_grad(logits: ImageTensor, gt: ClassMask) -> np.ndarray:
    labels = _check_logits(logits, gt)
    probs = softmax(logits.data, axis=2)
    onehot = np.eye(logits.channels)[labels]
    return (probs - onehot) / labels.size
