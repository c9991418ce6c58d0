"""Batch losses, their output gradients, and classification error."""

import enum

import numpy as np

from .errors import EvaluationError, ShapeError


class LossKind(enum.Enum):
    MSE = "mse"
    CROSSENTROPY = "crossentropy"


def loss_kind(name):
    if isinstance(name, LossKind):
        return name
    name = name.lower()
    # "bce" in the experiment tables is softmax cross-entropy over K classes
    return LossKind({"bce": "crossentropy", "ce": "crossentropy"}.get(name, name))


def _check(pred, targets):
    pred = np.asarray(pred, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if pred.shape != targets.shape or pred.ndim != 2:
        raise ShapeError(f"predictions {pred.shape} and targets {targets.shape} differ")
    return pred, targets


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def batch_loss(kind, predictions, targets):
    """Mean elemental loss over the batch and its gradient w.r.t. predictions.

    MSE averages the squared error over the K outputs of each row;
    cross-entropy applies a row softmax first.
    """
    pred, t = _check(predictions, targets)
    if not np.all(np.isfinite(pred)):
        raise EvaluationError("non-finite network output")
    b, k = pred.shape
    if loss_kind(kind) is LossKind.MSE:
        diff = pred - t
        value = float(np.mean(diff * diff))
        return value, diff * (2.0 / (b * k))
    z = pred - pred.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - logsum
    value = float(-(t * logp).sum() / b)
    p = np.exp(logp)
    return value, (p * t.sum(axis=1, keepdims=True) - t) / b


def classification_error(predictions, targets):
    """Fraction of rows whose argmax disagrees (ties go to the lowest index)."""
    pred, t = _check(predictions, targets)
    if pred.shape[0] == 0:
        return 0.0
    return float(np.mean(pred.argmax(axis=1) != t.argmax(axis=1)))
