"""Input validation helpers for the estimator API."""

import logging

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DomainError, ShapeError

log = logging.getLogger(__name__)


def check_features(X):
    return check_array(X, dtype=np.float64, ensure_all_finite=True)


def check_confidence(r, n):
    """Confidence scores as a float vector of length ``n`` with values in (0, 1]."""
    r = np.asarray(r, dtype=float).ravel()
    if r.shape[0] != n:
        raise ShapeError(f"got {r.shape[0]} confidence scores for {n} samples")
    if not np.all(np.isfinite(r)) or np.any(r <= 0) or np.any(r > 1):
        raise DomainError("confidence scores must lie in (0, 1]")
    return r


def check_labels(y, n):
    """Labels as +/-1 floats; a {0, 1} labeling is mapped 1 -> +1, 0 -> -1."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != n:
        raise ShapeError(f"got {y.shape[0]} labels for {n} samples")
    values = set(np.unique(y).tolist())
    if values <= {-1.0, 1.0}:
        return y
    if values <= {0.0, 1.0}:
        log.info("mapping 0/1 labels to -1/+1")
        return np.where(y == 1, 1.0, -1.0)
    raise DomainError(f"labels must be +/-1 or 0/1, got values {sorted(values)}")
