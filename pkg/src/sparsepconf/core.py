"""Datasets, the logistic loss and the Pconf / supervised empirical risks."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from .exceptions import DomainError, ShapeError

R_MIN = 1e-3


class LossKind(Enum):
    LOGISTIC = "logistic"


def _finite(z, name="z"):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError(f"{name} must be finite")
    return z


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def logistic_loss(z):
    """log(1 + exp(-z)), overflow safe. Accepts scalars or arrays."""
    z = _finite(z)
    return _scalar_or_array(np.logaddexp(0.0, -z))


def sigmoid(z):
    z = _finite(z)
    return _scalar_or_array(expit(z))


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_matrix(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-dimensional, got shape {X.shape}")
    n, d = X.shape
    if n == 0 or d == 0:
        raise ShapeError(f"X must have at least one row and one column, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError("X contains non-finite entries")
    return X


@dataclass(frozen=True, eq=False)
class PconfDataset:
    """Positive samples ``X`` with confidences ``r``.

    ``r`` is clamped into ``[r_min, 1]`` on construction and the weights
    ``alpha = (1 - r) / r`` are cached. Instances are immutable; use
    :meth:`with_confidence` to get a copy with new scores.
    """

    X: np.ndarray
    r: np.ndarray
    r_min: float = R_MIN

    def __post_init__(self):
        X = _check_matrix(self.X)
        r = np.asarray(self.r, dtype=float).ravel()
        if r.shape[0] != X.shape[0]:
            raise ShapeError(f"r has {r.shape[0]} entries but X has {X.shape[0]} rows")
        if not np.all(np.isfinite(r)):
            raise DomainError("r contains non-finite entries")
        if not 0 < self.r_min <= 1:
            raise DomainError("r_min must lie in (0, 1]")
        r = np.clip(r, self.r_min, 1.0)
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "r", _readonly(r))
        object.__setattr__(self, "alpha", _readonly((1.0 - r) / r))

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def with_confidence(self, r):
        return PconfDataset(self.X, r, self.r_min)

    def subset(self, idx):
        return PconfDataset(self.X[idx], self.r[idx], self.r_min)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Fully labeled data with ``y`` in {+1, -1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = _check_matrix(self.X)
        y = np.asarray(self.y, dtype=float).ravel()
        if y.shape[0] != X.shape[0]:
            raise ShapeError(f"y has {y.shape[0]} entries but X has {X.shape[0]} rows")
        if not np.all((y == 1) | (y == -1)):
            raise DomainError("labels must be exactly +1 or -1")
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "y", _readonly(y))

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def subset(self, idx):
        return LabeledDataset(self.X[idx], self.y[idx])


def _margins(X, beta):
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.shape[0] != X.shape[1]:
        raise ShapeError(f"beta has length {beta.shape[0]}, expected {X.shape[1]}")
    return X @ beta


def pconf_terms(alpha, g):
    """Per-sample loss ``l(g) + alpha l(-g)`` and its derivative in ``g``."""
    loss = np.logaddexp(0.0, -g) + alpha * np.logaddexp(0.0, g)
    d = -expit(-g) + alpha * expit(g)
    return loss, d


def supervised_terms(y, g):
    m = y * g
    return np.logaddexp(0.0, -m), -y * expit(-m)


def pconf_risk(data, beta):
    g = _margins(data.X, beta)
    loss, _ = pconf_terms(data.alpha, g)
    return float(loss.mean())


def pconf_gradient(data, beta):
    g = _margins(data.X, beta)
    _, d = pconf_terms(data.alpha, g)
    return data.X.T @ d / data.n


def supervised_risk(data, beta):
    g = _margins(data.X, beta)
    loss, _ = supervised_terms(data.y, g)
    return float(loss.mean())


def supervised_gradient(data, beta):
    g = _margins(data.X, beta)
    _, d = supervised_terms(data.y, g)
    return data.X.T @ d / data.n


def risk(data, beta):
    """Empirical risk of either dataset kind."""
    if isinstance(data, PconfDataset):
        return pconf_risk(data, beta)
    return supervised_risk(data, beta)


def gradient(data, beta):
    if isinstance(data, PconfDataset):
        return pconf_gradient(data, beta)
    return supervised_gradient(data, beta)


def risk_and_gradient(data, beta):
    """Both quantities from a single pass over ``X @ beta``."""
    g = _margins(data.X, beta)
    if isinstance(data, PconfDataset):
        loss, d = pconf_terms(data.alpha, g)
    else:
        loss, d = supervised_terms(data.y, g)
    return float(loss.mean()), data.X.T @ d / data.n


def decision_function(X, beta):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-dimensional, got shape {X.shape}")
    return _margins(X, beta)


def predict(X, beta):
    """Labels in {+1, -1}; a zero margin is labeled +1."""
    return np.where(decision_function(X, beta) >= 0, 1, -1)
