"""Regularization grids, K-fold cross-validation and the theoretical lambda."""

import math
from dataclasses import dataclass

import numpy as np

from .core import LabeledDataset, gradient, risk
from .exceptions import ConfigError, DomainError
from .penalties import PenaltySpec
from .solver import SolverConfig, fit_path, resolve_step

DEGENERATE_LAMBDA = 1e-6


@dataclass(frozen=True)
class LambdaGrid:
    values: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ConfigError("lambda grid is empty")
        if not np.all(v > 0) or not np.all(np.isfinite(v)):
            raise ConfigError("lambda grid values must be positive and finite")
        if np.any(np.diff(v) >= 0):
            raise ConfigError("lambda grid must be strictly decreasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def explicit(cls, values):
        return cls(np.sort(np.asarray(values, dtype=float))[::-1])

    def __len__(self):
        return self.values.size


def lambda_max(data):
    """Smallest lambda at which zero is an L1 fixed point."""
    return float(np.max(np.abs(gradient(data, np.zeros(data.d)))))


def auto_grid(data, n_points=50, ratio=0.01):
    """Log-spaced grid from ``lambda_max`` down to ``ratio * lambda_max``.

    When the gradient at zero vanishes the grid collapses to
    ``[1e-6]`` and ``degenerate`` is set.
    """
    if n_points < 1 or not 0 < ratio < 1:
        raise ConfigError("need n_points >= 1 and 0 < ratio < 1")
    top = lambda_max(data)
    if top <= 0.0:
        return LambdaGrid(np.array([DEGENERATE_LAMBDA]), degenerate=True)
    return LambdaGrid(np.geomspace(top, ratio * top, n_points))


def fold_assignment(n, k, seed):
    """Fold index per sample: a seeded shuffle cut into ``k`` contiguous blocks."""
    if k < 2:
        raise ConfigError(f"need at least 2 folds, got {k}")
    if n < k:
        raise ConfigError(f"cannot split {n} samples into {k} non-empty folds")
    perm = np.random.Generator(np.random.Philox(key=seed)).permutation(n)
    folds = np.empty(n, dtype=int)
    for i, block in enumerate(np.array_split(perm, k)):
        folds[block] = i
    return folds


@dataclass
class CvReport:
    lambdas: np.ndarray
    per_lambda_risk: np.ndarray  # (grid, folds)
    cv_curve: np.ndarray
    lambda_opt: float
    index_opt: int
    fold_assignment_seed: int
    folds: np.ndarray


def _truncates(data, stop_unconverged):
    # separable labeled data sends unpenalized directions to infinity at small lambda
    return isinstance(data, LabeledDataset) if stop_unconverged is None else stop_unconverged


def cross_validate(data, family, grid, k=5, seed=0, shape=None, cfg=None, folds=None,
                   stop_unconverged=None):
    """K-fold CV of the held-out empirical risk over ``grid``.

    Works for Pconf data (held-out Pconf risk) and labeled data (held-out
    logistic risk). Each fold is fitted along the grid with warm starts.
    ``folds`` may give an explicit fold index per sample; otherwise folds
    come from :func:`fold_assignment`. Ties in the CV curve go to the larger
    lambda.

    When ``stop_unconverged`` is true (the default for labeled data) a fold's
    path stops at its first fit that hits the epoch budget; the lambdas it
    did not reach get an infinite held-out risk and cannot be selected.
    """
    cfg = cfg or SolverConfig()
    if not isinstance(grid, LambdaGrid):
        grid = LambdaGrid.explicit(grid)
    if folds is None:
        folds = fold_assignment(data.n, k, seed)
    else:
        folds = np.asarray(folds, dtype=int)
        if folds.shape != (data.n,):
            raise ConfigError("explicit fold assignment must have one entry per sample")
        k = int(folds.max()) + 1
        if k < 2:
            raise ConfigError("need at least 2 folds")
    spec = PenaltySpec(family, 0.0, shape)
    table = np.empty((len(grid), k))
    for j in range(k):
        held = folds == j
        if not held.any() or held.all():
            raise ConfigError(f"fold {j} has no samples")
        train, valid = data.subset(~held), data.subset(held)
        path = fit_path(train, spec, grid.values, cfg, stop_unconverged=_truncates(data, stop_unconverged))
        table[:, j] = np.inf
        table[: len(path), j] = [risk(valid, res.beta) for res in path]
    curve = table.mean(axis=1)
    if np.isinf(curve[0]):
        raise ConfigError("no lambda on the grid could be fitted on every fold")
    best = int(np.argmin(curve))  # grid is descending, so the first minimum is the largest lambda
    return CvReport(grid.values.copy(), table, curve, float(grid.values[best]), best, seed, folds)


def fit_at_lambda(data, family, lambdas, index, shape=None, cfg=None):
    """Refit on all of ``data`` along ``lambdas[:index+1]`` and return the last fit."""
    spec = PenaltySpec(family, 0.0, shape)
    cfg = cfg or SolverConfig()
    return fit_path(data, spec, np.asarray(lambdas)[: index + 1], cfg, resolve_step(data, spec, cfg))[-1]


def theoretical_lambda(B, W, L1, n, d, delta):
    """``L1 (1 + W) B sqrt(2 log(2d/delta) / n)``.

    ``B`` bounds the feature magnitudes, ``L1`` the loss derivative and
    ``W`` the confidence weights ``(1 - r)/r``.
    """
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if min(B, L1, n, d) <= 0 or W < 0:
        raise DomainError("B, L1, n and d must be positive and W non-negative")
    return L1 * (1 + W) * B * math.sqrt(2 * math.log(2 * d / delta) / n)
