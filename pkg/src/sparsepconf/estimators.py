"""scikit-learn compatible estimators.

``PconfClassifier.fit(X, r)`` takes positive samples and their confidence
scores in place of labels. ``SparseLogisticClassifier`` is the fully
supervised counterpart trained on +/-1 (or 0/1) labels. The ``*CV`` variants
choose the regularization strength by K-fold cross-validation of the
held-out risk.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import core
from .core import LabeledDataset, PconfDataset
from .model_selection import LambdaGrid, auto_grid, cross_validate, fit_at_lambda
from .penalties import PenaltySpec
from .solver import SolverConfig, fit_any
from .validation import check_confidence, check_features, check_labels


class _SparseLinearClassifier(ClassifierMixin, BaseEstimator):
    def _solver_config(self):
        return SolverConfig(
            step=self.step,
            max_epochs=self.max_epochs,
            tol=self.tol,
            init=self.init,
            init_sigma=self.init_sigma,
            seed=self.random_state or 0,
        )

    def _dataset(self, X, target):
        raise NotImplementedError

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_features(X)
        return core.decision_function(X, self.coef_)

    def predict(self, X):
        return np.where(self.decision_function(X) >= 0, 1, -1)

    def predict_proba(self, X):
        p = core.sigmoid(self.decision_function(X))
        return np.column_stack([1 - p, p])

    def _store(self, result):
        self.coef_ = result.beta
        self.support_ = result.support
        self.n_iter_ = result.epochs_run
        self.converged_ = result.converged
        self.objective_trace_ = result.objective_trace
        self.step_ = result.step
        self.classes_ = np.array([-1, 1])
        return self


class _FixedLambda(_SparseLinearClassifier):
    def fit(self, X, y):
        data = self._dataset(X, y)
        self.n_features_in_ = data.d
        spec = PenaltySpec(self.penalty, self.lam, self.shape)
        return self._store(fit_any(data, spec, self._solver_config()))


class _CrossValidated(_SparseLinearClassifier):
    def fit(self, X, y):
        data = self._dataset(X, y)
        self.n_features_in_ = data.d
        if self.lambdas is None:
            grid = auto_grid(data, self.n_lambdas, self.lambda_ratio)
        else:
            grid = LambdaGrid.explicit(self.lambdas)
        cfg = self._solver_config()
        seed = self.random_state or 0
        report = cross_validate(data, self.penalty, grid, self.cv, seed, self.shape, cfg)
        self.cv_report_ = report
        self.lambdas_ = report.lambdas
        self.lambda_ = report.lambda_opt
        result = fit_at_lambda(data, self.penalty, report.lambdas, report.index_opt, self.shape, cfg)
        return self._store(result)


class _PconfMixin:
    def _dataset(self, X, r):
        X = check_features(X)
        return PconfDataset(X, check_confidence(r, X.shape[0]), self.r_min)


class _LabeledMixin:
    def _dataset(self, X, y):
        X = check_features(X)
        return LabeledDataset(X, check_labels(y, X.shape[0]))


class PconfClassifier(_PconfMixin, _FixedLambda):
    """Sparse linear classifier trained on positive-confidence data.

    Parameters
    ----------
    penalty : {"l1", "scad", "mcp"}
    lam : float
        Regularization strength. ``0`` gives the unpenalized Pconf fit.
    shape : float, optional
        SCAD ``a`` (default 3.7) or MCP ``gamma`` (default 3).
    step : float or "auto"
        Proximal gradient step; ``"auto"`` uses 1 / Lipschitz estimate.
    max_epochs, tol : stopping rule (sup-norm change of the coefficients).
    init : {"zero", "gaussian"}; init_sigma : std of the Gaussian start.
    r_min : confidences are clamped to ``[r_min, 1]``.
    random_state : seeds the Gaussian initialization.

    The model has no intercept; prepend a constant column if one is needed.
    """

    def __init__(self, penalty="l1", lam=0.1, shape=None, step="auto", max_epochs=10000,
                 tol=1e-6, init="zero", init_sigma=0.01, r_min=1e-3, random_state=None):
        self.penalty = penalty
        self.lam = lam
        self.shape = shape
        self.step = step
        self.max_epochs = max_epochs
        self.tol = tol
        self.init = init
        self.init_sigma = init_sigma
        self.r_min = r_min
        self.random_state = random_state


class PconfClassifierCV(_PconfMixin, _CrossValidated):
    """:class:`PconfClassifier` with lambda chosen by K-fold CV of the Pconf risk.

    ``lambdas`` fixes the grid explicitly; otherwise ``n_lambdas`` log-spaced
    values run from the smallest lambda that zeroes every coefficient down
    to ``lambda_ratio`` times it. After fitting, ``lambda_`` holds the choice
    and ``cv_report_`` the per-fold risks.
    """

    def __init__(self, penalty="l1", lambdas=None, n_lambdas=50, lambda_ratio=0.01, cv=5,
                 shape=None, step="auto", max_epochs=10000, tol=1e-6, init="zero",
                 init_sigma=0.01, r_min=1e-3, random_state=None):
        self.penalty = penalty
        self.lambdas = lambdas
        self.n_lambdas = n_lambdas
        self.lambda_ratio = lambda_ratio
        self.cv = cv
        self.shape = shape
        self.step = step
        self.max_epochs = max_epochs
        self.tol = tol
        self.init = init
        self.init_sigma = init_sigma
        self.r_min = r_min
        self.random_state = random_state


class SparseLogisticClassifier(_LabeledMixin, _FixedLambda):
    """Penalized logistic regression on fully labeled data (no intercept)."""

    def __init__(self, penalty="l1", lam=0.1, shape=None, step="auto", max_epochs=10000,
                 tol=1e-6, init="zero", init_sigma=0.01, random_state=None):
        self.penalty = penalty
        self.lam = lam
        self.shape = shape
        self.step = step
        self.max_epochs = max_epochs
        self.tol = tol
        self.init = init
        self.init_sigma = init_sigma
        self.random_state = random_state


class SparseLogisticClassifierCV(_LabeledMixin, _CrossValidated):
    def __init__(self, penalty="l1", lambdas=None, n_lambdas=50, lambda_ratio=0.01, cv=5,
                 shape=None, step="auto", max_epochs=10000, tol=1e-6, init="zero",
                 init_sigma=0.01, random_state=None):
        self.penalty = penalty
        self.lambdas = lambdas
        self.n_lambdas = n_lambdas
        self.lambda_ratio = lambda_ratio
        self.cv = cv
        self.shape = shape
        self.step = step
        self.max_epochs = max_epochs
        self.tol = tol
        self.init = init
        self.init_sigma = init_sigma
        self.random_state = random_state
