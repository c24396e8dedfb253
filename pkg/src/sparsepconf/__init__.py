"""Sparse penalized classification from positive-confidence data."""

from .core import (
    LabeledDataset,
    LossKind,
    PconfDataset,
    logistic_loss,
    pconf_gradient,
    pconf_risk,
    predict,
    sigmoid,
    supervised_gradient,
    supervised_risk,
)
from .estimators import (
    PconfClassifier,
    PconfClassifierCV,
    SparseLogisticClassifier,
    SparseLogisticClassifierCV,
)
from .exceptions import (
    ConfigError,
    DivergenceError,
    DomainError,
    IngestionError,
    PconfError,
    ReplicationFailure,
    ShapeError,
)
from .model_selection import CvReport, LambdaGrid, auto_grid, cross_validate, theoretical_lambda
from .penalties import Penalty, PenaltySpec, penalty_value, prox, prox_l1, prox_mcp, prox_scad
from .solver import FitResult, SolverConfig, composite_objective, fit, fit_supervised, lipschitz_estimate

__version__ = "0.1.0"
