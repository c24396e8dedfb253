"""Synthetic data generation, evaluation metrics and Monte Carlo experiments.

Randomness comes from numpy's Philox counter-based generator. Replication
``i`` of a design with ``base_seed`` uses the key ``base_seed + i``. Its
second substream (``jumped(1)``) is reserved for the single redraw allowed
when a training sample has no positives.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from .core import LabeledDataset, PconfDataset, predict
from .exceptions import ConfigError, DomainError, ReplicationFailure
from .model_selection import auto_grid, cross_validate, fit_at_lambda
from .penalties import Penalty, PenaltySpec
from .solver import SolverConfig, fit_any

log = logging.getLogger(__name__)

METHODS = ("Pconf", "Pconf-Lasso", "Pconf-SCAD", "Pconf-MCP", "Lasso", "SCAD", "MCP")
PCONF_METHODS = METHODS[:4]
METRICS = ("prediction", "l2sq", "tpr", "fdr", "size")
MAX_FAILURE_RATE = 0.05

_FAMILY = {"Lasso": Penalty.L1, "SCAD": Penalty.SCAD, "MCP": Penalty.MCP}


def make_rng(seed, substream=0):
    bitgen = np.random.Philox(key=int(seed))
    if substream:
        bitgen = bitgen.jumped(substream)
    return np.random.Generator(bitgen)


def default_beta_star(d):
    if d < 3:
        raise ConfigError("the default beta* needs d >= 3")
    beta = np.zeros(d)
    beta[:3] = (1.0, -1.0, 0.5)
    return beta


@dataclass(frozen=True)
class SimDesign:
    n: int = 200
    d: int = 320
    rho_x: float = 0.0
    link: str = "logistic"
    beta_star: np.ndarray = None
    n_test: int = 5000
    test_labels: str = "deterministic"
    replications: int = 100
    base_seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1 or self.n_test < 1:
            raise ConfigError("n, d and n_test must be positive")
        if not 0 <= self.rho_x < 1:
            raise ConfigError(f"rho_x must lie in [0, 1), got {self.rho_x}")
        if self.link not in ("logistic", "probit"):
            raise ConfigError(f"link must be 'logistic' or 'probit', got {self.link!r}")
        if self.test_labels not in ("deterministic", "noisy"):
            raise ConfigError("test_labels must be 'deterministic' or 'noisy'")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        beta = default_beta_star(self.d) if self.beta_star is None else np.asarray(self.beta_star, float)
        if beta.shape != (self.d,):
            raise ConfigError(f"beta_star must have length {self.d}")
        object.__setattr__(self, "beta_star", beta)

    @property
    def design_id(self):
        return (
            f"n{self.n}_d{self.d}_rho{self.rho_x:g}_{self.link}_{self.test_labels}"
        )


def sample_mvn_ar1(n, d, rho, rng):
    """Rows i.i.d. N(0, Sigma) with Sigma_ij = rho^|i-j|, via the AR(1) recurrence."""
    if not 0 <= rho < 1:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    z = rng.standard_normal((n, d))
    if rho == 0:
        return z
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    scale = np.sqrt(1 - rho**2)
    for j in range(1, d):
        x[:, j] = rho * x[:, j - 1] + scale * z[:, j]
    return x


def _confidence(eta, link):
    return expit(eta) if link == "logistic" else norm.cdf(eta)


def _draw_training(design, rng):
    X = sample_mvn_ar1(design.n, design.d, design.rho_x, rng)
    r = _confidence(X @ design.beta_star, design.link)
    y = np.where(rng.random(design.n) < r, 1.0, -1.0)
    return X, r, y


def generate_pconf_training(design, rng, fallback_rng=None):
    """Draw a training sample; return (Pconf data of the positives, full labeled data).

    If no sample is positive the draw is repeated once with ``fallback_rng``.
    """
    X, r, y = _draw_training(design, rng)
    if not np.any(y == 1):
        if fallback_rng is None:
            raise ConfigError("training sample has no positive labels")
        log.warning("no positives drawn; retrying on the next substream")
        X, r, y = _draw_training(design, fallback_rng)
        if not np.any(y == 1):
            raise ConfigError("training sample has no positive labels after one redraw")
    pos = y == 1
    return PconfDataset(X[pos], r[pos]), LabeledDataset(X, y)


def generate_test(design, rng):
    X = sample_mvn_ar1(design.n_test, design.d, design.rho_x, rng)
    score = X @ design.beta_star
    if design.test_labels == "noisy":
        score = score + rng.standard_normal(design.n_test)
    return LabeledDataset(X, np.where(score >= 0, 1.0, -1.0))


@dataclass
class MetricRow:
    method: str
    prediction: float
    l2sq: float
    tpr: float
    fdr: float
    size: int

    def as_tuple(self):
        return tuple(getattr(self, m) for m in METRICS)


def evaluate(beta_hat, beta_star, test, method=""):
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_star = np.asarray(beta_star, dtype=float)
    if beta_hat.shape != beta_star.shape or beta_hat.shape[0] != test.d:
        raise ConfigError("beta_hat, beta_star and the test design must share a dimension")
    selected = beta_hat != 0
    truth = beta_star != 0
    tp = int(np.sum(selected & truth))
    fp = int(np.sum(selected & ~truth))
    fn = int(np.sum(~selected & truth))
    return MetricRow(
        method=method,
        prediction=float(np.mean(predict(test.X, beta_hat) == test.y)),
        l2sq=float(np.sum((beta_hat - beta_star) ** 2)),
        tpr=tp / (tp + fn) if tp + fn else 0.0,
        fdr=fp / (tp + fp) if tp + fp else 0.0,
        size=int(selected.sum()),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    folds: int = 5
    n_lambdas: int = 50
    lambda_ratio: float = 0.01
    solver: SolverConfig = field(default_factory=SolverConfig)


def fit_method(method, pconf, labeled, cfg, seed):
    """Fit one named method; penalized methods pick lambda by K-fold CV."""
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method == "Pconf":
        return fit_any(pconf, PenaltySpec(Penalty.L1, 0.0), cfg.solver).beta
    data = pconf if method.startswith("Pconf-") else labeled
    family = _FAMILY[method.split("-")[-1]]
    grid = auto_grid(data, cfg.n_lambdas, cfg.lambda_ratio)
    report = cross_validate(data, family, grid, cfg.folds, seed, cfg=cfg.solver)
    return fit_at_lambda(data, family, report.lambdas, report.index_opt, cfg=cfg.solver).beta


def run_replication(design, methods, cfg, index):
    seed = design.base_seed + index
    rng = make_rng(seed)
    pconf, labeled = generate_pconf_training(design, rng, make_rng(seed, 1))
    test = generate_test(design, rng)
    return [evaluate(fit_method(m, pconf, labeled, cfg, seed), design.beta_star, test, m) for m in methods]


def _replication_task(args):
    design, methods, cfg, index = args
    try:
        return index, run_replication(design, methods, cfg, index), None
    except Exception as exc:  # recorded per replication, judged in aggregate
        return index, None, f"{type(exc).__name__}: {exc}"


@dataclass
class ExperimentReport:
    design: SimDesign
    methods: tuple
    rows: dict  # replication index -> list[MetricRow]
    failures: list  # (seed, message)

    def metric_matrix(self, method):
        """(replications, metrics) array for ``method`` over successful replications."""
        k = self.methods.index(method)
        return np.array([self.rows[i][k].as_tuple() for i in sorted(self.rows)], dtype=float)

    def summary(self):
        """Per method: {metric: (mean, sd)} with the sample standard deviation."""
        out = {}
        for method in self.methods:
            m = self.metric_matrix(method)
            sd = m.std(axis=0, ddof=1) if m.shape[0] > 1 else np.full(m.shape[1], np.nan)
            out[method] = {name: (float(m[:, j].mean()), float(sd[j])) for j, name in enumerate(METRICS)}
        return out


def run_experiment(design, methods=METHODS, cfg=None, jobs=1, progress=None):
    """Run ``design.replications`` independent replications and collect metrics.

    Failed replications are dropped when fewer than 5% fail; otherwise
    :class:`ReplicationFailure` is raised listing the failing seeds.
    """
    cfg = cfg or ExperimentConfig()
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    tasks = [(design, methods, cfg, i) for i in range(design.replications)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_replication_task, tasks))
    else:
        results = map(_replication_task, tasks)
    rows, failures = {}, []
    for index, metrics, error in results:
        if error is None:
            rows[index] = metrics
        else:
            failures.append((design.base_seed + index, error))
        if progress is not None:
            progress(index, error)
    failures.sort()
    if failures and len(failures) >= MAX_FAILURE_RATE * design.replications:
        raise ReplicationFailure(failures, design.replications)
    for seed, error in failures:
        log.warning("replication with seed %d failed and is excluded: %s", seed, error)
    return ExperimentReport(design, methods, rows, failures)
