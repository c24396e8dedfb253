"""Proximal gradient descent for penalized Pconf and supervised logistic risks."""

from dataclasses import dataclass, field

import numpy as np

from .core import LabeledDataset, PconfDataset, risk_and_gradient
from .exceptions import ConfigError, DivergenceError, ShapeError
from .penalties import PenaltySpec, penalty_terms, penalty_value, prox_operator

LIPSCHITZ_FLOOR = 1e-12
POWER_ITERATIONS = 50
# fraction of the prox validity bound used when an automatic step would exceed it
STEP_SAFETY = 0.9


@dataclass(frozen=True)
class SolverConfig:
    """Step size, stopping rule and initialization.

    ``step`` is a positive float or ``"auto"`` (1 / estimated Lipschitz
    constant). ``init`` is ``"zero"`` or ``"gaussian"``; the latter draws
    ``N(0, init_sigma^2)`` entries from ``seed``.
    """

    step: object = "auto"
    max_epochs: int = 10000
    tol: float = 1e-6
    init: str = "zero"
    init_sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.step, str):
            if self.step.lower() != "auto":
                raise ConfigError(f"step must be a positive number or 'auto', got {self.step!r}")
            object.__setattr__(self, "step", "auto")
        elif not (np.isfinite(self.step) and self.step > 0):
            raise ConfigError(f"step must be positive, got {self.step}")
        if int(self.max_epochs) < 1:
            raise ConfigError("max_epochs must be >= 1")
        object.__setattr__(self, "max_epochs", int(self.max_epochs))
        if not self.tol > 0:
            raise ConfigError("tol must be > 0")
        if self.init not in ("zero", "gaussian"):
            raise ConfigError(f"init must be 'zero' or 'gaussian', got {self.init!r}")
        if not self.init_sigma > 0:
            raise ConfigError("init_sigma must be > 0")

    def initial_beta(self, d):
        if self.init == "zero":
            return np.zeros(d)
        rng = np.random.Generator(np.random.Philox(key=self.seed))
        return self.init_sigma * rng.standard_normal(d)


@dataclass
class FitResult:
    beta: np.ndarray
    epochs_run: int
    converged: bool
    objective_trace: np.ndarray
    step: float
    spec: PenaltySpec
    support: np.ndarray = field(init=False)

    def __post_init__(self):
        self.support = np.flatnonzero(self.beta)

    @property
    def objective(self):
        return float(self.objective_trace[-1])


def lipschitz_estimate(data):
    """Upper-bound estimate of the risk gradient's Lipschitz constant.

    Uses ``l'' <= 1/4``: ``L = lambda_max(X^T D X) / (4 n)`` with
    ``D = diag(1 + alpha)`` for Pconf data and the identity otherwise. The
    top eigenvalue comes from power iteration started at a fixed vector.
    """
    X = data.X
    w = 1.0 + data.alpha if isinstance(data, PconfDataset) else np.ones(data.n)
    v = np.random.Generator(np.random.Philox(key=0)).standard_normal(data.d)
    v /= np.linalg.norm(v)
    top = 0.0
    for _ in range(POWER_ITERATIONS):
        u = X.T @ (w * (X @ v))
        top = np.linalg.norm(u)
        if top == 0.0:
            return LIPSCHITZ_FLOOR
        v = u / top
    # Rayleigh quotient of the final iterate
    top = float(v @ (X.T @ (w * (X @ v))))
    return max(top / (4.0 * data.n), LIPSCHITZ_FLOOR)


def resolve_step(data, spec, cfg):
    """Numeric step for ``cfg``; an automatic step is kept inside the prox's validity range."""
    if cfg.step != "auto":
        return float(cfg.step)
    step = 1.0 / lipschitz_estimate(data)
    return min(step, STEP_SAFETY * spec.max_step())


def composite_objective(data, beta, spec):
    r, _ = risk_and_gradient(data, beta)
    return r + penalty_value(spec, beta)


def _smooth_part(data):
    """Return ``beta -> (risk, gradient)`` specialised to the dataset kind."""
    X, n = data.X, data.n
    if isinstance(data, PconfDataset):
        alpha = data.alpha

        def evaluate(beta):
            g = X @ beta
            sp = np.logaddexp(0.0, g)  # l(-g); l(g) = sp - g
            loss = (sp - g) + alpha * sp
            d = alpha * np.exp(g - sp) - np.exp(-sp)
            return loss.sum() / n, X.T @ d / n

    else:
        y = data.y

        def evaluate(beta):
            m = y * (X @ beta)
            sp = np.logaddexp(0.0, -m)
            return sp.sum() / n, X.T @ (-y * np.exp(-m - sp)) / n

    return evaluate


def _run(data, spec, cfg, beta_init, step):
    d = data.d
    beta = cfg.initial_beta(d) if beta_init is None else np.array(beta_init, dtype=float)
    if beta.shape != (d,):
        raise ShapeError(f"initial beta has shape {beta.shape}, expected ({d},)")
    eta = resolve_step(data, spec, cfg) if step is None else float(step)
    backward = prox_operator(spec, eta)
    forward = _smooth_part(data)
    penalized = spec.lam > 0

    trace = []
    converged = False
    epoch = 0
    # overflow shows up as a non-finite objective, which is checked explicitly
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, cfg.max_epochs + 1):
            r, grad = forward(beta)
            obj = r + penalty_terms(spec, beta).sum() if penalized else r
            if not np.isfinite(obj):
                raise DivergenceError(epoch - 1)
            trace.append(obj)
            new = backward(beta - eta * grad)
            change = np.abs(new - beta).max()
            beta = new
            if change < cfg.tol:
                converged = True
                break
        r, _ = forward(beta)
        obj = r + penalty_value(spec, beta)
    if not np.isfinite(obj):
        raise DivergenceError(epoch)
    trace.append(obj)
    return FitResult(beta, epoch, converged, np.asarray(trace), eta, spec)


def fit(data, spec, cfg=None, beta_init=None, step=None):
    """Minimize the Pconf risk plus penalty.

    ``beta_init`` overrides the configured initialization (warm start);
    ``step`` overrides the resolved step size.
    """
    if not isinstance(data, PconfDataset):
        raise TypeError("fit expects a PconfDataset; use fit_supervised for labeled data")
    return _run(data, spec, cfg or SolverConfig(), beta_init, step)


def fit_supervised(data, spec, cfg=None, beta_init=None, step=None):
    if not isinstance(data, LabeledDataset):
        raise TypeError("fit_supervised expects a LabeledDataset")
    return _run(data, spec, cfg or SolverConfig(), beta_init, step)


def fit_any(data, spec, cfg=None, beta_init=None, step=None):
    return _run(data, spec, cfg or SolverConfig(), beta_init, step)


def fit_path(data, spec, lambdas, cfg=None, step=None, stop_unconverged=False):
    """Fit along ``lambdas`` (descending), warm-starting each fit from the previous one.

    The step size is resolved once and shared by the whole path. With
    ``stop_unconverged`` the path ends after the first fit that exhausts the
    epoch budget, so the result may be shorter than ``lambdas``.
    """
    cfg = cfg or SolverConfig()
    eta = resolve_step(data, spec, cfg) if step is None else step
    results = []
    beta = None
    for lam in lambdas:
        res = _run(data, spec.with_lambda(lam), cfg, beta, eta)
        beta = res.beta
        results.append(res)
        if stop_unconverged and not res.converged:
            break
    return results
