import numpy as np
import pytest
from scipy.optimize import minimize
from sklearn.linear_model import LogisticRegression

from conftest import random_pconf
from sparsepconf import (
    DivergenceError,
    LabeledDataset,
    PconfDataset,
    PenaltySpec,
    SolverConfig,
    composite_objective,
    fit,
    fit_supervised,
    lipschitz_estimate,
    pconf_gradient,
    pconf_risk,
    prox,
)
from sparsepconf.exceptions import ConfigError
from sparsepconf.solver import fit_path, resolve_step


def lowdim_pconf(rng, n=400, d=4):
    X = rng.standard_normal((n, d))
    beta = np.array([1.0, -0.5, 0.25, 0.0])[:d]
    r = 1 / (1 + np.exp(-(X @ beta) - rng.normal(0, 0.5, n)))
    return PconfDataset(X, r)


class TestLipschitz:
    def test_diagonal_case(self):
        assert lipschitz_estimate(PconfDataset(np.eye(2), [0.5, 0.5])) == pytest.approx(0.25, rel=1e-12)

    def test_quadratic_homogeneity(self, rng):
        data = random_pconf(rng, 20, 5)
        scaled = PconfDataset(3 * data.X, data.r)
        assert lipschitz_estimate(scaled) == pytest.approx(9 * lipschitz_estimate(data), rel=1e-9)

    def test_dense_eigensolver(self, rng):
        for _ in range(10):
            data = random_pconf(rng, 20, 5)
            M = data.X.T @ np.diag(1 + data.alpha) @ data.X
            exact = np.linalg.eigvalsh(M)[-1] / (4 * data.n)
            assert lipschitz_estimate(data) == pytest.approx(exact, rel=0.01)
            lab = LabeledDataset(data.X, np.ones(data.n))
            exact = np.linalg.eigvalsh(data.X.T @ data.X)[-1] / (4 * data.n)
            assert lipschitz_estimate(lab) == pytest.approx(exact, rel=0.01)

    def test_zero_matrix_floor(self):
        assert lipschitz_estimate(PconfDataset(np.zeros((3, 2)), [0.5] * 3)) == 1e-12


class TestFit:
    def test_zero_fixed_point(self, rng):
        data = random_pconf(rng, 40, 10)
        lam = np.abs(pconf_gradient(data, np.zeros(10))).max() * 1.01
        res = fit(data, PenaltySpec("l1", lam))
        assert res.converged and res.epochs_run <= 2
        np.testing.assert_array_equal(res.beta, np.zeros(10))
        assert res.support.size == 0

    def test_unpenalized_matches_quasi_newton(self, rng):
        data = lowdim_pconf(rng)
        X, alpha = data.X, data.alpha

        def objective(b):
            g = X @ b
            return np.mean(np.log1p(np.exp(-g)) + alpha * np.log1p(np.exp(g)))

        ref = minimize(objective, np.zeros(data.d), method="BFGS", options={"gtol": 1e-10}).x
        res = fit(data, PenaltySpec("l1", 0.0), SolverConfig(tol=1e-9, max_epochs=100000))
        assert res.converged
        assert np.abs(res.beta - ref).max() < 1e-3

    def test_supervised_unpenalized_matches_sklearn(self, rng):
        X = rng.standard_normal((300, 4))
        y = np.where(rng.random(300) < 1 / (1 + np.exp(-X @ [1.0, -1.0, 0.5, 0.0])), 1.0, -1.0)
        ref = LogisticRegression(penalty=None, fit_intercept=False, tol=1e-10, max_iter=10000).fit(X, y)
        res = fit_supervised(LabeledDataset(X, y), PenaltySpec("l1", 0.0), SolverConfig(tol=1e-9, max_epochs=100000))
        assert np.abs(res.beta - ref.coef_.ravel()).max() < 1e-3

    @pytest.mark.parametrize("family", ["l1", "scad", "mcp"])
    def test_pconf_unit_confidence_equals_all_positive(self, family, rng):
        X = rng.standard_normal((60, 8))
        spec = PenaltySpec(family, 0.05)
        a = fit(PconfDataset(X, np.ones(60)), spec)
        b = fit_supervised(LabeledDataset(X, np.ones(60)), spec)
        assert np.abs(a.beta - b.beta).max() < 1e-8

    def test_descent_l1(self, rng):
        for _ in range(10):
            data = random_pconf(rng, 50, 80)
            res = fit(data, PenaltySpec("l1", 0.02), SolverConfig(max_epochs=2000))
            assert np.all(np.diff(res.objective_trace) <= 1e-10)

    @pytest.mark.parametrize("family", ["l1", "scad", "mcp"])
    def test_fixed_point_residual(self, family, rng):
        data = random_pconf(rng, 80, 20)
        spec = PenaltySpec(family, 0.05)
        cfg = SolverConfig()
        res = fit(data, spec, cfg)
        assert res.converged
        again = prox(spec, res.beta - res.step * pconf_gradient(data, res.beta), res.step)
        assert np.abs(again - res.beta).max() < 10 * cfg.tol

    def test_exact_sparsity(self, rng):
        data = random_pconf(rng, 50, 100)
        res = fit(data, PenaltySpec("l1", 0.05))
        zeroed = res.beta[np.setdiff1d(np.arange(100), res.support)]
        assert zeroed.size > 0
        assert np.all(zeroed == 0.0)
        assert zeroed.tobytes() == np.zeros(zeroed.size).tobytes()

    def test_determinism(self, rng):
        data = random_pconf(rng, 40, 30)
        cfg = SolverConfig(init="gaussian", init_sigma=0.01, seed=5)
        a = fit(data, PenaltySpec("mcp", 0.03), cfg)
        b = fit(data, PenaltySpec("mcp", 0.03), cfg)
        assert a.beta.tobytes() == b.beta.tobytes()
        assert a.objective_trace.tobytes() == b.objective_trace.tobytes()
        c = fit(data, PenaltySpec("mcp", 0.03), SolverConfig(init="gaussian", seed=6, max_epochs=1))
        assert c.beta.tobytes() != a.beta.tobytes()

    def test_divergence_error(self, rng):
        data = random_pconf(rng, 10, 3)
        with pytest.raises(DivergenceError) as info:
            fit(data, PenaltySpec("l1", 0.0), SolverConfig(step=1e308, max_epochs=50))
        assert info.value.epoch >= 1

    def test_invalid_fixed_step_for_mcp(self, rng):
        data = random_pconf(rng, 10, 3)
        with pytest.raises(ConfigError):
            fit(data, PenaltySpec("mcp", 0.1, 3.0), SolverConfig(step=3.5))

    def test_auto_step_respects_prox_range(self):
        # tiny Lipschitz constant would otherwise give a step beyond a - 1
        data = LabeledDataset(0.01 * np.eye(3), [1, -1, 1])
        step = resolve_step(data, PenaltySpec("scad", 0.1), SolverConfig())
        assert step < 2.7
        assert fit_supervised(data, PenaltySpec("scad", 0.1)).step == step

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SolverConfig(tol=0)
        with pytest.raises(ConfigError):
            SolverConfig(max_epochs=0)
        with pytest.raises(ConfigError):
            SolverConfig(step="fast")
        with pytest.raises(ConfigError):
            SolverConfig(init="uniform")


class TestCompositeObjective:
    def test_origin(self, rng):
        data = random_pconf(rng)
        spec = PenaltySpec("scad", 0.4)
        assert composite_objective(data, np.zeros(data.d), spec) == pconf_risk(data, np.zeros(data.d))

    def test_l1_reference(self, rng):
        data = random_pconf(rng, 12, 4)
        beta = rng.standard_normal(4)
        ref = pconf_risk(data, beta) + 0.3 * sum(abs(b) for b in beta)
        assert composite_objective(data, beta, PenaltySpec("l1", 0.3)) == pytest.approx(ref, abs=1e-14)

    def test_trace_matches_final_objective(self, rng):
        data = random_pconf(rng, 30, 10)
        spec = PenaltySpec("l1", 0.05)
        res = fit(data, spec)
        assert res.objective == pytest.approx(composite_objective(data, res.beta, spec), abs=1e-14)


def test_warm_started_path(rng):
    data = random_pconf(rng, 60, 40)
    lambdas = np.geomspace(0.2, 0.01, 8)
    path = fit_path(data, PenaltySpec("l1", 0.0), lambdas)
    assert [r.spec.lam for r in path] == list(lambdas)
    sizes = [r.support.size for r in path]
    assert sizes[0] <= sizes[-1]
    cold = fit(data, PenaltySpec("l1", lambdas[-1]), step=path[-1].step)
    assert np.abs(cold.beta - path[-1].beta).max() < 1e-4
