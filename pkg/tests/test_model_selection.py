import math

import numpy as np
import pytest

from conftest import random_pconf
from sparsepconf import (
    ConfigError,
    DomainError,
    LabeledDataset,
    LambdaGrid,
    PconfDataset,
    auto_grid,
    cross_validate,
    pconf_risk,
    theoretical_lambda,
)
from sparsepconf.model_selection import fold_assignment, lambda_max
from sparsepconf.penalties import PenaltySpec
from sparsepconf.solver import fit_path


class TestGrid:
    def test_construction(self, rng):
        data = random_pconf(rng, 40, 12)
        grid = auto_grid(data)
        assert len(grid) == 50
        assert np.all(np.diff(grid.values) < 0)
        assert grid.values[0] == lambda_max(data)
        assert grid.values[-1] == pytest.approx(0.01 * grid.values[0])
        assert not grid.degenerate

    def test_degenerate_half_confidence(self, rng):
        data = PconfDataset(rng.standard_normal((10, 4)), np.full(10, 0.5))
        grid = auto_grid(data)
        assert grid.degenerate
        np.testing.assert_array_equal(grid.values, [1e-6])

    def test_lambda_max_reference(self, rng):
        data = random_pconf(rng, 25, 6)
        ref = 0.0
        for j in range(6):
            total = 0.0
            for i in range(25):
                total += data.X[i, j] * (-0.5 + data.alpha[i] * 0.5)
            ref = max(ref, abs(total / 25))
        assert lambda_max(data) == pytest.approx(ref, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ConfigError):
            LambdaGrid(np.array([0.1, 0.2]))
        with pytest.raises(ConfigError):
            LambdaGrid(np.array([0.1, 0.0]))
        np.testing.assert_array_equal(LambdaGrid.explicit([0.1, 0.5, 0.3]).values, [0.5, 0.3, 0.1])


class TestFolds:
    def test_balanced_and_deterministic(self):
        f = fold_assignment(23, 5, seed=3)
        counts = np.bincount(f)
        assert counts.max() - counts.min() <= 1 and counts.sum() == 23
        np.testing.assert_array_equal(f, fold_assignment(23, 5, seed=3))
        assert not np.array_equal(f, fold_assignment(23, 5, seed=4))

    def test_errors(self):
        with pytest.raises(ConfigError):
            fold_assignment(3, 4, 0)
        with pytest.raises(ConfigError):
            fold_assignment(10, 1, 0)


class TestCrossValidate:
    def test_leave_one_out(self, rng):
        data = random_pconf(rng, 6, 3)
        report = cross_validate(data, "l1", auto_grid(data, 5), k=6, seed=1)
        assert report.per_lambda_risk.shape == (5, 6)
        assert np.all(np.isfinite(report.cv_curve))

    def test_duplicated_rows(self, rng):
        base = random_pconf(rng, 15, 4)
        data = PconfDataset(np.vstack([base.X, base.X]), np.concatenate([base.r, base.r]))
        folds = np.repeat([0, 1], 15)
        grid = auto_grid(base, 6)
        report = cross_validate(data, "l1", grid, folds=folds)
        train = fit_path(base, PenaltySpec("l1", 0.0), grid.values)
        expected = [pconf_risk(base, res.beta) for res in train]
        for j in range(2):
            np.testing.assert_allclose(report.per_lambda_risk[:, j], expected, atol=1e-10)

    def test_optimum_on_grid_with_ties_to_larger(self, rng):
        # with r = 1 everywhere and X = 0 every lambda gives the same held-out risk
        data = PconfDataset(np.zeros((8, 3)), np.full(8, 0.7))
        grid = LambdaGrid.explicit([0.3, 0.2, 0.1])
        report = cross_validate(data, "mcp", grid, k=4, seed=0)
        assert np.ptp(report.cv_curve) == 0
        assert report.lambda_opt == 0.3 and report.index_opt == 0

    def test_lambda_opt_attains_min(self, rng):
        data = random_pconf(rng, 40, 15)
        report = cross_validate(data, "scad", auto_grid(data, 10), k=4, seed=2)
        assert report.lambda_opt in report.lambdas
        assert report.cv_curve[report.index_opt] == report.cv_curve.min()

    def test_single_point_grid(self, rng):
        data = random_pconf(rng, 20, 4)
        report = cross_validate(data, "l1", LambdaGrid.explicit([0.05]), k=3)
        assert report.lambda_opt == 0.05

    def test_permutation_invariance(self, rng):
        data = random_pconf(rng, 30, 5)
        perm = rng.permutation(30)
        permuted = data.subset(perm)
        folds = fold_assignment(30, 5, seed=9)
        grid = auto_grid(data, 8)
        a = cross_validate(data, "l1", grid, folds=folds)
        # sample i of the original sits at position argsort(perm)[i] of the permuted set
        b = cross_validate(permuted, "l1", grid, folds=folds[perm])
        np.testing.assert_allclose(a.cv_curve, b.cv_curve, rtol=1e-9)

    def test_labeled_data(self, rng):
        X = rng.standard_normal((60, 5))
        y = np.where(X[:, 0] + rng.normal(0, 1, 60) > 0, 1.0, -1.0)
        data = LabeledDataset(X, y)
        report = cross_validate(data, "l1", auto_grid(data, 10), k=3, seed=0)
        assert np.isfinite(report.lambda_opt)

    def test_separable_labels_truncate_path(self, rng):
        X = rng.standard_normal((20, 40))
        y = np.where(X[:, 0] > 0, 1.0, -1.0)
        data = LabeledDataset(X, y)
        from sparsepconf.solver import SolverConfig

        report = cross_validate(data, "scad", auto_grid(data, 20), k=2, cfg=SolverConfig(max_epochs=300))
        assert np.isinf(report.cv_curve[-1])
        assert np.isfinite(report.cv_curve[report.index_opt])


class TestTheoreticalLambda:
    def test_value(self):
        expected = 2 * math.sqrt(2 * math.log(200) / 100)
        assert theoretical_lambda(1, 1, 1, 100, 10, 0.1) == pytest.approx(expected, rel=1e-14)
        assert theoretical_lambda(1, 1, 1, 100, 10, 0.1) == pytest.approx(0.6511, abs=1e-3)

    def test_scalings(self):
        base = theoretical_lambda(1.3, 0.4, 0.9, 100, 50, 0.05)
        assert theoretical_lambda(1.3, 0.4, 0.9, 400, 50, 0.05) == pytest.approx(base / 2, rel=1e-14)
        assert theoretical_lambda(1, 0, 2, 100, 10, 0.1) == pytest.approx(
            2 * math.sqrt(2 * math.log(200) / 100), rel=1e-14
        )
        ratio = theoretical_lambda(1, 1, 1, 100, 10**4, 0.1) / theoretical_lambda(1, 1, 1, 100, 10**2, 0.1)
        assert ratio == pytest.approx(math.sqrt(math.log(2e4 / 0.1) / math.log(2e2 / 0.1)), rel=1e-14)

    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.2, 1.5])
    def test_delta_domain(self, delta):
        with pytest.raises(DomainError):
            theoretical_lambda(1, 1, 1, 100, 10, delta)
