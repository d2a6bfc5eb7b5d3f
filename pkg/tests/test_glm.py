import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from chatdom.errors import ColumnMismatchError, InputError, RankDeficientError, SingleClassError
from chatdom.glm import (
    INTERCEPT,
    DesignMatrix,
    FitOptions,
    LogitModel,
    aic,
    aic_from,
    compare_models,
    deviance,
    fit,
    fit_batch,
    log_likelihood,
    predict_prob,
    score,
    significance_stars,
)
from chatdom.published import published_model


def two_by_two(n0_pos, n0_neg, n1_pos, n1_neg):
    x = [0] * (n0_pos + n0_neg) + [1] * (n1_pos + n1_neg)
    y = [1] * n0_pos + [0] * n0_neg + [1] * n1_pos + [0] * n1_neg
    return DesignMatrix.from_columns({"x": x}, y)


def closed_form(n0_pos, n0_neg, n1_pos, n1_neg):
    b0 = math.log(n0_pos / n0_neg)
    return b0, math.log(n1_pos / n1_neg) - b0


def random_design(rng, n, p):
    X = np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))])
    beta = rng.normal(scale=0.7, size=p)
    y = (rng.random(n) < 1 / (1 + np.exp(-X @ beta))).astype(int)
    return X, y


class TestDesign:
    def test_intercept_prepended(self):
        d = DesignMatrix.from_columns({"a": [1, 2, 3]}, [0, 1, 0])
        assert d.columns == (INTERCEPT, "a")
        assert d.X[:, 0].tolist() == [1, 1, 1]

    @pytest.mark.parametrize("kwargs", [
        dict(columns=("Intercept", "a"), X=[[1, 0], [1, 1]], y=[0, 2]),
        dict(columns=("a", "Intercept"), X=[[0, 1], [1, 1]], y=[0, 1]),
        dict(columns=("Intercept", "a"), X=[[1, np.nan], [1, 1]], y=[0, 1]),
        dict(columns=("Intercept", "Intercept"), X=[[1, 1], [1, 1]], y=[0, 1]),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            DesignMatrix(**kwargs)


class TestFit:
    def test_intercept_only_balanced(self):
        d = DesignMatrix.from_columns({}, [0, 1, 0, 1])
        m = fit(d)
        assert m.converged
        assert m.coef[0] == pytest.approx(0.0, abs=1e-12)
        assert m.residual_deviance == pytest.approx(-2 * 4 * math.log(0.5), abs=1e-9)
        assert m.residual_deviance == pytest.approx(5.5452, abs=5e-5)

    def test_binary_predictor_closed_form(self):
        m = fit(two_by_two(2, 8, 8, 2))
        assert m.converged
        assert m.coef[0] == pytest.approx(math.log(2 / 8), abs=1e-9)
        assert m.coef[1] == pytest.approx(math.log(8 / 2) - math.log(2 / 8), abs=1e-9)
        assert m.coef[0] == pytest.approx(-1.3863, abs=5e-5)
        assert m.coef[1] == pytest.approx(2.7726, abs=5e-5)

    def test_binary_predictor_grid_search(self):
        d = two_by_two(2, 8, 8, 2)
        grid = np.arange(-3.0, 5.0, 0.01)
        b0, b1 = np.meshgrid(grid, grid, indexing="ij")
        eta0, eta1 = b0, b0 + b1
        # log-likelihood of the 2x2 table evaluated on the whole grid
        ll = (2 * eta0 - 10 * np.logaddexp(0, eta0)) + (8 * eta1 - 10 * np.logaddexp(0, eta1))
        i, j = np.unravel_index(np.argmax(ll), ll.shape)
        m = fit(d)
        assert abs(grid[i] - m.coef[0]) <= 0.01
        assert abs(grid[j] - m.coef[1]) <= 0.01

    @pytest.mark.parametrize("x", [
        [-3, -2, -1, 1, 2, 3],
        [-3, -2, -1, 0, 0, 1, 2, 3],
    ])
    def test_separation_flagged(self, x):
        x = np.array(x, dtype=float)
        y = (x > 0).astype(int)
        if 0 in x:
            y[np.where(x == 0)[0][1]] = 1  # quasi-separation: ties at zero
        m = fit(DesignMatrix.from_columns({"x": x}, y))
        assert not m.converged
        assert m.separation
        assert "x" in m.separated_columns
        assert "separated" in m.message

    def test_separation_large_beta_bound_still_flagged(self):
        x = np.array([-2.0, -1, 1, 2])
        m = fit(DesignMatrix.from_columns({"x": x}, (x > 0).astype(int)), FitOptions(beta_bound=1e6))
        assert m.separation and not m.converged

    def test_ridge_makes_separated_data_finite(self):
        x = np.array([-2.0, -1, 1, 2])
        m = fit(DesignMatrix.from_columns({"x": x}, (x > 0).astype(int)), FitOptions(ridge=1.0))
        assert m.converged and not m.separation
        assert 0 < m.coef[1] < 5

    def test_single_class(self):
        with pytest.raises(SingleClassError):
            fit(DesignMatrix.from_columns({"x": [1, 2, 3]}, [0, 0, 0]))

    def test_rank_deficient_names_columns(self):
        a = np.array([1.0, 2, 3, 4, 5, 6])
        d = DesignMatrix.from_columns({"a": a, "b": 2 * a + 1, "c": [0, 1, 0, 1, 1, 0]}, [0, 1, 0, 1, 1, 0])
        with pytest.raises(RankDeficientError) as exc:
            fit(d)
        assert exc.value.columns == ["b"]

    def test_constant_zero_column_is_rank_deficient(self):
        d = DesignMatrix.from_columns({"z": [0, 0, 0, 0]}, [0, 1, 0, 1])
        with pytest.raises(RankDeficientError, match="z"):
            fit(d)

    def test_too_few_observations(self):
        from chatdom.errors import ModelingError

        with pytest.raises(ModelingError):
            fit(DesignMatrix.from_columns({"x": [0, 1]}, [0, 1]))

    def test_matches_generic_optimizer(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            X, y = random_design(rng, 60, 4)
            d = DesignMatrix(tuple([INTERCEPT, "a", "b", "c"]), X, y)
            m = fit(d)
            ref = minimize(lambda b: -log_likelihood(b, X, y), np.zeros(4), method="BFGS",
                           options={"gtol": 1e-10})
            np.testing.assert_allclose(m.coef, ref.x, atol=1e-5)

    def test_standard_errors_from_inverse_information(self):
        rng = np.random.default_rng(3)
        X, y = random_design(rng, 80, 3)
        m = fit(DesignMatrix((INTERCEPT, "a", "b"), X, y))
        # numerical Hessian of -loglik by central differences of the analytic score
        h = 1e-5
        H = np.zeros((3, 3))
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            H[:, j] = -(score(np.array(m.coef) + e, X, y) - score(np.array(m.coef) - e, X, y)) / (2 * h)
        np.testing.assert_allclose(m.standard_error, np.sqrt(np.diag(np.linalg.inv(H))), rtol=1e-6)

    def test_gradient_at_optimum(self):
        rng = np.random.default_rng(11)
        X, y = random_design(rng, 200, 5)
        m = fit(DesignMatrix((INTERCEPT, "a", "b", "c", "d"), X, y))
        assert m.converged
        assert np.max(np.abs(score(m.coef, X, y))) <= 1e-8
        assert m.max_abs_score <= 1e-8


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(20):
        X, y = random_design(rng, int(rng.integers(5, 51)), int(rng.integers(1, 6)))
        beta = rng.normal(size=X.shape[1])
        g = score(beta, X, y)
        h = 1e-6
        fd = np.array([
            (log_likelihood(beta + h * e, X, y) - log_likelihood(beta - h * e, X, y)) / (2 * h)
            for e in np.eye(len(beta))
        ])
        np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-7)


class TestInvariance:
    def setup_method(self):
        rng = np.random.default_rng(5)
        self.X, self.y = random_design(rng, 120, 3)
        self.base = fit(DesignMatrix((INTERCEPT, "a", "b"), self.X, self.y))
        self.p = 1 / (1 + np.exp(-self.X @ np.array(self.base.coef)))

    def test_shift(self):
        c = 3.7
        X2 = self.X.copy()
        X2[:, 1] += c
        m = fit(DesignMatrix((INTERCEPT, "a", "b"), X2, self.y))
        assert m.coef[1] == pytest.approx(self.base.coef[1], abs=1e-7)
        assert m.coef[0] == pytest.approx(self.base.coef[0] - c * self.base.coef[1], abs=1e-7)
        np.testing.assert_allclose(1 / (1 + np.exp(-X2 @ np.array(m.coef))), self.p, atol=1e-9)

    def test_scale(self):
        s = 12.5
        X2 = self.X.copy()
        X2[:, 2] *= s
        m = fit(DesignMatrix((INTERCEPT, "a", "b"), X2, self.y))
        assert m.coef[2] == pytest.approx(self.base.coef[2] / s, rel=1e-7)
        np.testing.assert_allclose(1 / (1 + np.exp(-X2 @ np.array(m.coef))), self.p, atol=1e-9)
        assert m.residual_deviance == pytest.approx(self.base.residual_deviance, rel=1e-10)
        assert m.aic == pytest.approx(self.base.aic, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 20), st.integers(1, 20), st.integers(1, 20), st.integers(1, 20))
def test_two_by_two_property(a, b, c, d):
    m = fit(two_by_two(a, b, c, d))
    b0, b1 = closed_form(a, b, c, d)
    assert m.converged
    assert m.coef[0] == pytest.approx(b0, abs=1e-6)
    assert m.coef[1] == pytest.approx(b1, abs=1e-6)


class TestModel:
    def test_identities(self):
        rng = np.random.default_rng(1)
        X, y = random_design(rng, 100, 4)
        m = fit(DesignMatrix((INTERCEPT, "a", "b", "c"), X, y))
        assert m.n_params == 4
        assert m.aic == m.residual_deviance + 2 * 4
        assert aic(m) == m.aic
        for b, s, w in zip(m.coef, m.standard_error, m.wald_chisq):
            assert w == pytest.approx((b / s) ** 2, rel=1e-9)

    @pytest.mark.parametrize("dev, k, expected", [(1102, 10, 1122), (1170.5, 11, 1192.5), (1013.8, 20, 1053.8)])
    def test_aic_published(self, dev, k, expected):
        assert aic_from(dev, k) == expected

    def test_json_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        X, y = random_design(rng, 50, 2)
        m = fit(DesignMatrix((INTERCEPT, "a"), X, y))
        path = tmp_path / "m.json"
        m.save(path)
        assert LogitModel.load(path) == m
        assert json.loads(path.read_text())["aic"] == m.aic

    def test_inconsistent_aic_rejected(self):
        doc = published_model("model1").to_dict()
        doc["aic"] = 1395.86
        with pytest.raises(InputError):
            LogitModel.from_dict(doc)

    def test_load_missing(self, tmp_path):
        with pytest.raises(InputError):
            LogitModel.load(tmp_path / "none.json")

    def test_stars(self):
        # p-value thresholds 0.05, 0.001, 0.0001 on chi-square(1)
        assert significance_stars(3.0) == ""
        assert significance_stars(4.0) == "*"
        assert significance_stars(11.0) == "**"
        assert significance_stars(16.0) == "***"


class TestPredict:
    def test_zero_model(self):
        m = LogitModel((INTERCEPT, "a"), (0.0, 0.0), (1.0, 1.0), 1.0)
        assert predict_prob(m, {"a": 123.0}) == 0.5

    def test_log_three(self):
        m = LogitModel((INTERCEPT,), (math.log(3),), (1.0,), 1.0)
        assert predict_prob(m, {}) == pytest.approx(0.75, abs=1e-15)

    def test_published_model1_intercept(self):
        m = published_model("model1")
        row = {c: 0.0 for c in m.predictors}
        assert predict_prob(m, row) == pytest.approx(1 / (1 + math.exp(1.20)), abs=1e-15)
        assert predict_prob(m, row) == pytest.approx(0.2315, abs=5e-5)

    def test_missing_column(self):
        m = published_model("model1")
        with pytest.raises(ColumnMismatchError, match="TimeReferences"):
            predict_prob(m, {"WordCount": 1})


class TestDeviance:
    def test_near_perfect_fit(self):
        m = LogitModel((INTERCEPT, "x"), (0.0, 60.0), (1.0, 1.0), 0.0)
        d = DesignMatrix.from_columns({"x": [-1, 1, -1, 1]}, [0, 1, 0, 1])
        assert deviance(m, d) == pytest.approx(0.0, abs=1e-9)

    def test_intercept_only(self):
        d = DesignMatrix.from_columns({}, [0, 1, 0, 1])
        assert deviance(fit(d), d) == pytest.approx(5.5452, abs=5e-5)

    @pytest.mark.parametrize("n, k", [(10, 3), (50, 1), (7, 6)])
    def test_null_model_closed_form(self, n, k):
        d = DesignMatrix.from_columns({}, [1] * k + [0] * (n - k))
        expected = -2 * (k * math.log(k / n) + (n - k) * math.log(1 - k / n))
        assert deviance(fit(d), d) == pytest.approx(expected, rel=1e-10)

    def test_column_order_irrelevant(self):
        rng = np.random.default_rng(4)
        X, y = random_design(rng, 40, 3)
        m = fit(DesignMatrix((INTERCEPT, "a", "b"), X, y))
        d2 = DesignMatrix((INTERCEPT, "b", "a"), X[:, [0, 2, 1]], y)
        assert deviance(m, d2) == pytest.approx(m.residual_deviance, rel=1e-12)

    def test_column_mismatch(self):
        m = LogitModel((INTERCEPT, "a"), (0.0, 0.0), (1.0, 1.0), 1.0)
        with pytest.raises(ColumnMismatchError):
            deviance(m, DesignMatrix.from_columns({"b": [0, 1]}, [0, 1]))


def _fake(dev, k):
    cols = (INTERCEPT, *[f"x{i}" for i in range(k - 1)])
    return LogitModel(cols, (0.0,) * k, (1.0,) * k, dev)


class TestCompare:
    def test_published_order(self):
        models = {f"Model {i}": published_model(f"model{i}") for i in (1, 2, 3)}
        ranking = compare_models(models)
        assert [r.name for r in ranking] == ["Model 3", "Model 1", "Model 2"]
        assert [r.aic for r in ranking] == [1053.8, 1122, 1192.5]
        assert ranking[1].delta_aic == pytest.approx(1122 - 1053.8)

    def test_identical_models_tie_by_name(self):
        m = _fake(100.0, 3)
        assert [r.name for r in compare_models({"b": m, "a": m})] == ["a", "b"]

    def test_tie_prefers_fewer_parameters(self):
        five, seven = _fake(110.0, 5), _fake(106.0, 7)
        assert five.aic == seven.aic == 120.0
        assert [r.name for r in compare_models({"a7": seven, "z5": five})] == ["z5", "a7"]

    def test_needs_two(self):
        with pytest.raises(ValueError):
            compare_models({"a": _fake(1.0, 1)})


class TestBatch:
    def test_agrees_with_single_fits(self):
        rng = np.random.default_rng(21)
        designs = [random_design(rng, 40, 3) for _ in range(12)]
        batch = fit_batch(np.stack([X for X, _ in designs]), np.stack([y for _, y in designs]),
                          (INTERCEPT, "a", "b"))
        for i, (X, y) in enumerate(designs):
            m = fit(DesignMatrix((INTERCEPT, "a", "b"), X, y))
            np.testing.assert_allclose(batch.coef[i], m.coef, atol=1e-9)
            np.testing.assert_allclose(batch.standard_error[i], m.standard_error, rtol=1e-7)
            assert batch.residual_deviance[i] == pytest.approx(m.residual_deviance, rel=1e-10)
            assert batch.iterations[i] == m.iterations
        assert batch.converged.all()
        assert batch.model(0).aic == pytest.approx(batch.aic[0])

    def test_weights_equal_replicated_rows(self):
        a, b, c, d = 3, 7, 9, 4
        expanded = fit(two_by_two(a, b, c, d))
        X = np.array([[[1, 0], [1, 0], [1, 1], [1, 1]]], dtype=float)
        grouped = fit_batch(X, [[1, 0, 1, 0]], (INTERCEPT, "x"), weights=[[a, b, c, d]])
        np.testing.assert_allclose(grouped.coef[0], expanded.coef, atol=1e-9)
        np.testing.assert_allclose(grouped.standard_error[0], expanded.standard_error, rtol=1e-8)
        assert grouped.residual_deviance[0] == pytest.approx(expanded.residual_deviance, rel=1e-10)

    def test_zero_weight_rows_are_ignored(self):
        rng = np.random.default_rng(8)
        X, y = random_design(rng, 30, 2)
        pad = np.vstack([X, [[1.0, 99.0]] * 5])
        w = np.r_[np.ones(30), np.zeros(5)]
        batch = fit_batch(pad[None], np.r_[y, np.ones(5)][None], (INTERCEPT, "a"), weights=w[None])
        np.testing.assert_allclose(batch.coef[0], fit(DesignMatrix((INTERCEPT, "a"), X, y)).coef, atol=1e-9)

    def test_separation_flagged(self):
        X = np.array([[[1, -2], [1, -1], [1, 1], [1, 2]], [[1, -2], [1, 1], [1, -1], [1, 2]]], dtype=float)
        y = np.array([[0, 0, 1, 1], [0, 0, 1, 1]])
        batch = fit_batch(X, y, (INTERCEPT, "x"))
        assert batch.separation.tolist() == [True, False]
        assert batch.converged.tolist() == [False, True]

    def test_errors(self):
        X = np.ones((1, 4, 2))
        X[0, :2, 1] = 0
        with pytest.raises(SingleClassError):
            fit_batch(X, [[0, 0, 0, 0]], (INTERCEPT, "x"))
        with pytest.raises(RankDeficientError, match="x"):
            fit_batch(np.ones((1, 4, 2)), [[0, 1, 0, 1]], (INTERCEPT, "x"))
        with pytest.raises(ValueError):
            fit_batch(X, [[0, 1, 0, 1]], (INTERCEPT, "x"), weights=[[1, -1, 1, 1]])
        with pytest.raises(ValueError):
            fit_batch(X[0], [0, 1, 0, 1], (INTERCEPT, "x"))
