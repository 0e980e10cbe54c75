"""Tests for the stacked logistic approximation."""

import numpy as np
import pytest

from coxplasso.data.risk_sets import build_risk_index, validate_and_index
from coxplasso.models.logistic import (
    BinomialLoss,
    OneClassOnlyError,
    approximation_gap,
    auc_score,
    evaluate_auc,
    fit_logistic_plasso,
    intercept_only,
    stack_problem,
)
from coxplasso.data.dataset import SurvivalDataset
from coxplasso.data.design import standardize
from coxplasso.models.path import LogisticEngine, PathConfig, ProportionalEngine, fit_path
from coxplasso.models.solver import FLAG_SEPARATION, PenaltyConfig, PliableModel
from coxplasso.models.timevarying import RiskSampleConfig, TimeBasis
from coxplasso.data.schema import STACKED_COLUMNS


class TestStackProblem:

    def test_layout(self, tiny_data):
        idx = validate_and_index(tiny_data)
        problem = stack_problem(tiny_data, idx, TimeBasis())
        assert problem.n_rows == 14
        assert problem.outcome.sum() == 4
        assert problem.M.shape == (14, 2)
        assert problem.modifier_names == ['z_1', 't']
        np.testing.assert_allclose(problem.M[:, 1].mean(), 0.0, atol=1e-12)

    def test_without_modifiers(self, tiny_data):
        idx = validate_and_index(tiny_data)
        problem = stack_problem(tiny_data, idx, None, include_z=False)
        assert problem.M.shape == (14, 0)
        assert problem.block_design().n_groups == 3

    def test_audit_frame(self, tiny_data):
        idx = validate_and_index(tiny_data)
        frame = stack_problem(tiny_data, idx, TimeBasis()).to_frame()
        assert list(frame.columns[:4]) == list(STACKED_COLUMNS)
        assert 'm_t' in frame.columns and 'x_1' in frame.columns
        assert frame['outcome'].sum() == 4

    def test_intercept_only_is_block_logit(self, tiny_data):
        idx = validate_and_index(tiny_data)
        problem = stack_problem(tiny_data, idx, None)
        b = intercept_only(problem)
        # block 0: weight 1 of total 6.5
        assert b[0] == pytest.approx(np.log(1.0 / 5.5))


class TestBinomialLoss:

    def test_gradient_by_finite_differences(self):
        y = np.array([1.0, 0.0, 1.0, 0.0])
        w = np.array([1.0, 2.0, 0.5, 1.0])
        loss = BinomialLoss(y, w, n_obs=4)
        eta = np.array([0.2, -0.4, 1.0, 0.3])
        grad = loss.quadratic(eta).grad
        h = 1e-6
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            assert grad[j] == pytest.approx((loss.loglik(eta + e) - loss.loglik(eta - e)) / (2 * h), abs=1e-7)


class TestApproximationGap:

    @staticmethod
    def _single_time(n):
        y = np.array([1.0] + [5.0] * (n - 1))
        delta = np.array([1] + [0] * (n - 1))
        return build_risk_index(y, delta, np.ones(n))

    def test_gap_value_and_decay(self):
        gaps = []
        for n in (10, 100, 1000):
            idx = self._single_time(n)
            gap = approximation_gap(np.zeros(n), idx)
            assert gap == pytest.approx(abs(n * (np.log1p(1.0 / n) - 1.0 / n)))
            gaps.append(gap)
        assert gaps[0] > gaps[1] > gaps[2]

    def test_per_time(self, tiny_data):
        idx = validate_and_index(tiny_data)
        per = approximation_gap(np.zeros(6), idx, tiny_data.omega, per_time=True)
        assert per.shape == (3,)
        assert per.sum() == pytest.approx(approximation_gap(np.zeros(6), idx, tiny_data.omega))


class TestAUC:

    def test_perfect_and_ties(self):
        assert auc_score([0, 1, 0, 1], [0.1, 0.9, 0.2, 0.8]) == 1.0
        assert auc_score([0, 1], [0.5, 0.5]) == 0.5

    def test_one_class(self):
        with pytest.raises(OneClassOnlyError):
            auc_score([1, 1], [0.2, 0.3])



class TestFitLogisticPlasso:

    def test_null_fit_keeps_block_logits(self, standardized_data):
        idx = validate_and_index(standardized_data)
        problem = stack_problem(standardized_data, idx, None, RiskSampleConfig(10, seed=0), include_z=False)
        fitted = fit_logistic_plasso(problem, PenaltyConfig(lam=1e6, alpha=0.5))

        assert np.all(fitted.model.beta == 0)
        np.testing.assert_allclose(fitted.intercepts, intercept_only(problem), atol=1e-6)
        assert not fitted.separated

    def test_warm_start_without_intercepts(self, standardized_data):
        idx = validate_and_index(standardized_data)
        problem = stack_problem(standardized_data, idx, TimeBasis(), RiskSampleConfig(10, seed=0))
        design = problem.block_design()
        init = PliableModel.zeros(design.p, design.K, design.q, 0.1, 0.5)

        fitted = fit_logistic_plasso(problem, PenaltyConfig(lam=0.1, alpha=0.5), init)
        assert fitted.intercepts.shape == (problem.expanded.m,)
        assert fitted.model.hierarchy_violations().size == 0


class TestLogisticEngine:

    def test_path_and_auc(self, standardized_data):
        basis = TimeBasis.from_spec('linear', standardized_data.y[standardized_data.delta == 1])
        engine = LogisticEngine(standardized_data, PenaltyConfig(lam=0.0, alpha=0.5), basis,
                                RiskSampleConfig(10, seed=0))
        result = fit_path(engine, PathConfig(nlambda=3, lambda_min_ratio=0.1))

        head = result.models[0]
        assert np.all(head.model.beta == 0) and np.all(head.model.Theta == 0)
        last = result.models[-1]
        assert last.intercepts.shape == (engine.problem.expanded.m,)
        assert last.separated == (FLAG_SEPARATION in last.model.flags)
        assert np.isfinite(engine.partial_loglik(last, standardized_data))

        auc = evaluate_auc(last, engine.problem)
        assert 0.0 <= auc <= 1.0


def few_failures_data(n=200, n_failures=7, seed=8):
    """Large risk sets: only the earliest n_failures event times are observed."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 4))
    Z = (rng.random((n, 2)) < 0.5).astype(float)
    eta = X[:, 0] + X[:, 0] * Z[:, 0] - 0.5 * X[:, 1]
    y = rng.exponential(1.0, n) * np.exp(-eta)
    cutoff = np.sort(y)[n_failures - 1]
    raw = SurvivalDataset(y=np.minimum(y, cutoff + 1e-9), delta=(y <= cutoff).astype(float),
                          omega=None, X=X, Z=Z)
    scaled, _ = standardize(raw)
    return scaled


class TestAgreementWithExactCox:

    def test_coefficients_match_with_large_risk_sets(self):
        data = few_failures_data()
        assert data.delta.sum() == 7
        penalty = PenaltyConfig(lam=0.0, alpha=0.5)
        exact_engine = ProportionalEngine(data, penalty)
        lam = 0.3 * exact_engine.lambda_max()

        exact = exact_engine.fit(lam)
        approx = LogisticEngine(data, penalty, None, RiskSampleConfig()).fit(lam)

        assert exact.converged and approx.model.converged
        assert len(exact.active_blocks()) >= 1
        np.testing.assert_allclose(approx.model.beta, exact.beta, atol=0.05)
        np.testing.assert_allclose(approx.model.Theta, exact.Theta, atol=0.05)
        np.testing.assert_allclose(approx.model.theta0, exact.theta0, atol=0.05)
