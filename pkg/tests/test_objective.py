"""Tests for the Breslow partial likelihood and its quadratic approximation."""

import numpy as np
import pytest

from conftest import make_dataset
from coxplasso.data.dataset import SurvivalDataset
from coxplasso.data.risk_sets import validate_and_index
from coxplasso.models.objective import (
    CoxLoss,
    ObjectiveError,
    derivatives,
    linear_predictor,
    partial_loglik,
    working_problem,
)


def breslow_by_loops(eta, data):
    """Weighted Breslow log-likelihood summed over distinct failure times."""
    total = 0.0
    for t in np.unique(data.y[data.delta == 1]):
        failing = (data.y == t) & (data.delta == 1)
        at_risk = data.y >= t
        total += np.sum(data.omega[failing] * eta[failing])
        total -= np.sum(data.omega[failing]) * np.log(np.sum(data.omega[at_risk] * np.exp(eta[at_risk])))
    return total


def dense_negative_hessian(eta, idx, omega, h=1e-5):
    """Columns of -l'' by central differences of the gradient."""
    n = eta.shape[0]
    out = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        up = derivatives(eta + e, idx, omega).grad
        down = derivatives(eta - e, idx, omega).grad
        out[:, j] = -(up - down) / (2 * h)
    return out


@pytest.fixture
def tiny_index(tiny_data):
    return validate_and_index(tiny_data)


class TestPartialLoglik:

    def test_two_observation_value(self):
        data = SurvivalDataset(y=[1.0, 2.0], delta=[1, 1], omega=None, X=[[0.0], [0.0]], Z=None)
        idx = validate_and_index(data)
        assert partial_loglik(np.zeros(2), idx, data.omega) == pytest.approx(-np.log(2.0))

    def test_breslow_ties_with_weights(self, tiny_data, tiny_index):
        eta = np.array([0.2, -0.1, 0.4, 0.0, 0.3, -0.5])
        w = tiny_data.omega
        a = w * np.exp(eta)
        expected = (
            w[0] * eta[0] - 1.0 * np.log(a.sum())
            + w[1] * eta[1] + w[2] * eta[2] - 3.0 * np.log(a[1:].sum())
            + w[4] * eta[4] - 0.5 * np.log(a[3:].sum())
        )
        assert partial_loglik(eta, tiny_index, w) == pytest.approx(expected)

    def test_shift_invariance(self, tiny_data, tiny_index):
        eta = np.linspace(-1.0, 1.0, 6)
        base = partial_loglik(eta, tiny_index, tiny_data.omega)
        assert partial_loglik(eta + 400.0, tiny_index, tiny_data.omega) == pytest.approx(base)

    def test_non_finite_eta(self, tiny_data, tiny_index):
        eta = np.zeros(6)
        eta[3] = np.inf
        with pytest.raises(ObjectiveError):
            partial_loglik(eta, tiny_index, tiny_data.omega)

    @pytest.mark.parametrize('seed', range(100))
    def test_breslow_matches_loops_with_ties_and_weights(self, seed):
        data = make_dataset(n=30, p=2, nz=1, seed=seed, ties=True, weights=True)
        idx = validate_and_index(data)
        eta = np.random.default_rng(100 + seed).normal(scale=0.7, size=data.n)
        assert partial_loglik(eta, idx, data.omega) == pytest.approx(breslow_by_loops(eta, data), rel=1e-10)


class TestDerivatives:

    def test_gradient_matches_finite_differences(self, tiny_data, tiny_index):
        rng = np.random.default_rng(4)
        eta = rng.normal(scale=0.5, size=6)
        grad = derivatives(eta, tiny_index, tiny_data.omega).grad
        h = 1e-6
        for j in range(6):
            e = np.zeros(6)
            e[j] = h
            numeric = (partial_loglik(eta + e, tiny_index, tiny_data.omega)
                       - partial_loglik(eta - e, tiny_index, tiny_data.omega)) / (2 * h)
            assert grad[j] == pytest.approx(numeric, abs=1e-6)

    @pytest.mark.parametrize('seed', range(100))
    def test_gradient_matches_finite_differences_on_tied_weighted_data(self, seed):
        data = make_dataset(n=12, p=2, nz=1, seed=seed, ties=True, weights=True)
        idx = validate_and_index(data)
        eta = np.random.default_rng(200 + seed).normal(scale=0.5, size=data.n)
        grad = derivatives(eta, idx, data.omega).grad
        h = 1e-6
        numeric = np.zeros(data.n)
        for j in range(data.n):
            e = np.zeros(data.n)
            e[j] = h
            numeric[j] = (partial_loglik(eta + e, idx, data.omega)
                          - partial_loglik(eta - e, idx, data.omega)) / (2 * h)
        np.testing.assert_allclose(grad, numeric, atol=1e-6)

    @pytest.mark.parametrize('seed', range(100))
    def test_hessian_diagonal_matches_dense_hessian_on_tied_weighted_data(self, seed):
        data = make_dataset(n=12, p=2, nz=1, seed=seed, ties=True, weights=True)
        idx = validate_and_index(data)
        eta = np.random.default_rng(300 + seed).normal(scale=0.5, size=data.n)
        approx = derivatives(eta, idx, data.omega)
        dense = dense_negative_hessian(eta, idx, data.omega)
        np.testing.assert_allclose(-approx.hess_diag, np.diag(dense), atol=1e-4)
        assert np.all(approx.hess_diag <= 0)

    def test_hessian_diagonal_matches_finite_differences(self, tiny_data, tiny_index):
        eta = np.array([0.1, -0.3, 0.2, 0.5, -0.2, 0.0])
        hess = derivatives(eta, tiny_index, tiny_data.omega).hess_diag
        h = 1e-5
        for j in range(6):
            e = np.zeros(6)
            e[j] = h
            up = derivatives(eta + e, tiny_index, tiny_data.omega).grad[j]
            down = derivatives(eta - e, tiny_index, tiny_data.omega).grad[j]
            assert hess[j] == pytest.approx((up - down) / (2 * h), abs=1e-6)
        assert np.all(hess <= 0)

    def test_gradient_sums_to_zero(self, random_data):
        idx = validate_and_index(random_data)
        eta = random_data.X[:, 0] * 0.3
        assert derivatives(eta, idx, random_data.omega).grad.sum() == pytest.approx(0.0, abs=1e-10)

    def test_zero_curvature_rows_are_dropped(self):
        # row 0 is censored before the first failure and never at risk
        data = SurvivalDataset(y=[0.5, 1.0, 2.0], delta=[0, 1, 1], omega=None, X=[[0.0]] * 3, Z=None)
        idx = validate_and_index(data)
        eta = np.array([0.7, 0.0, 0.0])
        approx = derivatives(eta, idx, data.omega)
        weights, responses = working_problem(approx, eta)
        assert weights[0] == 0.0
        assert responses[0] == eta[0]
        assert np.all(weights[1:] > 0)
        np.testing.assert_allclose(responses[1:], eta[1:] + approx.grad[1:] / weights[1:])

    def test_working_problem_length_check(self, tiny_data, tiny_index):
        approx = derivatives(np.zeros(6), tiny_index, tiny_data.omega)
        with pytest.raises(ObjectiveError):
            working_problem(approx, np.zeros(5))


class TestLinearPredictorAndLoss:

    def test_linear_predictor(self):
        X = np.array([[1.0, 2.0]])
        Z = np.array([[3.0]])
        eta = linear_predictor(np.array([0.5]), np.array([1.0, -1.0]), np.array([[2.0], [1.0]]), X, Z)
        # 3*0.5 + 1*(1 + 3*2) + 2*(-1 + 3*1)
        assert eta[0] == pytest.approx(12.5)

    def test_linear_predictor_without_modifiers(self):
        X = np.array([[1.0, 2.0], [0.0, 1.0]])
        eta = linear_predictor(np.zeros(0), np.array([1.0, 1.0]), np.zeros((2, 0)), X, np.zeros((2, 0)))
        np.testing.assert_allclose(eta, [3.0, 1.0])

    def test_cox_loss_scaling(self, tiny_data, tiny_index):
        loss = CoxLoss(tiny_index, tiny_data.omega)
        eta = np.zeros(6)
        assert loss.value(eta) == pytest.approx(-partial_loglik(eta, tiny_index, tiny_data.omega) / 6)
        np.testing.assert_allclose(loss.gradient(eta), derivatives(eta, tiny_index, tiny_data.omega).grad)
