"""Tests for the pliable lasso solver: proximal operator, zero conditions and full fits."""

import numpy as np
import pytest
from scipy.optimize import minimize, minimize_scalar

from coxplasso.data.design import build_interactions
from coxplasso.data.risk_sets import validate_and_index
from coxplasso.models.objective import linear_predictor
from coxplasso.models.path import ProportionalEngine
from coxplasso.models.solver import (
    BlockDesign,
    DegenerateColumnError,
    PenaltyConfig,
    PenaltyConfigError,
    PliableModel,
    _block_kkt,
    _extrapolate,
    block_penalty,
    fit,
    penalty_value,
    prox_block_update,
    prox_pliable,
    screen_block_zero,
    soft_threshold,
    solve_beta_only,
    zero_block_gap,
)

def random_block(seed):
    """One block subproblem: x, W = x * Z, residual, weights, lam, alpha and the block Gram and score."""
    rng = np.random.default_rng(seed)
    n, K = 30, 3
    x = rng.standard_normal(n)
    W = x[:, None] * (rng.random((n, K)) < 0.5)
    w = rng.uniform(0.2, 1.5, n)
    z = (rng.normal() * x + rng.uniform(0.0, 1.0) * W @ rng.normal(size=K)
         + rng.uniform(0.2, 2.0) * rng.standard_normal(n))
    r = w * z
    alpha = rng.uniform(0.1, 0.9)
    A = np.column_stack((x, W))
    H = A.T @ (w[:, None] * A) / n
    b = A.T @ r / n
    lam = max(np.max(np.abs(b)), 1e-3) * np.exp(rng.uniform(np.log(0.1), np.log(3.0)))
    return x, W, r, w, lam, alpha, H, b


def block_objective(H, b, lam, alpha):
    return lambda g: 0.5 * g @ H @ g - b @ g + block_penalty(np.asarray(g), lam, alpha)


def brute_force_minimum(f, starts):
    best = np.inf
    for start in starts:
        res = minimize(f, start, method='Powell', options={'xtol': 1e-10, 'ftol': 1e-14, 'maxfev': 50000})
        res = minimize(f, res.x, method='Nelder-Mead',
                       options={'xatol': 1e-10, 'fatol': 1e-14, 'maxfev': 50000})
        best = min(best, float(res.fun))
    return best


def accurate_block(H, b, lam, alpha):
    """Plain proximal gradient run to machine precision."""
    gamma = np.zeros(b.shape[0])
    step = 1.0 / np.linalg.eigvalsh(H)[-1]
    for _ in range(20000):
        new, step, _ = prox_block_update(gamma, H, b, step, lam, alpha)
        if np.max(np.abs(new - gamma)) < 1e-13:
            return new
        gamma = new
    return gamma


BLOCK_SEEDS = range(200)



class TestPenaltyConfig:

    def test_weights(self):
        pen = PenaltyConfig(lam=2.0, alpha=0.25)
        assert pen.group_weight == pytest.approx(1.5)
        assert pen.l1_weight == pytest.approx(0.5)

    def test_at_copies_controls(self):
        pen = PenaltyConfig(lam=1.0, alpha=0.3, tol_outer=1e-4)
        other = pen.at(0.1)
        assert other.lam == 0.1 and other.alpha == 0.3 and other.tol_outer == 1e-4

    @pytest.mark.parametrize('kwargs', [
        {'lam': -1.0},
        {'lam': float('inf')},
        {'lam': 1.0, 'alpha': 1.5},
        {'lam': 1.0, 'tol_inner': 0.0},
        {'lam': 1.0, 'outer_max_iter': 0},
        {'lam': 1.0, 'prox_step': -1.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(PenaltyConfigError):
            PenaltyConfig(**kwargs)


class TestProximal:

    def test_soft_threshold(self):
        np.testing.assert_allclose(soft_threshold(np.array([-3.0, 0.5, 2.0]), 1.0), [-2.0, 0.0, 1.0])
        with pytest.raises(ValueError):
            soft_threshold(1.0, -0.1)

    def test_pure_l1_leaves_beta(self):
        out = prox_pliable(np.array([2.0, 3.0, -0.5]), t=1.0, lam=1.0, alpha=1.0)
        np.testing.assert_allclose(out, [2.0, 2.0, 0.0])

    def test_small_block_is_zeroed(self):
        out = prox_pliable(np.array([0.1, 0.05, -0.05]), t=1.0, lam=1.0, alpha=0.5)
        np.testing.assert_array_equal(out, np.zeros(3))

    @pytest.mark.parametrize('seed', range(6))
    def test_prox_satisfies_optimality(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.normal(scale=2.0, size=5)
        t, lam, alpha = 0.7, 0.9, 0.3
        gamma = prox_pliable(v, t, lam, alpha)
        # min 1/(2t) ||g - v||^2 + penalty(g): negative smooth gradient is (v - g) / t
        assert _block_kkt(gamma, (v - gamma) / t, lam, alpha) < 1e-9

    def test_block_penalty_sums_to_total(self):
        beta = np.array([1.0, 0.0, -2.0])
        Theta = np.array([[0.5, -0.5], [0.0, 0.0], [1.0, 0.0]])
        total = sum(block_penalty(np.concatenate(([beta[k]], Theta[k])), 0.7, 0.4) for k in range(3))
        assert penalty_value(beta, Theta, 0.7, 0.4) == pytest.approx(total)

    @pytest.mark.parametrize('seed', range(4))
    def test_block_update_decreases_objective(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((30, 4))
        H = A.T @ A / 30
        b = rng.standard_normal(4)
        gamma0 = rng.standard_normal(4)
        lam, alpha = 0.2, 0.5

        def objective(g):
            return 0.5 * g @ H @ g - b @ g + block_penalty(g, lam, alpha)

        # oversized step forces backtracking
        gamma, step, underflow = prox_block_update(gamma0, H, b, 50.0, lam, alpha)
        assert not underflow
        assert step < 50.0
        assert objective(gamma) <= objective(gamma0) + 1e-12

    def test_block_update_fixed_point(self):
        H = np.eye(3)
        b = np.array([0.05, 0.02, -0.01])
        gamma, step, underflow = prox_block_update(np.zeros(3), H, b, 1.0, lam=1.0, alpha=0.5)
        np.testing.assert_array_equal(gamma, np.zeros(3))
        assert step == 1.0 and not underflow


class TestZeroConditions:

    def test_gap_values(self):
        assert zero_block_gap(0.0, np.zeros(2), 1.0, 0.5) == 0.0
        assert zero_block_gap(2.0, np.zeros(2), 1.0, 0.5) == pytest.approx(1.5)

    def test_interaction_scores_can_break_zero(self):
        # main score inside the bound, interaction score well outside
        assert zero_block_gap(0.1, np.array([3.0, 0.0]), 1.0, 0.5) > 0.0

    def test_screen_on_zero_residual(self):
        x = np.array([1.0, -1.0, 0.5])
        W = np.column_stack([x, 2 * x])
        assert screen_block_zero(x, W, np.zeros(3), lam=0.1, alpha=0.5)
        assert not screen_block_zero(x, W, 10 * x, lam=0.1, alpha=0.5)

    def test_beta_only_without_interaction_signal(self):
        x = np.array([1.0, -1.0, 2.0, 0.0])
        W = np.zeros((4, 2))
        r = 2.0 * x
        w = np.ones(4)
        beta_hat, theta_zero = solve_beta_only(x, W, r, w, lam=0.2, alpha=0.5)
        # S(x'r/n, 0.1) / (x'x/n) with x'r/n = 3, x'x/n = 1.5
        assert beta_hat == pytest.approx((3.0 - 0.1) / 1.5)
        assert theta_zero

    def test_beta_only_degenerate(self):
        with pytest.raises(DegenerateColumnError):
            solve_beta_only(np.zeros(3), np.zeros((3, 1)), np.ones(3), np.ones(3), 0.1, 0.5)


class TestBlockConditionsAgainstBruteForce:

    @pytest.mark.parametrize('seed', BLOCK_SEEDS)
    def test_zero_screen(self, seed):
        x, W, r, w, lam, alpha, H, b = random_block(seed)
        f = block_objective(H, b, lam, alpha)
        K = W.shape[1]
        starts = [np.zeros(K + 1), np.linalg.solve(H, b), 0.1 * np.linalg.solve(H, b)]
        best = brute_force_minimum(f, starts)

        if screen_block_zero(x, W, r, lam, alpha):
            # f(0) = 0 is the minimum
            assert best >= -1e-9
            assert abs(best) < 1e-5
        else:
            gamma = accurate_block(H, b, lam, alpha)
            assert np.any(gamma != 0)
            assert f(gamma) < 0.0
            assert f(gamma) <= best + 1e-9
            assert abs(f(gamma) - best) < 1e-5

    @pytest.mark.parametrize('seed', BLOCK_SEEDS)
    def test_beta_only(self, seed):
        x, W, r, w, lam, alpha, H, b = random_block(seed)
        f = block_objective(H, b, lam, alpha)
        K = W.shape[1]
        beta_hat, theta_zero = solve_beta_only(x, W, r, w, lam, alpha)

        along_beta = minimize_scalar(lambda v: f(np.concatenate(([v], np.zeros(K)))),
                                     bracket=(-1.0, 1.0), tol=1e-12)
        assert beta_hat == pytest.approx(along_beta.x, abs=1e-5)

        if screen_block_zero(x, W, r, lam, alpha):
            return
        candidate = np.concatenate(([beta_hat], np.zeros(K)))
        gamma = accurate_block(H, b, lam, alpha)
        if theta_zero:
            best = brute_force_minimum(f, [candidate, np.linalg.solve(H, b)])
            assert f(candidate) <= best + 1e-9
            assert abs(f(candidate) - best) < 1e-5
            np.testing.assert_allclose(gamma, candidate, atol=1e-5)
        else:
            assert np.any(gamma[1:] != 0)
            assert f(gamma) < f(candidate)

    def test_both_outcomes_occur(self):
        screened, accepted, rejected = 0, 0, 0
        for seed in BLOCK_SEEDS:
            x, W, r, w, lam, alpha, _, _ = random_block(seed)
            if screen_block_zero(x, W, r, lam, alpha):
                screened += 1
                continue
            _, theta_zero = solve_beta_only(x, W, r, w, lam, alpha)
            accepted += theta_zero
            rejected += not theta_zero
        assert screened >= 10 and accepted >= 5 and rejected >= 10


class TestFit:

    @pytest.fixture
    def engine(self, standardized_data):
        return ProportionalEngine(standardized_data, PenaltyConfig(lam=0.0, alpha=0.5))

    @pytest.mark.parametrize('ratio', [1.0, 1.01])
    def test_lambda_max_gives_zero_blocks(self, engine, ratio):
        model = engine.fit(ratio * engine.lambda_max())
        assert np.all(model.beta == 0)
        assert np.all(model.Theta == 0)
        assert model.converged

    def test_lambda_max_without_modifiers_is_closed_form(self, standardized_data):
        data = standardized_data.with_design(standardized_data.X, np.zeros((60, 0)))
        engine = ProportionalEngine(data, PenaltyConfig(lam=0.0, alpha=0.5))
        score = engine.loss.gradient(np.zeros(60))
        expected = np.max(np.abs(data.X.T @ score)) / (0.5 * 60)
        assert engine.lambda_max() == pytest.approx(expected, rel=1e-5)

    def test_just_below_lambda_max_is_active(self, engine):
        lam_max = engine.lambda_max()
        model = engine.fit(0.9 * lam_max)
        assert len(model.active_blocks()) >= 1

    def test_converged_fit_is_certified(self, engine, test_settings):
        model = engine.fit(0.2 * engine.lambda_max())
        assert model.converged
        assert model.kkt <= test_settings.solver.tol_kkt
        assert model.flags == []

    def test_objective_never_increases(self, engine):
        model = engine.fit(0.1 * engine.lambda_max())
        assert np.all(np.diff(model.history) <= 1e-12)
        assert model.objective == pytest.approx(model.history[-1])

    def test_hierarchy(self, engine):
        for ratio in (0.5, 0.2, 0.05):
            model = engine.fit(ratio * engine.lambda_max())
            assert model.hierarchy_violations().size == 0

    def test_lengthened_step_keeps_the_working_support(self):
        old = PliableModel.zeros(3, 2, 1, 0.1, 0.5, 1)
        old.beta = np.array([0.5, 0.2, -0.1])
        old.Theta = np.array([[0.1, 0.0], [0.3, 0.2], [0.0, 0.0]])
        new = old.copy()
        new.beta = np.array([0.7, 0.0, -0.3])
        new.Theta = np.array([[0.2, 0.0], [0.0, 0.0], [0.1, 0.0]])
        new.theta0 = np.array([0.4])
        out = _extrapolate(old, new, 4.0)
        assert out.beta[1] == 0.0
        assert np.all(out.Theta[1] == 0.0)
        assert out.Theta[0, 1] == 0.0 and out.Theta[2, 1] == 0.0
        assert out.beta[0] == pytest.approx(0.5 + 4.0 * 0.2)
        assert out.Theta[2, 0] == pytest.approx(0.4)
        assert out.theta0[0] == pytest.approx(1.6)
        assert out.hierarchy_violations().size == 0

    def test_lengthened_fit_matches_tightly_solved_fit(self, standardized_data):
        lam = 0.1 * ProportionalEngine(standardized_data, PenaltyConfig(lam=0.0, alpha=0.5)).lambda_max()
        default = ProportionalEngine(standardized_data, PenaltyConfig(lam=0.0, alpha=0.5)).fit(lam)
        tight = ProportionalEngine(
            standardized_data, PenaltyConfig(lam=0.0, alpha=0.5, tol_outer=1e-12, outer_max_iter=2000)
        ).fit(lam)
        assert default.converged
        assert np.all(np.diff(default.history) <= 1e-12)
        assert default.objective == pytest.approx(tight.objective, rel=1e-5)
        np.testing.assert_allclose(default.beta, tight.beta, atol=1e-3)

    def test_warm_start_matches_cold_start(self, engine):
        lam_max = engine.lambda_max()
        cold = engine.fit(0.1 * lam_max)
        warm = engine.fit(0.1 * lam_max, engine.fit(0.3 * lam_max))
        np.testing.assert_allclose(warm.beta, cold.beta, atol=1e-3)
        assert warm.objective == pytest.approx(cold.objective, rel=1e-5)

    def test_module_level_fit(self, standardized_data):
        idx = validate_and_index(standardized_data)
        design = build_interactions(standardized_data.X, standardized_data.Z)
        model = fit(standardized_data, design, idx, PenaltyConfig(lam=1e6, alpha=0.5))
        assert model.active_blocks().size == 0
        assert model.theta0.shape == (standardized_data.nz,)


class TestBlockDesignAndModel:

    def test_eta_matches_linear_predictor(self, standardized_data):
        design = BlockDesign.proportional(standardized_data)
        rng = np.random.default_rng(1)
        theta0 = rng.normal(size=2)
        beta = rng.normal(size=3)
        Theta = rng.normal(size=(3, 2))
        expected = linear_predictor(theta0, beta, Theta, standardized_data.X, standardized_data.Z)
        np.testing.assert_allclose(design.eta(theta0, beta, Theta), expected)
        assert design.block(1).shape == (60, 3)

    def test_model_dict_round_trip(self):
        model = PliableModel.zeros(3, 2, 2, lam=0.5, alpha=0.5)
        model.beta[1] = 1.25
        model.Theta[1, 0] = -0.5
        model.flags.append('max_iterations')
        again = PliableModel.from_dict(model.to_dict())
        np.testing.assert_array_equal(again.Theta, model.Theta)
        np.testing.assert_array_equal(again.beta, model.beta)
        assert again.flags == ['max_iterations']
        assert model.to_dict()['theta'] == [[1, 0, -0.5]]

    def test_from_dict_tolerates_missing_diagnostics(self):
        payload = PliableModel.zeros(1, 1, 1, 0.1, 0.5).to_dict()
        payload['objective'] = None
        assert np.isnan(PliableModel.from_dict(payload).objective)
