"""Tests for the simulation benchmark: scenarios, generators, comparison and tables."""

import json

import numpy as np
import pandas as pd
import pytest

from coxplasso.data.risk_sets import validate_and_index
from coxplasso.models.objective import linear_predictor, partial_loglik
from coxplasso.models.path import PathConfig
from coxplasso.models.timevarying import tv_partial_loglik
from coxplasso.simbench import (
    PatternNeedsDimsError,
    ScenarioNotFoundError,
    ScenarioSpec,
    SimDesign,
    SimMetrics,
    UnknownCovariateLawError,
    available_scenarios,
    emit_table,
    generate_proportional,
    generate_timevarying,
    run_comparison,
    true_model,
    write_table,
)
from coxplasso.simbench.comparison import (
    METHOD_LASSO_FULL,
    METHOD_LASSO_MAIN,
    METHOD_PLASSO,
    METRIC_COLUMNS,
    Selection,
    count_errors,
    default_methods,
    pliable_selection,
)
from coxplasso.simbench.generators import generate, timevarying_times
from coxplasso.simbench.tables import TableFormatError


@pytest.fixture
def metrics():
    return [
        SimMetrics('plasso', 1.23456, 0.5, 0.0, 1.0, 0.25, 1.1, 20),
        SimMetrics('lasso (main)', 2.0, 0.0, 1.0, 0.0, 4.0, 1.1, 19),
    ]


class TestScenarios:

    def test_bundled(self):
        names = available_scenarios()
        for name in ('prop_hier', 'prop_nonhier', 'prop_null', 'tv_hier', 'tv_nonhier'):
            assert name in names

    def test_not_found(self):
        with pytest.raises(ScenarioNotFoundError):
            ScenarioSpec.named('no_such_scenario')

    def test_custom_directory(self, tmp_path):
        (tmp_path / 'tiny.json').write_text(json.dumps({
            'scenario': 'tiny', 'model': 'proportional',
            'main_effects': [{'x': 2, 'coef': 0.5}],
            'interactions': [{'x': 1, 'z': 1, 'coef': -1.0}],
        }))
        spec = ScenarioSpec.named('tiny', tmp_path)
        assert available_scenarios(tmp_path) == ['tiny']
        np.testing.assert_array_equal(spec.main_effects(3), [0.0, 0.5, 0.0])
        assert spec.interactions(3, 2)[0, 0] == -1.0
        assert not spec.is_timevarying

    def test_interaction_support(self):
        hier = ScenarioSpec.named('prop_hier').interaction_support(10, 4)
        assert hier.shape == (10, 5)
        assert hier.sum() == 4
        assert hier[0, 0] and hier[1, 3]
        assert not hier[:, 4].any()

        tv = ScenarioSpec.named('tv_hier').interaction_support(10, 0)
        np.testing.assert_array_equal(np.flatnonzero(tv[:, 0]), [0, 1])


class TestGenerators:

    def test_proportional_shapes_and_reproducibility(self):
        spec = ScenarioSpec.named('prop_hier')
        first = generate_proportional(spec, 50, 10, 4, seed=1)
        second = generate_proportional(spec, 50, 10, 4, seed=1)
        assert first.X.shape == (50, 10) and first.Z.shape == (50, 4)
        assert set(np.unique(first.Z)) <= {0.0, 1.0}
        np.testing.assert_array_equal(first.y, second.y)
        assert 0 < first.delta.sum() < 50

    def test_pattern_needs_dims(self):
        with pytest.raises(PatternNeedsDimsError):
            generate_proportional(ScenarioSpec.named('prop_hier'), 50, 6, 4)
        with pytest.raises(PatternNeedsDimsError):
            SimDesign(scenario='prop_nonhier', p=10, nz=2)

    def test_timevarying_uniform_covariates(self):
        data = generate_timevarying(ScenarioSpec.named('tv_hier'), 80, 6, seed=2)
        assert data.nz == 0
        assert data.X.min() >= 0.0 and data.X.max() < 1.0
        assert np.all(data.y > 0)

    def test_covariate_law_from_definition(self, tmp_path):
        (tmp_path / 'uniform_prop.json').write_text(json.dumps({
            'scenario': 'uniform_prop', 'model': 'proportional', 'covariate_law': 'uniform',
            'main_effects': [{'x': 1, 'coef': 1.0}],
        }))
        spec = ScenarioSpec.named('uniform_prop', tmp_path)
        assert spec.covariate_law == 'uniform'
        data = generate_proportional(spec, 200, 3, 0, seed=4)
        assert data.X.min() >= 0.0 and data.X.max() < 1.0

    def test_covariate_law_defaults_by_model(self, tmp_path):
        (tmp_path / 'bare_tv.json').write_text(json.dumps({
            'scenario': 'bare_tv', 'model': 'timevarying', 'time_effects': [{'x': 1, 'coef': 1.0}],
        }))
        assert ScenarioSpec.named('bare_tv', tmp_path).covariate_law == 'uniform'
        assert ScenarioSpec.named('prop_hier').covariate_law == 'normal'

    def test_covariate_law_override(self):
        spec = ScenarioSpec.named('tv_hier')
        normal = generate_timevarying(spec, 300, 6, seed=2, covariate_law='normal')
        assert normal.X.min() < 0.0
        uniform = generate_timevarying(spec, 300, 6, seed=2)
        assert uniform.X.min() >= 0.0

    def test_unknown_covariate_law(self):
        with pytest.raises(UnknownCovariateLawError):
            generate_proportional(ScenarioSpec.named('prop_hier'), 20, 10, 4, covariate_law='cauchy')
        with pytest.raises(UnknownCovariateLawError):
            SimDesign(scenario='prop_hier', covariate_law='cauchy')

    def test_timevarying_times(self):
        E = np.array([1.0, 1.0, 5.0])
        main = np.zeros(3)
        k = np.array([0.0, 1.0, -0.5])
        y = timevarying_times(E, main, k)
        assert y[0] == pytest.approx(1.0)
        assert y[1] == pytest.approx(np.log(2.0))
        # 1 + 5 * (-0.5) < 0: cumulative hazard never reaches E
        assert np.isinf(y[2])

    def test_true_model_reference_loglik(self):
        spec = ScenarioSpec.named('prop_hier')
        data = generate_proportional(spec, 40, 8, 4, seed=3)
        truth = true_model(spec, 8, 4)
        eta = linear_predictor(np.zeros(4), spec.main_effects(8), spec.interactions(8, 4), data.X, data.Z)
        expected = partial_loglik(eta, validate_and_index(data), data.omega)
        assert tv_partial_loglik(truth, data) == pytest.approx(expected)

    def test_true_model_timevarying(self):
        truth = true_model(ScenarioSpec.named('tv_hier'), 6, 0)
        assert truth.model.Theta.shape == (6, 1)
        eta = truth.eta_at(np.array([[1.0, 0, 0, 0, 0, 0]]), np.zeros((1, 0)), np.array([2.0]))
        assert eta[0] == pytest.approx(-1.0 + 2.0 * 5.0)


class TestSimDesign:

    def test_scenario_defaults(self):
        design = SimDesign.from_scenario('tv_hier', n_reps=3)
        assert design.n == 500 and design.p == 10 and design.nz == 0
        assert design.alpha == 0.0
        assert design.basis == 'spline:5' and design.sample == 5
        assert design.to_dict()['scenario'] == 'tv_hier'

    def test_design_routes_covariate_law(self):
        design = SimDesign.from_scenario('prop_hier', covariate_law='uniform')
        assert design.to_dict()['covariate_law'] == 'uniform'
        data = generate(design, 100, np.random.SeedSequence(1))
        assert data.X.min() >= 0.0 and data.X.max() < 1.0
        assert SimDesign.from_scenario('tv_hier').covariate_law == 'uniform'

    def test_default_methods(self):
        assert default_methods(SimDesign.from_scenario('prop_hier')) == [
            METHOD_PLASSO, METHOD_LASSO_MAIN, METHOD_LASSO_FULL,
        ]
        assert METHOD_LASSO_FULL not in default_methods(SimDesign.from_scenario('prop_null', nz=0))


class TestSelection:

    def test_time_columns_form_one_unit(self):
        Theta = np.array([[0.0, 0.2, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        selection = pliable_selection(Theta, np.array([1.0, 0.0, 0.5]), nz=1)
        np.testing.assert_array_equal(selection.units, [[False, True], [False, False], [True, False]])
        np.testing.assert_array_equal(selection.beta, [True, False, True])

    def test_count_errors(self):
        selection = Selection(np.array([True, True, False]), np.array([[True], [False], [False]]))
        truth_beta = np.array([1.0, 0.0, 1.0])
        truth_units = np.array([[False], [False], [True]])
        assert count_errors(selection, truth_beta, truth_units) == (1, 1, 1, 1)


class TestTables:

    def test_text_rounds_to_three_decimals(self, metrics):
        text = emit_table(metrics)
        assert text.splitlines()[0].split() == ['method', 'test_nll', 'fp_beta', 'fn_beta', 'fp_theta',
                                                'fn_theta', 'reference_nll', 'reps']
        assert '1.235' in text
        assert '1.23456' not in text

    def test_empty_is_header_only(self):
        assert emit_table([]).strip().split() == list(METRIC_COLUMNS)
        assert emit_table([], 'csv').strip() == ','.join(METRIC_COLUMNS)

    def test_failures_note(self, metrics):
        text = emit_table(metrics, failures={'plasso': 0, 'lasso (main)': 1})
        assert text.rstrip().endswith('excluded replicates: lasso (main)=1')

    def test_csv(self, metrics):
        lines = emit_table(metrics, 'csv').splitlines()
        assert lines[0] == ','.join(METRIC_COLUMNS)
        assert lines[1].startswith('plasso,1.235,0.500')

    def test_unknown_format(self, metrics):
        with pytest.raises(TableFormatError):
            emit_table(metrics, 'html')

    def test_write_by_suffix(self, metrics, tmp_path):
        csv_path = write_table(metrics, tmp_path / 'out' / 'table.csv')
        frame = pd.read_csv(csv_path)
        assert list(frame.columns) == list(METRIC_COLUMNS)
        assert frame['reps'].tolist() == [20, 19]
        txt_path = write_table(metrics, tmp_path / 'table.txt')
        assert txt_path.read_text().startswith('method')


@pytest.mark.slow
class TestComparison:

    def test_small_proportional_run(self):
        design = SimDesign.from_scenario('prop_hier', n=80, n_test=200, n_reps=2, seed=7)
        config = PathConfig(nlambda=5, lambda_min_ratio=0.05, nfolds=3)
        result = run_comparison(design, path_config=config)

        assert [m.method for m in result.metrics] == default_methods(design)
        assert all(m.reps == 2 for m in result.metrics)
        assert set(result.failures.values()) == {0}
        assert len(result.replicates) == 6
        plasso = result.replicates[result.replicates['method'] == METHOD_PLASSO]
        assert (plasso['hierarchy_violations'] == 0).all()
        assert np.all(np.isfinite(result.replicates['test_nll']))

        again = run_comparison(design, path_config=config)
        pd.testing.assert_frame_equal(result.replicates, again.replicates)
