"""Tests for interaction design, standardization and raw-scale mapping."""

import numpy as np
import pytest

from coxplasso.data.dataset import ConstantColumnError, DimensionMismatchError
from coxplasso.data.design import (
    ScalingRecord,
    build_interactions,
    column_moments,
    standardize,
)


class TestInteractions:

    def test_block_layout(self):
        X = np.array([[1.0, 2.0], [3.0, 4.0]])
        Z = np.array([[10.0, 0.0, 1.0], [0.0, 5.0, 2.0]])
        design = build_interactions(X, Z)
        assert design.W.shape == (2, 6)
        np.testing.assert_allclose(design.block(0), X[:, [0]] * Z)
        np.testing.assert_allclose(design.block(1), X[:, [1]] * Z)

    def test_row_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            build_interactions(np.ones((3, 2)), np.ones((4, 1)))


class TestStandardize:

    def test_moments(self, random_data):
        scaled, record = standardize(random_data)
        mean, sd = column_moments(scaled.X)
        np.testing.assert_allclose(mean, 0.0, atol=1e-12)
        np.testing.assert_allclose(sd, 1.0)
        zmean, zsd = column_moments(scaled.Z)
        np.testing.assert_allclose(zmean, 0.0, atol=1e-12)
        np.testing.assert_allclose(zsd, 1.0)
        assert record.x_mean.shape == (3,)

    def test_modifiers_left_alone(self, random_data):
        scaled, record = standardize(random_data, include_splines=False)
        np.testing.assert_array_equal(scaled.Z, random_data.Z)
        np.testing.assert_array_equal(record.z_scale, np.ones(2))

    def test_constant_column_raises(self, random_data):
        X = np.array(random_data.X)
        X[:, 1] = 3.0
        with pytest.raises(ConstantColumnError) as info:
            standardize(random_data.with_design(X))
        assert info.value.column == 1

    def test_constant_column_dropped(self, random_data):
        X = np.array(random_data.X)
        X[:, 1] = 3.0
        scaled, record = standardize(random_data.with_design(X), exclude_constant=True)
        assert scaled.p == 2
        assert record.x_dropped == (1,)
        assert scaled.x_names == ['x_1', 'x_3']

    def test_needs_two_rows(self, tiny_data):
        with pytest.raises(DimensionMismatchError):
            standardize(tiny_data.subset([0]))

    def test_apply_reproduces_training_scale(self, random_data):
        scaled, record = standardize(random_data)
        X, Z = record.apply(random_data.X, random_data.Z)
        np.testing.assert_allclose(X, scaled.X)
        np.testing.assert_allclose(Z, scaled.Z)

    def test_apply_width_check(self, random_data):
        _, record = standardize(random_data)
        with pytest.raises(DimensionMismatchError):
            record.apply(np.ones((2, 4)), np.ones((2, 2)))


class TestUnscale:

    def test_linear_predictor_preserved(self, random_data):
        scaled, record = standardize(random_data)
        rng = np.random.default_rng(2)
        theta0 = rng.standard_normal(2)
        beta = rng.standard_normal(3)
        Theta = rng.standard_normal((3, 2))

        def eta(X, Z, t0, b, T):
            return Z @ t0 + X @ b + np.sum((X @ T) * Z, axis=1)

        standardized = eta(scaled.X, scaled.Z, theta0, beta, Theta)
        raw = record.unscale(theta0, beta, Theta)
        reproduced = eta(random_data.X, random_data.Z, raw.theta0, raw.beta, raw.Theta) + raw.offset
        np.testing.assert_allclose(reproduced, standardized, atol=1e-10)

    def test_identity_record(self):
        record = ScalingRecord.identity(2, 1)
        raw = record.unscale(np.array([0.5]), np.array([1.0, -1.0]), np.array([[2.0], [0.0]]))
        np.testing.assert_allclose(raw.beta, [1.0, -1.0])
        assert raw.offset == 0.0

    def test_dict_round_trip(self, random_data):
        _, record = standardize(random_data)
        again = ScalingRecord.from_dict(record.to_dict())
        np.testing.assert_array_equal(again.x_scale, record.x_scale)
        assert again.z_dropped == record.z_dropped
