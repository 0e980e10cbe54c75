"""Pytest configuration and shared fixtures."""

import pytest
import numpy as np
import pandas as pd

from coxplasso.config import settings as settings_module
from coxplasso.config.settings import Settings
from coxplasso.data.dataset import SurvivalDataset
from coxplasso.data.design import standardize


def make_dataset(n=40, p=3, nz=2, seed=0, ties=False, weights=False, signal=1.0):
    """Random proportional-hazards data; optional tied times and weights."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    Z = (rng.random((n, nz)) < 0.5).astype(float) if nz else None
    eta = signal * X[:, 0]
    if nz:
        eta = eta + signal * X[:, 0] * Z[:, 0]
    y = rng.exponential(1.0, n) * np.exp(-eta)
    c = rng.exponential(1.5, n)
    time = np.minimum(y, c)
    delta = (y <= c).astype(float)
    if ties:
        time = np.ceil(time * 4) / 4
    omega = rng.uniform(0.5, 2.0, n) if weights else None
    return SurvivalDataset(y=time, delta=delta, omega=omega, X=X, Z=Z)


@pytest.fixture(autouse=True)
def test_settings(monkeypatch):
    """Use testing settings (no parallelism, no file logging) for every test."""
    settings = Settings.for_testing()
    monkeypatch.setattr(settings_module, '_settings', settings)
    return settings


@pytest.fixture
def tiny_data():
    """Six observations with one tie among failures and one censored at a failure time."""
    return SurvivalDataset(
        y=[1.0, 2.0, 2.0, 3.0, 3.0, 5.0],
        delta=[1, 1, 1, 0, 1, 0],
        omega=[1.0, 2.0, 1.0, 1.0, 0.5, 1.0],
        X=[[0.5, 1.0], [-1.0, 0.0], [0.2, -0.3], [1.5, 0.7], [-0.4, 2.0], [0.0, -1.0]],
        Z=[[1.0], [0.0], [1.0], [0.0], [1.0], [0.0]],
    )


@pytest.fixture
def random_data():
    """Seeded random dataset, n=60, p=3, nz=2."""
    return make_dataset(n=60, p=3, nz=2, seed=11)


@pytest.fixture
def standardized_data(random_data):
    """random_data centered and scaled."""
    scaled, _ = standardize(random_data)
    return scaled


@pytest.fixture
def survival_csv(tmp_path):
    """CSV file in the survival input layout, n=50, p=3, nz=2."""
    data = make_dataset(n=50, p=3, nz=2, seed=5)
    frame = data.to_frame()
    path = tmp_path / "survival.csv"
    frame.to_csv(path, index=False)
    return path


@pytest.fixture
def survival_frame():
    """Survival input table with renamed columns."""
    rng = np.random.default_rng(3)
    n = 30
    return pd.DataFrame({
        'time': rng.exponential(1.0, n),
        'status': (rng.random(n) < 0.7).astype(int),
        'x_age': rng.standard_normal(n),
        'x_dose': rng.standard_normal(n),
        'z_sex': (rng.random(n) < 0.5).astype(int),
    })
