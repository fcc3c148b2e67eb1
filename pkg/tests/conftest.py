import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from locpoly.montecarlo import ExperimentConfig, build_tables

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

M1_X0 = (0.5 * math.pi, math.pi, 1.5 * math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def m1_panel():
    """Full m1 table panel at R=1000; shared by the table-band checks."""
    cfg = ExperimentConfig(
        models=("m1",), rhos=(0.0, 0.5, 0.9), ns=(200, 600), replications=1000
    )
    table, figures = build_tables(cfg)
    return cfg, table, figures
