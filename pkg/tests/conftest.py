import numpy as np
import pytest

from disco.cli import generate_from_config, train_from_config
from disco.config import RunConfig

# planted setting shared by the learnability, ablation and interpretability checks
PLANTED = RunConfig(seed=7)


@pytest.fixture(scope="session")
def planted():
    ds, truth = generate_from_config(PLANTED)
    return PLANTED, ds, truth


@pytest.fixture(scope="session")
def planted_model(planted):
    cfg, ds, _ = planted
    return train_from_config(cfg, ds)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
