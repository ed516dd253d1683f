import numpy as np
import pytest

from debiaskit.data import Dataset

REPO_ROOT = __import__("pathlib").Path(__file__).resolve().parents[1]
ADULT_PATHS = [REPO_ROOT / "data" / "adult.data", REPO_ROOT / "data" / "adult.test"]


def make_dataset(n=200, seed=0, signal=1.0, n_features=5):
    """Synthetic two-group dataset: labels depend on the first feature,
    group membership weakly shifts the second one."""
    rng = np.random.default_rng(seed)
    a = (rng.random(n) < 0.5).astype(np.int64)
    X = rng.normal(size=(n, n_features))
    X[:, 1] += 0.5 * a
    y = (X[:, 0] * signal + 0.3 * rng.normal(size=n) > 0).astype(np.int64)
    # guarantee both groups and both labels are present
    a[:2] = [0, 1]
    y[:2] = [0, 1]
    return Dataset(features=X, labels=y, protected=a,
                   feature_names=tuple(f"f{i}" for i in range(n_features)))


# One line per acceptance criterion, echoed after the test summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def adult():
    from debiaskit.data import load_adult

    for p in ADULT_PATHS:
        if not p.exists():
            pytest.skip(f"Adult data file missing: {p}")
    return load_adult(ADULT_PATHS)
