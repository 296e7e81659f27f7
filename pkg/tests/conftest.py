import pytest

from periodtwo.gluing import labeling_from_seed
from periodtwo.metric import MetricConfig, separation_delta0
from periodtwo.scenario import builtin_bump_scenario, materialize_seed

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def scenario():
    return builtin_bump_scenario()


@pytest.fixture(scope="session")
def seed(scenario):
    return materialize_seed(scenario)


@pytest.fixture(scope="session")
def labeling(seed):
    return labeling_from_seed(seed)


@pytest.fixture(scope="session")
def cfg():
    return MetricConfig()


@pytest.fixture(scope="session")
def delta0(labeling, cfg):
    return separation_delta0(labeling, cfg)


@pytest.fixture
def acceptance_line():
    def record(line: str) -> None:
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
