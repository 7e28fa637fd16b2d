import numpy as np
import pytest

from abplab.mmspace import build_model_space


@pytest.fixture(scope="session")
def interval11():
    return build_model_space({"model": "interval", "a": 0, "b": 1, "n": 11})


@pytest.fixture(scope="session")
def interval101():
    return build_model_space({"model": "interval", "a": 0, "b": 1, "n": 101})


@pytest.fixture(scope="session")
def interval201():
    return build_model_space({"model": "interval", "a": 0, "b": 1, "n": 201})


@pytest.fixture(scope="session")
def circle100():
    return build_model_space({"model": "circle", "n": 100})


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance_log(request):
    """Collects the PASS/FAIL line of an acceptance criterion for the terminal summary."""
    lines = request.config._acceptance_lines

    def record(number, ok, text):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
