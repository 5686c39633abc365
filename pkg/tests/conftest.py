import numpy as np
import pytest

from glassbench.sk import coupling_from_array, generate_couplings


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(name: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        print(line)
        request.config.acceptance_lines.append(line)
        return ok

    return record


@pytest.fixture
def two_spin():
    return coupling_from_array([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[10, 12])
def small_instance(request):
    return generate_couplings(request.param, 1000 + request.param)
