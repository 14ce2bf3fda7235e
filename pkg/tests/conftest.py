import numpy as np
import pytest

from maxwell_p1 import BumpPermittivity, ExactSolution, build_structured_mesh

ALL_M = list(range(2, 10))


@pytest.fixture(scope="session")
def meshes():
    """Structured meshes by level, built once."""
    cache = {}

    def get(level):
        if level not in cache:
            cache[level] = build_structured_mesh(level)
        return cache[level]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=ALL_M, ids=lambda m: f"m{m}")
def bump(request):
    return BumpPermittivity(request.param)


@pytest.fixture
def exact(bump):
    return ExactSolution(bump)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Criterion number -> (status, detail), reported in the terminal summary."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE_KEY, None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(log):
        status, detail = log[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")
