import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def record(request):
    """record(n, ok, detail): one PASS/FAIL line per acceptance criterion."""
    store = request.config.stash.setdefault(_RESULTS, {})

    def _record(n: int, ok: bool, detail: str) -> None:
        store[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(store[n])
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_RESULTS, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for n in sorted(store):
            terminalreporter.write_line(store[n])
