import importlib

import pytest

from lcplan import _backend, _pykernels

BACKENDS = [pytest.param(_pykernels, id="python")]
try:
    BACKENDS.append(pytest.param(importlib.import_module("lcplan._ckernels"), id="compiled"))
except ImportError:
    pass


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel implementation."""
    monkeypatch.setattr(_backend, "kernels", request.param)
    return request.param


SCHEDULE = (5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 100, 250, 500, 1000)


# acceptance criteria append (criterion, passed, detail) here; printed after the run
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0][1:].split()[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
