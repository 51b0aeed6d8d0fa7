import importlib

import pytest

from gtcorr import _pykernels

try:
    _compiled = importlib.import_module("gtcorr._kernels")
except ImportError:  # extension not built
    _compiled = None

BACKENDS = [pytest.param(_pykernels, id="python")]
if _compiled is not None:
    BACKENDS.append(pytest.param(_compiled, id="cython"))


@pytest.fixture(params=BACKENDS)
def kern(request):
    return request.param


@pytest.fixture
def compiled():
    if _compiled is None:
        pytest.skip("compiled kernels not built")
    return _compiled



# --- acceptance criteria summary ---------------------------------------------

_CRITERIA: dict = {}  # nodeid -> _Criterion
_OUTCOMES: dict = {}  # nodeid -> (passed, seconds)


class _Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)


@pytest.fixture
def criterion(request):
    """Register the acceptance criterion a test checks.

    ``c = criterion(3, "tail ratios")`` then ``c.note(...)`` for measured
    values; pass/fail is the test outcome and is printed in the summary.
    """

    def make(number: int, title: str) -> _Criterion:
        c = _CRITERIA[request.node.nodeid] = _Criterion(number, title)
        return c

    return make


def pytest_runtest_logreport(report):
    if report.when == "call":
        _OUTCOMES[report.nodeid] = (report.passed, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, c in sorted(_CRITERIA.items(), key=lambda kv: kv[1].number):
        passed, seconds = _OUTCOMES.get(nodeid, (False, 0.0))
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {c.number:2d}: {c.title} ({seconds:.2f} s)"
        if c.details:
            line += " -- " + "; ".join(c.details)
        terminalreporter.write_line(line)
