import numpy as np
import pytest

from swarmseg.phantom import PhantomSpec, synth_sample

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        item.call_report = report


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(passed, detail)``."""
    recorded = []

    def record(passed: bool, detail: str = ""):
        recorded.append((request.node.name, bool(passed), detail))
        return passed

    yield record
    report = getattr(request.node, "call_report", None)
    if recorded:
        name, passed, detail = recorded[-1]
        _ACCEPTANCE.append((name, passed and (report is None or report.passed), detail))
    else:
        _ACCEPTANCE.append((request.node.name, False, "raised before a result was recorded"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.fixture(scope="session")
def default_phantom():
    return synth_sample(PhantomSpec())


@pytest.fixture(scope="session")
def clean_phantom():
    """Noise-free phantom with three voids."""
    spec = PhantomSpec(background_std=0, deposit_std=0,
                       voids=((64, 50, 6, 4), (128, 50, 4, 4), (192, 50, 5, 3)))
    return synth_sample(spec)


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)
