import numpy as np
import pytest

from sympcast.panel import SyntheticSpec, generate_synthetic


@pytest.fixture(scope="session")
def planted():
    """Default planted panel, seed 0."""
    return generate_synthetic(SyntheticSpec())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# -- acceptance summary -------------------------------------------------------
# Tests marked ``acceptance(number, title, budget_s)`` report one line each at
# the end of the session.

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title, budget): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call":
        return
    number, title, budget = mark.args
    props = dict(item.user_properties)
    _ACCEPTANCE[number] = (rep.passed, title, props.get("elapsed", call.duration), budget, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, title, elapsed, budget, detail = _ACCEPTANCE[number]
        line = f"AC{number:02d} {'PASS' if ok else 'FAIL'}  {title}  ({elapsed:.2f} s, budget {budget:g} s)"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
