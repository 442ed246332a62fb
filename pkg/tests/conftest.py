import pytest

from helpers import ACCEPTANCE, SCENARIOS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {key}: {detail}")


@pytest.fixture
def scenario_path():
    def get(name):
        return SCENARIOS / f"{name}.toml"
    return get
