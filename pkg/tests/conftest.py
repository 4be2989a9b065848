import pytest
from hypothesis import settings

# the first call of each compiled kernel pays for JIT compilation
settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion_report():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""

    def report(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
