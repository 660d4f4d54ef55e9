from __future__ import annotations

import pytest

from hornlp import load_fixture


@pytest.fixture
def fixture():
    return load_fixture


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
