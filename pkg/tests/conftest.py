import pytest

from lrbac.cli import corpus_path
from lrbac.syntax import parse_program

# lines recorded by the acceptance suite, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def corpus():
    """Load a packaged corpus program by file name."""
    cache = {}

    def load(name):
        if name not in cache:
            cache[name] = parse_program(corpus_path(name).read_text(encoding="utf-8"))
        return cache[name]
    return load
