from importlib import resources

import pytest

from chrjx import parse_program, translate_program

ACCEPTANCE_RESULTS = {}


def bundled(name):
    return (resources.files("chrjx") / "programs" / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def min_program():
    return parse_program(bundled("min.chr"))


@pytest.fixture(scope="session")
def path_program():
    return parse_program(bundled("path.chr"))


@pytest.fixture(scope="session")
def min_jprog(min_program):
    return translate_program(min_program)


@pytest.fixture(scope="session")
def path_jprog(path_program):
    return translate_program(path_program)


@pytest.fixture
def record_acceptance():
    def record(number, passed, detail=""):
        ACCEPTANCE_RESULTS[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
