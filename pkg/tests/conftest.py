import numpy as np
import pytest

# acceptance results collected by tests/test_acceptance.py and echoed at the end of the run
ACCEPTANCE: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = f"ACCEPTANCE {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture
def rng():
    # independent of the PCG64 stream used by the chain generators
    return np.random.Generator(np.random.Philox(20261015))
