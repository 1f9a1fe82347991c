import os
import sys

import pytest

HERE = os.path.dirname(__file__)
ROOT = os.path.dirname(HERE)
sys.path.insert(0, HERE)

DATA = os.path.join(ROOT, "src", "spinrl", "data")
PARAMS_PATH = os.path.join(DATA, "f18_harv.json")
AERO_PATH = os.path.join(DATA, "aero_harv.json")
ZERO_AERO_PATH = os.path.join(DATA, "aero_zero.json")
CONFIGS = os.path.join(ROOT, "configs")


@pytest.fixture(scope="session")
def shipped():
    from spinrl.aero import load_aero_file
    from spinrl.dynamics import load_params_file

    return load_params_file(PARAMS_PATH), load_aero_file(AERO_PATH)


# One (number, name, passed, detail) entry per acceptance criterion, printed at the end.
ACCEPTANCE: list[tuple[int, str, str, str]] = []


def record(number: int, name: str, status: str, detail: str) -> None:
    ACCEPTANCE.append((number, name, status, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, status, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number} {name}: {status} ({detail})")
