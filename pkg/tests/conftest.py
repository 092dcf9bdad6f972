import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reflab.algebra import build_context  # noqa: E402

# the six PV rows: (minimal polynomial, printed roots)
PV_TABLE = [
    ("z^2-z-1", [1.6180, -0.6180]),
    ("z^2+z-1", [-1.6180, 0.6180]),
    ("z^2-4z+2", [3.4142, 0.5858]),
    ("z^3-2z^2-z+1", [2.2470, 0.5550, -0.8019]),
    ("z^3-z-1", [1.3247, complex(-0.6624, 0.5623), complex(-0.6624, -0.5623)]),
    ("z^4-z^3-1", [1.3803, -0.8192, complex(0.2194, 0.9145), complex(0.2194, -0.9145)]),
]


@pytest.fixture(scope="session")
def golden():
    return build_context("z^2-z-1")


@pytest.fixture(scope="session")
def plastic():
    return build_context("z^3-z-1")


@pytest.fixture(scope="session")
def pv_contexts():
    return {p: build_context(p) for p, _ in PV_TABLE}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
