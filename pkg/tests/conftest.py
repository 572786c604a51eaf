import sys

import pytest
from hypothesis import HealthCheck, settings

from efx import get_theory
from efx.reproductions import load

settings.register_profile(
    "efx",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("efx")

ALL_THEORIES = ("pure", "error", "nondet", "prob", "store", "io")


def theory(key):
    if key == "error":
        return get_theory("error", labels=("e",))
    if key == "store":
        return get_theory("store", locations=("l",), bound=1)
    return get_theory(key)


@pytest.fixture(scope="session")
def ex71():
    return load("ex71.efx")


@pytest.fixture(scope="session")
def ex72():
    return load("ex72.efx")


@pytest.fixture(scope="session")
def store_prog():
    return load("store.efx")


@pytest.fixture(scope="session")
def nondet():
    return get_theory("nondet")


@pytest.fixture(scope="session")
def pure():
    return get_theory("pure")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    by_criterion = {}
    for label, line in results.items():
        by_criterion.setdefault(label.split(" (")[0], []).append(line)
    for name in sorted(by_criterion, key=lambda n: int(n.split()[1])):
        lines = by_criterion[name]
        if len(lines) == 1:
            terminalreporter.write_line(lines[0])
            continue
        passed = sum(": PASS" in line for line in lines)
        verdict = "PASS" if passed == len(lines) else "FAIL"
        terminalreporter.write_line(f"{name}: {verdict} ({passed}/{len(lines)} suites)")
        for line in lines:
            if ": PASS" not in line:
                terminalreporter.write_line(f"  {line}")
