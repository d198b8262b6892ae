from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import settings

from irvaudit.ballots import load_election

DATA = Path(__file__).resolve().parent.parent / "data"

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

CRITERIA = {
    1: "BRAVO ASN exactness",
    2: "EO audit ASNs",
    3: "SE audit ASNs",
    4: "WO audit ASNs",
    5: "MACRO discrepancy",
    6: "RAIRE plans on the four-candidate example",
    7: "RAIRE soundness and minimality on 1000 random elections",
    8: "CP zero-error run length",
    9: "risk limit on a wrong-winner election",
    10: "error-injection calibration",
    11: "grid harness table layouts",
}

_results: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _results.setdefault(marker.args[0], []).append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        runs = _results[n]
        ok = all(p for _, p in runs)
        failed = [name for name, p in runs if not p]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {CRITERIA.get(n, '')}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        tr.write_line(line)


@pytest.fixture(scope="session")
def table1():
    return load_election(DATA / "table1.json")


@pytest.fixture(scope="session")
def example4():
    return load_election(DATA / "example4.json")


@pytest.fixture(scope="session")
def example6():
    return load_election(DATA / "example6.json")


@pytest.fixture(scope="session")
def example6_variant():
    return load_election(DATA / "example6_variant.json")


@pytest.fixture(scope="session")
def example8():
    return load_election(DATA / "example8.json")
