import json
from functools import lru_cache
from pathlib import Path

import pytest

from clusterspaces.quiver_exchange import dynkin_exchange_matrix, enumerate_exchange_graph, opposite_graph
from clusterspaces.tropical_fan import ClusterFan

DATA = Path(__file__).parent / "data"

# criterion number -> PASS/FAIL line, filled by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


@lru_cache(maxsize=None)
def graph(name: str):
    return enumerate_exchange_graph(dynkin_exchange_matrix(name))


@lru_cache(maxsize=None)
def fan(name: str) -> ClusterFan:
    return ClusterFan(graph(name))


@lru_cache(maxsize=None)
def opposite_fan(name: str) -> ClusterFan:
    return ClusterFan(opposite_graph(graph(name)))


@pytest.fixture(scope="session")
def oracles() -> dict:
    return json.loads((DATA / "oracles.json").read_text())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
