import sys
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prominence.tgraph import GraphSnapshot, ingest_edge_stream  # noqa: E402


def snap(edges, nodes=()):
    ids = set(nodes)
    for u, v in edges:
        ids.update((u, v))
    return GraphSnapshot.from_edges(ids, edges)


def er_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    nodes = [f"n{i}" for i in range(n)]
    edges = [(nodes[i], nodes[j]) for i, j in combinations(range(n), 2) if rng.random() < p]
    return nodes, edges


def complete(k):
    nodes = [str(i) for i in range(k)]
    return nodes, list(combinations(nodes, 2))


def temporal(records, arrivals=None):
    return ingest_edge_stream(records, arrivals)[0]


@pytest.fixture
def triangle():
    return snap([("a", "b"), ("b", "c"), ("a", "c")])


@pytest.fixture
def path3():
    return snap([("a", "b"), ("b", "c")])


@pytest.fixture
def star3():
    return snap([("c", "x"), ("c", "y"), ("c", "z")])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
