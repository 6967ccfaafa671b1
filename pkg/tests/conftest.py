import itertools
import string

import numpy as np
import pytest
from hypothesis import strategies as st

from fi_linkpred import email_benchmark
from fi_linkpred.graph import FeatureGraph

NAMES = [f"f{c}" for c in string.ascii_lowercase]


def random_graph(rng, n, p):
    """G(n, p) over names f_a, f_b, ... with unwanted edges."""
    feats = NAMES[:n]
    edges = [(a, b) for a, b in itertools.combinations(feats, 2) if rng.random() < p]
    return FeatureGraph.from_edges(feats, edges)


def seeded_graphs(count=100, max_n=8, p=0.4, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, max_n + 1))
        out.append(random_graph(rng, n, p))
    return out


@st.composite
def graphs(draw, min_n=2, max_n=8):
    n = draw(st.integers(min_n, max_n))
    feats = NAMES[:n]
    pairs = list(itertools.combinations(feats, 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return FeatureGraph.from_edges(feats, [p for p, keep in zip(pairs, mask) if keep])


def path(*names):
    return FeatureGraph.from_edges(names, list(zip(names, names[1:])))


def complete(*names):
    return FeatureGraph.from_edges(names, list(itertools.combinations(names, 2)))


@pytest.fixture(scope="session")
def email():
    return email_benchmark()


# acceptance criteria report one line each; shown at the end of every run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
