import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from pegemd.graph import TannerGraph

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_graph(rng, n_var, n_chk, p=0.3, max_deg=None):
    h = (rng.random((n_chk, n_var)) < p).astype(np.uint8)
    if max_deg is not None:
        for v in range(n_var):
            ones = np.flatnonzero(h[:, v])
            if ones.size > max_deg:
                h[rng.choice(ones, ones.size - max_deg, replace=False), v] = 0
    return TannerGraph.from_matrix(h)


@st.composite
def graphs(draw, max_var=10, max_chk=8, min_var=1, min_chk=1):
    n = draw(st.integers(min_var, max_var))
    m = draw(st.integers(min_chk, max_chk))
    bits = draw(st.lists(st.booleans(), min_size=n * m, max_size=n * m))
    h = np.array(bits, dtype=np.uint8).reshape(m, n)
    return TannerGraph.from_matrix(h)


def two_candidate_graph():
    """Seven variables, checks c5/c6 play the two candidates."""
    chks = [{0, 1, 2}, {0, 3}, {2, 4, 5}, {3, 4, 6}, {1, 6}, {4}, {5}]
    return TannerGraph(7, 7, [(v, c) for c, s in enumerate(chks) for v in s])


def closed_ring_graph():
    """Four variables, five checks; the whole variable set is a stopping set."""
    chks = [{0, 1}, {0, 1}, {1, 2}, {1, 3}, {2, 3}]
    return TannerGraph(4, 5, [(v, c) for c, s in enumerate(chks) for v in s])


@pytest.fixture
def twocand():
    return two_candidate_graph()


@pytest.fixture
def ring():
    return closed_ring_graph()


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[criterion] = (bool(ok), detail)
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
