import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

from mvhedge.tree import Node, ScenarioTree


def pytest_terminal_summary(terminalreporter):
    """Echo the one-line-per-criterion acceptance results, which pytest's
    capture would otherwise swallow."""
    try:
        from test_acceptance import CRITERION_LINES
    except ImportError:
        return
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def binomial():
    """One-period worked example: S0=10, moves +1/-1, probs 0.6/0.4."""
    return ScenarioTree([
        Node("r", 0, None, 1.0, 10.0),
        Node("u", 1, "r", 0.6, 11.0, payoff=11.0),
        Node("d", 1, "r", 0.4, 9.0, payoff=9.0),
    ])


@pytest.fixture
def binomial2():
    """Two iid periods of the binomial step."""
    return ScenarioTree([
        Node("r", 0, None, 1.0, 10.0),
        Node("u", 1, "r", 0.6, 11.0),
        Node("d", 1, "r", 0.4, 9.0),
        Node("uu", 2, "u", 0.6, 12.0),
        Node("ud", 2, "u", 0.4, 10.0),
        Node("du", 2, "d", 0.6, 10.0),
        Node("dd", 2, "d", 0.4, 8.0),
    ])


@pytest.fixture
def martingale_tree():
    """Three-period recombining-id martingale tree (driftless steps)."""
    nodes = [Node("r", 0, None, 1.0, 10.0)]
    frontier = [("r", 10.0)]
    for t in range(1, 4):
        nxt = []
        for nid, price in frontier:
            for tag, ds, p in (("u", 1.0, 0.5), ("d", -1.0, 0.5)):
                cid = f"{nid}{tag}"
                nodes.append(Node(cid, t, nid, p, price + ds))
                nxt.append((cid, price + ds))
        frontier = nxt
    return ScenarioTree(nodes)


@pytest.fixture
def incomplete_tree():
    """Two periods, three-child root, heterogeneous one-step tradeoffs
    below it; the minimal and variance-optimal densities differ here."""
    return ScenarioTree([
        Node("root", 0, None, 1.0, 10.0),
        Node("a", 1, "root", 0.3, 11.0),
        Node("b", 1, "root", 0.3, 10.0),
        Node("c", 1, "root", 0.4, 9.0),
        Node("a1", 2, "a", 0.5, 12.0),
        Node("a2", 2, "a", 0.5, 10.0),
        Node("b1", 2, "b", 0.4, 12.0),
        Node("b2", 2, "b", 0.6, 9.0),
        Node("c1", 2, "c", 0.7, 10.0),
        Node("c2", 2, "c", 0.3, 8.0),
    ])
