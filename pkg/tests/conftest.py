import numpy as np
import pytest

from symptomnet.graph import BayesNet, NetworkSpec, NodeSpec, TabularCPD


def make_net(nodes, edges, tables):
    """Small-network helper: nodes as {name: cardinality}, tables as arrays."""
    spec = NetworkSpec(
        nodes=tuple(
            NodeSpec(name, tuple(str(i) for i in range(card)))
            for name, card in nodes.items()
        ),
        edges=tuple(edges),
    )
    cpds = []
    for name in nodes:
        parents = tuple(p for p, c in edges if c == name)
        cpds.append(TabularCPD(name, parents, np.asarray(tables[name], dtype=float)))
    return BayesNet(spec, cpds)


def random_network(rng: np.random.Generator, max_nodes=8, max_card=4, edge_prob=0.35):
    """Random parameterized DAG; edges only from earlier to later nodes."""
    n = int(rng.integers(2, max_nodes + 1))
    names = [f"n{i}" for i in range(n)]
    cards = {name: int(rng.integers(2, max_card + 1)) for name in names}
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.append((names[i], names[j]))
    tables = {}
    for name in names:
        parents = tuple(p for p, c in edges if c == name)
        shape = (cards[name], *(cards[p] for p in parents))
        raw = rng.random(shape) + 0.05
        tables[name] = raw / raw.sum(axis=0, keepdims=True)
    return make_net(cards, edges, tables)


@pytest.fixture
def chain_net():
    """A -> B -> C with the fixed parameterization used across inference tests."""
    return make_net(
        {"A": 2, "B": 2, "C": 2},
        [("A", "B"), ("B", "C")],
        {
            "A": [0.7, 0.3],
            "B": [[0.8, 0.2], [0.2, 0.8]],
            "C": [[0.9, 0.1], [0.1, 0.9]],
        },
    )
