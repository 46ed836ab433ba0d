import os

import pytest

from secgraph import GraphSearchSystem, Params
from secgraph.ingest import parse_names, parse_snap

FIXTURES = os.path.join(os.path.dirname(__file__), os.pardir, "fixtures")
TOY_EDGES = os.path.join(FIXTURES, "toy_graph.edges")
TOY_NAMES = os.path.join(FIXTURES, "toy_graph.names")


def build_toy_system(params: Params | None = None) -> GraphSearchSystem:
    system = GraphSearchSystem.create(params or Params())
    system.ingest_edges(parse_snap(TOY_EDGES))
    system.ingest_names(parse_names(TOY_NAMES), s=2)
    return system


@pytest.fixture
def toy_system():
    return build_toy_system()


@pytest.fixture
def empty_system():
    return GraphSearchSystem.create(Params())
