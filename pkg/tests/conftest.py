from __future__ import annotations

import os
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from morse_persist.gridmap import GridMap  # noqa: E402
from morse_persist.persistence import AddEdge, AddVertex, MergeVertices, MorseGraph, OpError, apply_op, check_op  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


# Hand-drawn grid maps: each map lists only the cells and edges that matter,
# with merged cells named by concatenating their parts.
FIG1_EDGES = {
    "A": [("G2", "G2"), ("G1", "G2"), ("G1", "G3"), ("G2", "G3"), ("G4", "G5"),
          ("G5", "G6"), ("G6", "G6"), ("G7", "G7"), ("G7", "G6")],
    "B": [("G12", "G12"), ("G12", "G34"), ("G34", "G5"), ("G5", "G6"), ("G6", "G6"),
          ("G7", "G7"), ("G7", "G6")],
    "C": [("G12", "G12"), ("G12", "G345"), ("G345", "G345"), ("G345", "G6"), ("G6", "G6"),
          ("G7", "G7"), ("G7", "G6")],
    "D": [("G12", "G12"), ("G12", "G345"), ("G345", "G345"), ("G345", "G67"), ("G67", "G67")],
}
FIG1_VERTICES = {
    "A": ["G1", "G2", "G3", "G4", "G5", "G6", "G7"],
    "B": ["G12", "G34", "G5", "G6", "G7"],
    "C": ["G12", "G345", "G6", "G7"],
    "D": ["G12", "G345", "G67"],
}
FIG1_REFINE = {
    ("A", "B"): {"G1": "G12", "G2": "G12", "G3": "G34", "G4": "G34", "G5": "G5", "G6": "G6", "G7": "G7"},
    ("B", "C"): {"G12": "G12", "G34": "G345", "G5": "G345", "G6": "G6", "G7": "G7"},
    ("C", "D"): {"G12": "G12", "G345": "G345", "G6": "G67", "G7": "G67"},
}
FIG1_MORSE_SETS = {
    "A": [{"G2"}, {"G6"}, {"G7"}],
    "B": [{"G12"}, {"G6"}, {"G7"}],
    "C": [{"G12"}, {"G345"}, {"G6"}, {"G7"}],
    "D": [{"G12"}, {"G345"}, {"G67"}],
}

# Morse graphs with the figure's vertex names.
FIG2 = {
    "A": MorseGraph(("v1", "v2", "v3"), {("v3", "v2")}),
    "B": MorseGraph(("v1'", "v2", "v3"), {("v3", "v2"), ("v1'", "v2")}),
    "C": MorseGraph(("v1'", "v4", "v2", "v3"), {("v3", "v2"), ("v1'", "v4"), ("v4", "v2"), ("v1'", "v2")}),
    "D": MorseGraph(("v1'", "v4", "v2'"), {("v1'", "v4"), ("v4", "v2'"), ("v1'", "v2'")}),
}
# Morse set (by its cell) -> figure vertex name, per level.
FIG2_NAMES = {
    "A": {"G2": "v1", "G6": "v2", "G7": "v3"},
    "B": {"G12": "v1'", "G6": "v2", "G7": "v3"},
    "C": {"G12": "v1'", "G345": "v4", "G6": "v2", "G7": "v3"},
    "D": {"G12": "v1'", "G345": "v4", "G67": "v2'"},
}

FIG4_EDGES = [("v12", "v22"), ("v11", "v21"), ("v11", "v22"), ("v21", "v11"), ("v21", "v12"), ("v22", "v11")]


@pytest.fixture
def fig1():
    return {k: GridMap.from_edges(FIG1_EDGES[k], vertices=FIG1_VERTICES[k]) for k in "ABCD"}


@pytest.fixture
def fig4():
    return GridMap.from_edges(FIG4_EDGES)


# -- strategies ----------------------------------------------------------------


@st.composite
def digraphs(draw, max_vertices=8, min_vertices=1, loops=True):
    n = draw(st.integers(min_vertices, max_vertices))
    pairs = [(u, v) for u in range(n) for v in range(n) if loops or u != v]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs)) if pairs else st.just(set()))
    return list(range(n)), sorted(edges)


@st.composite
def morse_graphs(draw, max_vertices=10):
    """Random transitively closed DAGs: edges only go from higher to lower labels."""
    n = draw(st.integers(1, max_vertices))
    pairs = [(u, v) for u in range(n) for v in range(u)]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs)) if pairs else st.just(set()))
    perm = draw(st.permutations(range(n)))
    edges = {(perm[u], perm[v]) for u, v in edges}
    return MorseGraph.closure_of(range(n), edges)


def legal_ops(g: MorseGraph, fresh) -> list:
    ops = [AddVertex(fresh)]
    for v in g.vertices:
        for w in g.vertices:
            for op in (AddEdge(v, w), MergeVertices(v, w)):
                try:
                    check_op(op, g)
                    ops.append(op)
                except OpError:
                    pass
    return ops


@st.composite
def homomorphisms(draw, max_vertices=7, max_ops=4):
    """A Morse graph, a random quotient of it, and the quotient map."""
    src = draw(morse_graphs(max_vertices=max_vertices))
    # merge along a random sequence of legal operations
    g = src
    where = {v: v for v in src.vertices}
    for step in range(draw(st.integers(0, max_ops))):
        op = draw(st.sampled_from(legal_ops(g, ("x", step))))
        g = apply_op(g, op)
        if isinstance(op, MergeVertices):
            where = {s: (op.v if c == op.w else c) for s, c in where.items()}
    return src, g, where
