import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings

from conftest import specs
from oracles import FIGURE_LAPLACIAN, FIGURE_TO_OURS, cycle_rank, nx_distance, nx_graph
from chiralwalk.graphs import (
    build,
    chain,
    check_graph,
    count_free_phases,
    distance,
    graph_from_dict,
    weighted_path,
)
from chiralwalk.hamiltonian import build_laplacian
from chiralwalk.notation import Handles, Join, Merge, parse


def test_example_graph_structure():
    g = build("C3/C5+P1")
    assert g.n == 8 and g.num_edges == 9
    assert g.edges == ((1, 2), (1, 3), (2, 3), (2, 4), (2, 7), (4, 5), (5, 6), (5, 8), (6, 7))
    assert (g.start, g.target) == (1, 8)
    assert distance(g) == 4
    assert count_free_phases(g) == 2


def test_example_laplacian_matches_drawing_under_fixed_relabeling():
    lap = build_laplacian(build("C3/C5+P1"))
    idx = np.array(FIGURE_TO_OURS) - 1
    assert np.array_equal(lap[np.ix_(idx, idx)], FIGURE_LAPLACIAN)
    assert lap[1, 1] == 4


def test_example_graph_isomorphic_to_drawing():
    drawn = nx.from_numpy_array(np.diag(np.diag(FIGURE_LAPLACIAN)) - FIGURE_LAPLACIAN)
    assert nx.is_isomorphic(drawn, nx_graph(build("C3/C5+P1")))


@pytest.mark.parametrize("text,start,target", [("C5", 1, 3), ("C6", 1, 4), ("C7", 1, 4),
                                               ("C3", 1, 2), ("P4", 1, 4), ("DiC4(1,3)", 1, 3),
                                               ("DiC8(1-5)", 1, 5), ("DiC7(3,6,6)", 1, 6)])
def test_endpoints(text, start, target):
    g = build(text)
    assert (g.start, g.target) == (start, target)


@pytest.mark.parametrize("text,d", [("P9", 8), ("DiC4(1,3)", 1), ("chain(C3,5)", 7),
                                    ("h(C6)", 5), ("chain(C4,3)", 8), ("P1", 0)])
def test_distance(text, d):
    g = build(text)
    assert distance(g) == d == nx_distance(g)


def test_distance_disconnected_raises():
    g = graph_from_dict({"n": 3, "edges": [[1, 2]], "start": 1, "target": 3})
    with pytest.raises(ValueError):
        distance(g)


@pytest.mark.parametrize("text,f", [("P9", 0), ("C4", 1), ("DiC7(3,6)", 2), ("chain(C3,4)", 4)])
def test_free_phases(text, f):
    g = build(text)
    assert count_free_phases(g) == f == len(g.loops)


def test_dicycle_loops_split_by_chord():
    g = build("DiC7(3,6)")
    assert g.loops == ((1, 2, 3, 6, 7), (3, 4, 5, 6))


def test_handles_attach_at_endpoints():
    g = build("h(C6)")
    assert g.n == 8 and (g.start, g.target) == (1, 8)
    assert g.has_edge(1, 2) and g.has_edge(5, 8)


def test_chain_equals_explicit_form():
    assert chain("C3", 5) == build("h(C3/C3/C3/C3/C3)")


def test_weighted_path():
    g = weighted_path(4, 2 ** 0.5)
    assert [g.weight(*e) for e in g.edges] == [1.0, 2 ** 0.5, 1.0]
    assert build("Pw4:1") == build("P4")
    with pytest.raises(ValueError):
        weighted_path(2, 1.5)


def test_mirror_exists_for_palindromes():
    assert build("chain(C3,4)").mirror is not None
    assert build("C3/C5").mirror is None
    assert build("DiC7(3,6)").mirror is None
    assert build("C5").mirror == (3, 2, 1, 5, 4)


def test_exports():
    g = build("C3+P2")
    data = json.loads(g.to_json())
    assert data["n"] == 5 and data["edges"][0] == [1, 2] and data["loops"] == [[1, 2, 3]]
    assert graph_from_dict(data) == g
    assert g.to_edge_list().splitlines()[0] == "# n=5 start=1 target=5"


@settings(max_examples=1000)
@given(specs)
def test_loop_count_equals_cycle_rank(spec):
    g = build(spec)
    check_graph(g)
    assert len(g.loops) == g.num_edges - g.n + 1 == cycle_rank(g)


@given(specs, specs)
def test_composition_counts_and_distance(a, b):
    ga, gb = build(a), build(b)
    m, j = build(Merge(a, b)), build(Join(a, b))
    assert (m.n, m.num_edges) == (ga.n + gb.n - 1, ga.num_edges + gb.num_edges)
    assert (j.n, j.num_edges) == (ga.n + gb.n, ga.num_edges + gb.num_edges + 1)
    assert distance(m) == distance(ga) + distance(gb) == nx_distance(m)
    assert distance(j) == distance(ga) + distance(gb) + 1 == nx_distance(j)
    assert distance(build(Handles(a))) == distance(ga) + 2


@given(specs)
def test_build_is_deterministic(spec):
    assert build(spec) == build(spec)
    assert build(spec).to_json() == build(parse(build(spec).notation)).to_json()
