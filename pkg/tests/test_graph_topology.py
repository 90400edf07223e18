import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import morocco_like_table
from iomarkov.errors import DimensionMismatch, InputError, NotStochastic
from iomarkov.graph_topology import (
    Digraph,
    accessibility,
    adjacency_from_matrix,
    classify_states,
    components_from_accessibility,
    essential_flows,
    strong_components,
    tarjan,
    topological_order,
)
from iomarkov.io_table import augment, coefficients

A2 = np.array([[0.1, 0.4], [0.1, 0.4]])


def bool_graphs(max_n=12):
    return st.integers(1, max_n).flatmap(lambda n: arrays(bool, (n, n), elements=st.booleans()))


def graph(adj):
    adj = np.asarray(adj, dtype=bool)
    return Digraph(tuple(f"v{i}" for i in range(len(adj))), adj)


def as_sets(parts):
    return {frozenset(p) for p in parts}


# ---- construction --------------------------------------------------------

def test_adjacency_examples():
    assert not adjacency_from_matrix(np.zeros((3, 3))).adjacency.any()
    g = adjacency_from_matrix(np.eye(3))
    assert g.arcs() == [(0, 0), (1, 1), (2, 2)]
    assert adjacency_from_matrix(A2).adjacency.all()
    assert adjacency_from_matrix(A2, tol=0.2).arcs() == [(0, 1), (1, 1)]


def test_adjacency_rejects_bad_labels():
    with pytest.raises(DimensionMismatch):
        adjacency_from_matrix(A2, ["only"])
    with pytest.raises(InputError):
        adjacency_from_matrix(A2, ["a", "a"])


# ---- reachability --------------------------------------------------------

def test_reachability_examples():
    single = accessibility(graph([[False]]))
    assert single.accessibility.tolist() == [[True]] and single.distance.tolist() == [[0.0]]

    path = accessibility(graph([[0, 1, 0], [0, 0, 1], [0, 0, 0]]))
    assert np.array_equal(path.accessibility, np.triu(np.ones((3, 3), dtype=bool)))
    assert path.distance[0, 2] == 2
    assert np.isinf(path.distance[2, 0])

    cycle = accessibility(graph([[0, 1], [1, 0]]))
    assert cycle.accessibility.all()
    assert cycle.distance.tolist() == [[0, 1], [1, 0]]


@settings(max_examples=150, deadline=None)
@given(bool_graphs(max_n=8))
def test_distance_is_first_boolean_power(adj):
    n = len(adj)
    summ = accessibility(graph(adj))
    assert np.all(np.diag(summ.accessibility)) and np.all(np.diag(summ.distance) == 0)
    first = np.full((n, n), np.inf)
    power = np.eye(n, dtype=bool)
    for k in range(1, n + 1):
        power = (power.astype(int) @ adj.astype(int)) > 0
        first[np.isinf(first) & power] = k
    off = ~np.eye(n, dtype=bool)
    assert np.array_equal(summ.distance[off], first[off])
    assert np.array_equal(np.isfinite(summ.distance[off]), summ.accessibility[off])


# ---- strong components ---------------------------------------------------

def test_component_examples():
    assert len(strong_components(graph(np.ones((4, 4)))).components) == 1
    dag = graph([[0, 1, 0], [0, 0, 1], [0, 0, 0]])
    part = strong_components(dag)
    assert part.components == [(0,), (1,), (2,)]
    assert np.array_equal(part.condensation.adjacency, dag.adjacency)


def test_tarjan_handles_deep_paths():
    n = 3000
    adj = np.zeros((n, n), dtype=bool)
    adj[np.arange(n - 1), np.arange(1, n)] = True
    adj[n - 1, 0] = True
    assert len(tarjan(adj)) == 1


@settings(max_examples=200, deadline=None)
@given(bool_graphs(max_n=12))
def test_tarjan_matches_accessibility_partition(adj):
    part = strong_components(graph(adj))
    assert as_sets(part.components) == as_sets(components_from_accessibility(adj))
    assert sorted(i for c in part.components for i in c) == list(range(len(adj)))
    order = topological_order(part.condensation)
    assert order is not None
    # components are listed sources first
    assert order == sorted(order) or all(
        not part.condensation.adjacency[j, i] for i in range(len(order)) for j in range(i + 1, len(order))
    )


def test_morocco_like_components():
    chain = augment(coefficients(morocco_like_table()), "indirect")
    g = adjacency_from_matrix(chain.transition, chain.labels)
    comps = as_sets(strong_components(g).labelled(chain.labels))
    others = frozenset(chain.labels[:35])
    assert comps == {frozenset({"FE"}), frozenset({"D97T98"}), others}


# ---- state classification -------------------------------------------------

def test_classify_two_pole_chain(two_pole):
    chain = augment(coefficients(two_pole))
    cls = classify_states(adjacency_from_matrix(chain.transition, chain.labels))
    assert cls.kinds == ("transient", "transient", "absorbing")
    assert cls.closed_sets == [(2,)]


def test_classify_identity_and_recurrent_class():
    assert classify_states(adjacency_from_matrix(np.eye(3))).kinds == ("absorbing",) * 3
    p = np.array([[0.5, 0.5, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    cls = classify_states(adjacency_from_matrix(p))
    assert cls.kinds == ("transient", "recurrent", "recurrent")
    assert cls.indices("recurrent") == [1, 2]


def test_classify_requires_stochastic_rows():
    with pytest.raises(NotStochastic):
        classify_states(adjacency_from_matrix(A2))


def test_morocco_like_classification():
    chain = augment(coefficients(morocco_like_table()), "indirect")
    cls = classify_states(adjacency_from_matrix(chain.transition, chain.labels))
    assert cls.indices("absorbing") == [36]
    assert len(cls.indices("transient")) == 36


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: arrays(np.float64, (n, n), elements=st.sampled_from([0.0, 0.0, 0.3, 1.0]))))
def test_closed_sets_are_closed(w):
    w = w + np.eye(len(w)) * (w.sum(axis=1, keepdims=True) == 0)
    p = w / w.sum(axis=1, keepdims=True)
    g = adjacency_from_matrix(p)
    cls = classify_states(g)
    for closed in cls.closed_sets:
        members = set(closed)
        for i in closed:
            assert set(g.successors(i).tolist()) <= members
    for i in cls.indices("absorbing"):
        assert p[i, i] == pytest.approx(1.0)


# ---- essential flows -----------------------------------------------------

def test_essential_flow_examples():
    g = adjacency_from_matrix(A2)
    assert np.array_equal(essential_flows(g, 1e-300).adjacency, g.adjacency)
    assert not essential_flows(g, 1.0).adjacency.any()
    assert essential_flows(g, 1 / 3).arcs() == [(0, 1), (1, 1)]
    with pytest.raises(InputError):
        essential_flows(g, 0.0)
