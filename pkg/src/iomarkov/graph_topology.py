"""Directed-graph machinery for the flow web.

Graphs are small and dense (one vertex per pole), so they are stored as
boolean adjacency matrices. Strong components come from an iterative Tarjan
traversal; :func:`components_from_accessibility` is the slower Boolean-matrix
route (rows of ``R * R.T``) kept as an independent check.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InputError, NotStochastic
from .matrix_core import as_matrix


@dataclass(frozen=True)
class Digraph:
    labels: tuple[str, ...]
    adjacency: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.labels)
        if self.adjacency.shape != (n, n):
            raise DimensionMismatch(f"adjacency shape {self.adjacency.shape} does not match {n} labels")
        if len(set(self.labels)) != n:
            raise InputError("vertex labels must be unique")
        if self.weights is not None:
            if self.weights.shape != (n, n):
                raise DimensionMismatch("weights shape does not match adjacency")
            if np.any(self.weights[~self.adjacency] != 0):
                raise InputError("weights present where no arc exists")

    @property
    def n(self) -> int:
        return len(self.labels)

    def successors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])

    def arcs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adjacency))]


def adjacency_from_matrix(weights, labels: Sequence[str] | None = None, tol: float = 0.0) -> Digraph:
    """Arc ``i -> j`` iff ``weights[i, j] > tol``; arc weights are kept."""
    w = as_matrix(weights, square=True, name="weights")
    if np.any(w < 0):
        raise InputError("arc weights must be nonnegative")
    if labels is None:
        labels = [str(i) for i in range(w.shape[0])]
    if len(labels) != w.shape[0]:
        raise DimensionMismatch(f"{len(labels)} labels for a {w.shape[0]}-vertex matrix")
    adj = w > tol
    return Digraph(tuple(labels), adj, np.where(adj, w, 0.0))


@dataclass(frozen=True)
class ReachabilitySummary:
    """``accessibility[i, j]``: j reachable from i (reflexive).

    ``distance[i, j]``: length of a shortest path, ``0`` on the diagonal and
    ``inf`` when unreachable.
    """

    accessibility: np.ndarray
    distance: np.ndarray


def transitive_closure(adjacency) -> np.ndarray:
    """Reflexive-transitive closure by Warshall's algorithm."""
    r = np.array(adjacency, dtype=bool) | np.eye(len(adjacency), dtype=bool)
    for k in range(r.shape[0]):
        r |= np.outer(r[:, k], r[k, :])
    return r


def accessibility(g: Digraph) -> ReachabilitySummary:
    r = transitive_closure(g.adjacency)
    d = np.full((g.n, g.n), np.inf)
    for s in range(g.n):
        d[s, s] = 0.0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.successors(u):
                if np.isinf(d[s, v]):
                    d[s, v] = d[s, u] + 1
                    queue.append(v)
    return ReachabilitySummary(r, d)


@dataclass(frozen=True)
class ComponentPartition:
    component_of: np.ndarray
    components: list[tuple[int, ...]]
    condensation: Digraph

    def labelled(self, labels: Sequence[str]) -> list[list[str]]:
        return [[labels[i] for i in comp] for comp in self.components]


def tarjan(adjacency) -> list[list[int]]:
    """Strong components, iteratively, in reverse topological order of the condensation."""
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    succ = [np.flatnonzero(adj[i]).tolist() for i in range(n)]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    result: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                result.append(sorted(comp))
    return result


def components_from_accessibility(adjacency) -> list[tuple[int, ...]]:
    """Partition read off the rows of ``S = R * R.T`` (vertices with equal rows share a component)."""
    r = transitive_closure(adjacency)
    s = r & r.T
    seen: dict[bytes, list[int]] = {}
    for i in range(s.shape[0]):
        seen.setdefault(s[i].tobytes(), []).append(i)
    return [tuple(v) for v in seen.values()]


def _partition(g: Digraph, comps: list[list[int]]) -> ComponentPartition:
    comps = [tuple(c) for c in reversed(comps)]  # sources first
    comp_of = np.empty(g.n, dtype=int)
    for k, c in enumerate(comps):
        comp_of[list(c)] = k
    m = len(comps)
    cadj = np.zeros((m, m), dtype=bool)
    for i, j in g.arcs():
        if comp_of[i] != comp_of[j]:
            cadj[comp_of[i], comp_of[j]] = True
    clabels = tuple("+".join(g.labels[i] for i in c) for c in comps)
    return ComponentPartition(comp_of, comps, Digraph(clabels, cadj))


def strong_components(g: Digraph) -> ComponentPartition:
    return _partition(g, tarjan(g.adjacency))


def topological_order(g: Digraph) -> Optional[list[int]]:
    """Kahn's algorithm; ``None`` if the graph has a cycle (self-loops count)."""
    indeg = g.adjacency.sum(axis=0).astype(int)
    queue = deque(np.flatnonzero(indeg == 0).tolist())
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in g.successors(u):
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(int(v))
    return order if len(order) == g.n else None


@dataclass(frozen=True)
class StateClassification:
    kinds: tuple[str, ...]
    closed_sets: list[tuple[int, ...]] = field(default_factory=list)

    def indices(self, kind: str) -> list[int]:
        if kind == "recurrent":
            return [i for i, k in enumerate(self.kinds) if k in ("recurrent", "absorbing")]
        return [i for i, k in enumerate(self.kinds) if k == kind]


def classify_states(g: Digraph, tol: float = 1e-9) -> StateClassification:
    """Classify the states of a Markov chain given as a weighted digraph.

    A state is recurrent iff its strong component is closed; absorbing iff
    that closed component is the state alone.
    """
    if g.weights is None:
        raise InputError("classify_states needs transition probabilities as arc weights")
    sums = g.weights.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        raise NotStochastic(f"row sums deviate from 1 at states {[g.labels[i] for i in bad]}")
    part = strong_components(g)
    closed = [not part.condensation.adjacency[k].any() for k in range(len(part.components))]
    kinds = ["transient"] * g.n
    closed_sets = []
    for k, comp in enumerate(part.components):
        if not closed[k]:
            continue
        closed_sets.append(comp)
        for i in comp:
            single = len(comp) == 1 and abs(g.weights[i, i] - 1.0) <= tol
            kinds[i] = "absorbing" if single else "recurrent"
    return StateClassification(tuple(kinds), closed_sets)


def essential_flows(g: Digraph, threshold: float) -> Digraph:
    """Keep only arcs whose weight strictly exceeds ``threshold``."""
    if g.weights is None:
        raise InputError("essential_flows needs a weighted digraph")
    if not 0.0 < threshold <= 1.0:
        raise InputError(f"threshold must lie in (0, 1], got {threshold}")
    keep = g.weights > threshold
    return Digraph(g.labels, keep, np.where(keep, g.weights, 0.0))


def fair_threshold(n_states: int) -> float:
    """The fair-division share ``1/(n+1)`` for an augmented chain of ``n_states = n+1`` states."""
    return 1.0 / n_states
