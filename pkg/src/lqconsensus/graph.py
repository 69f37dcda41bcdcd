"""Simple undirected graphs and the matrices derived from them.

Node ids are 1-based at the interface and 0-based in every matrix.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    EmptyGraphError,
    GraphError,
    NodeOutOfRangeError,
    NotConnectedError,
    SelfLoopError,
)
from .numerics import psd_pseudoinverse


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph on nodes 1..n.

    ``edges`` holds each undirected edge once, as ``(i, j)`` with ``i < j``.
    """

    n: int
    edges: frozenset

    def neighbors(self, i: int) -> list[int]:
        out = [b for a, b in self.edges if a == i] + [a for a, b in self.edges if b == i]
        return sorted(out)


@dataclass(frozen=True)
class GraphMatrices:
    adjacency: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray
    averaging: np.ndarray

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return np.diag(self.degree).copy()


def build_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Validate and normalise an edge list into a :class:`Graph`.

    Duplicate edges and both orientations of the same edge collapse to one.
    """
    if int(n) != n or n < 2:
        raise EmptyGraphError(f"need at least 2 nodes, got n={n}")
    n = int(n)
    normalized = set()
    for pair in edges:
        i, j = (int(v) for v in pair)
        for v in (i, j):
            if not 1 <= v <= n:
                raise NodeOutOfRangeError(f"node {v} outside [1, {n}]")
        if i == j:
            raise SelfLoopError(f"self-loop at node {i}")
        normalized.add((min(i, j), max(i, j)))
    return Graph(n=n, edges=frozenset(normalized))


def is_connected(g: Graph) -> bool:
    adj: list[list[int]] = [[] for _ in range(g.n)]
    for i, j in g.edges:
        adj[i - 1].append(j - 1)
        adj[j - 1].append(i - 1)
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == g.n


def derive_matrices(g: Graph) -> GraphMatrices:
    """Adjacency, degree, Laplacian ``D - A`` and averaging ``(D+I)^-1 (A+I)``.

    Raises
    ------
    NotConnectedError
        If the graph has more than one component.
    """
    if not is_connected(g):
        raise NotConnectedError(f"graph with {g.n} nodes and {len(g.edges)} edges is not connected")
    a = np.zeros((g.n, g.n))
    for i, j in g.edges:
        a[i - 1, j - 1] = a[j - 1, i - 1] = 1.0
    d = np.diag(a.sum(axis=1))
    lap = d - a
    # row i: 1/(d_i + 1) on the diagonal and on each neighbour column
    averaging = (a + np.eye(g.n)) / (np.diag(d) + 1.0)[:, None]
    for arr in (a, d, lap, averaging):
        arr.setflags(write=False)
    return GraphMatrices(adjacency=a, degree=d, laplacian=lap, averaging=averaging)


def laplacian_pseudoinverse(m: GraphMatrices) -> np.ndarray:
    """Moore-Penrose inverse of L, inverting only the non-kernel eigenvalues."""
    return psd_pseudoinverse(m.laplacian)


def cycle_graph(n: int) -> Graph:
    return build_graph(n, [(i, i % n + 1) for i in range(1, n + 1)])


def path_graph(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(1, n)])


def parse_edge_list(text: str) -> Graph:
    """Parse the edge-list format: a node count, then one ``i j`` pair per line.

    ``#`` starts a comment; blank lines are ignored.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise GraphError("edge list is empty")
    lineno, first = rows[0]
    if len(first) != 1:
        raise GraphError(f"line {lineno}: expected node count, got {' '.join(first)!r}")
    n = _parse_int(first[0], lineno)
    edges = []
    for lineno, tok in rows[1:]:
        if len(tok) != 2:
            raise GraphError(f"line {lineno}: expected 'i j', got {' '.join(tok)!r}")
        edges.append((_parse_int(tok[0], lineno), _parse_int(tok[1], lineno)))
    return build_graph(n, edges)


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphError(f"line {lineno}: not an integer: {token!r}") from None


def read_edge_list(path: str | Path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def format_edge_list(g: Graph) -> str:
    lines = [str(g.n)] + [f"{i} {j}" for i, j in sorted(g.edges)]
    return "\n".join(lines) + "\n"
