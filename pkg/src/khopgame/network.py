"""Targeted-network representation and neighborhood queries.

A :class:`Graph` is an immutable undirected simple graph with a
participation probability per edge.  Node labels from edge-list files are
mapped to dense integer ids in first-seen order; all other modules work
exclusively with dense ids.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

NO_HOP = np.iinfo(np.int32).max
"""Sentinel hop distance for unreachable / non-participating nodes."""


class EdgeListParseError(ValueError):
    """Raised for malformed edge-list input; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph with per-edge participation probabilities.

    ``adj_indptr`` / ``adj_nbr`` / ``adj_edge`` form a CSR adjacency whose
    neighbor lists are sorted by node id, so every traversal is
    deterministic.  Safe for unsynchronized concurrent reads.
    """

    node_count: int
    labels: tuple[str, ...]
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_p: np.ndarray
    adj_indptr: np.ndarray
    adj_nbr: np.ndarray
    adj_edge: np.ndarray
    degree: np.ndarray
    dropped_duplicates: int = 0
    dropped_self_loops: int = 0
    label_ids: dict[str, int] = field(repr=False, default_factory=dict)

    @property
    def edge_count(self) -> int:
        return len(self.edge_u)

    def endpoints(self, e: int) -> tuple[int, int]:
        return int(self.edge_u[e]), int(self.edge_v[e])

    def edge_between(self, u: int, v: int) -> int | None:
        """Edge index joining ``u`` and ``v``, or ``None``."""
        lo, hi = self.adj_indptr[u], self.adj_indptr[u + 1]
        pos = np.searchsorted(self.adj_nbr[lo:hi], v)
        if pos < hi - lo and self.adj_nbr[lo + pos] == v:
            return int(self.adj_edge[lo + pos])
        return None

    def check_node(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise ValueError(f"node id {v} out of range [0, {self.node_count})")


def build_graph(
    node_count: int,
    edges: Sequence[tuple[int, int, float]],
    labels: Sequence[str] | None = None,
    dropped_duplicates: int = 0,
    dropped_self_loops: int = 0,
) -> Graph:
    """Construct a Graph from ``(u, v, p)`` triples.

    Rejects self-loops, duplicate edges and probabilities outside [0, 1];
    the file loader is responsible for cleaning raw input first.
    """
    if node_count < 0:
        raise ValueError("node_count must be nonnegative")
    m = len(edges)
    edge_u = np.empty(m, dtype=np.int32)
    edge_v = np.empty(m, dtype=np.int32)
    edge_p = np.empty(m, dtype=np.float64)
    seen: set[tuple[int, int]] = set()
    for i, (u, v, p) in enumerate(edges):
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise ValueError(f"edge ({u},{v}) references a node out of range")
        if u == v:
            raise ValueError(f"self-loop on node {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise ValueError(f"duplicate edge ({u},{v})")
        seen.add(key)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"edge ({u},{v}) probability {p} outside [0,1]")
        edge_u[i], edge_v[i], edge_p[i] = key[0], key[1], p

    degree = np.zeros(node_count, dtype=np.int32)
    np.add.at(degree, edge_u, 1)
    np.add.at(degree, edge_v, 1)
    indptr = np.zeros(node_count + 1, dtype=np.int64)
    np.cumsum(degree, out=indptr[1:])
    nbr = np.empty(2 * m, dtype=np.int32)
    adj_edge = np.empty(2 * m, dtype=np.int32)
    cursor = indptr[:-1].copy()
    for i in range(m):
        u, v = int(edge_u[i]), int(edge_v[i])
        nbr[cursor[u]], adj_edge[cursor[u]] = v, i
        cursor[u] += 1
        nbr[cursor[v]], adj_edge[cursor[v]] = u, i
        cursor[v] += 1
    # Sort each adjacency slice by neighbor id for deterministic iteration.
    for u in range(node_count):
        lo, hi = indptr[u], indptr[u + 1]
        order = np.argsort(nbr[lo:hi], kind="stable")
        nbr[lo:hi] = nbr[lo:hi][order]
        adj_edge[lo:hi] = adj_edge[lo:hi][order]

    if labels is None:
        labels = tuple(str(i) for i in range(node_count))
    else:
        labels = tuple(labels)
        if len(labels) != node_count:
            raise ValueError("labels length must equal node_count")
    label_ids = {lab: i for i, lab in enumerate(labels)}

    for arr in (edge_u, edge_v, edge_p, indptr, nbr, adj_edge, degree):
        arr.setflags(write=False)
    return Graph(
        node_count=node_count,
        labels=labels,
        edge_u=edge_u,
        edge_v=edge_v,
        edge_p=edge_p,
        adj_indptr=indptr,
        adj_nbr=nbr,
        adj_edge=adj_edge,
        degree=degree,
        dropped_duplicates=dropped_duplicates,
        dropped_self_loops=dropped_self_loops,
        label_ids=label_ids,
    )


def load_edge_list(source: IO[str] | Iterable[str], default_p: float = 0.5) -> Graph:
    """Load a graph from whitespace-separated edge-list text.

    Each non-comment line is ``<u> <v>`` or ``<u> <v> <p>``; comment lines
    start with ``#`` or ``%``.  Labels may be arbitrary strings and are
    assigned dense ids in first-seen order.  Self-loops and duplicate
    edges are dropped (first probability wins) and counted on the
    returned graph.
    """
    if not 0.0 <= default_p <= 1.0:
        raise ValueError(f"default_p {default_p} outside [0,1]")
    label_ids: dict[str, int] = {}
    labels: list[str] = []
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    dup = 0
    loops = 0

    def node_id(label: str) -> int:
        idx = label_ids.get(label)
        if idx is None:
            idx = len(labels)
            label_ids[label] = idx
            labels.append(label)
        return idx

    for line_no, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#%":
            continue
        tokens = stripped.split()
        if len(tokens) == 2:
            p = default_p
        elif len(tokens) == 3:
            try:
                p = float(tokens[2])
            except ValueError:
                raise EdgeListParseError(line_no, f"non-numeric probability {tokens[2]!r}") from None
            if not 0.0 <= p <= 1.0:
                raise EdgeListParseError(line_no, f"probability {p} outside [0,1]")
        else:
            raise EdgeListParseError(line_no, f"expected 2 or 3 tokens, got {len(tokens)}")
        u, v = node_id(tokens[0]), node_id(tokens[1])
        if u == v:
            loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            dup += 1
            continue
        seen.add(key)
        edges.append((key[0], key[1], p))

    return build_graph(
        len(labels),
        edges,
        labels=labels,
        dropped_duplicates=dup,
        dropped_self_loops=loops,
    )


def neighbors(g: Graph, v: int) -> list[tuple[int, int]]:
    """Sorted ``(neighbor, edge index)`` pairs of ``v``."""
    g.check_node(v)
    lo, hi = g.adj_indptr[v], g.adj_indptr[v + 1]
    return [(int(g.adj_nbr[i]), int(g.adj_edge[i])) for i in range(lo, hi)]


def bfs_within(g: Graph, src: int, max_hops: int) -> dict[int, int]:
    """Unweighted hop distances from ``src`` for all nodes within ``max_hops``."""
    g.check_node(src)
    if max_hops < 0:
        raise ValueError("max_hops must be nonnegative")
    dist = {src: 0}
    queue = deque([src])
    indptr, nbr = g.adj_indptr, g.adj_nbr
    while queue:
        v = queue.popleft()
        d = dist[v]
        if d == max_hops:
            continue
        for i in range(indptr[v], indptr[v + 1]):
            w = int(nbr[i])
            if w not in dist:
                dist[w] = d + 1
                queue.append(w)
    return dist


def multi_source_hops(
    g: Graph,
    sources: Iterable[int],
    max_hops: int,
    edge_live: np.ndarray | None = None,
) -> np.ndarray:
    """Hop distance from the nearest source, truncated at ``max_hops``.

    Traverses only edges where ``edge_live`` is true (all edges when it is
    ``None``).  Unreached nodes get :data:`NO_HOP`.
    """
    hops = np.full(g.node_count, NO_HOP, dtype=np.int32)
    queue: deque[int] = deque()
    for s in sources:
        g.check_node(s)
        if hops[s] != 0:
            hops[s] = 0
            queue.append(s)
    indptr, nbr, adj_edge = g.adj_indptr, g.adj_nbr, g.adj_edge
    while queue:
        v = queue.popleft()
        d = hops[v]
        if d == max_hops:
            continue
        for i in range(indptr[v], indptr[v + 1]):
            if edge_live is not None and not edge_live[adj_edge[i]]:
                continue
            w = nbr[i]
            if hops[w] == NO_HOP:
                hops[w] = d + 1
                queue.append(w)
    return hops


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Model parameters: acceptance probabilities, revenue schedule, hop limit, budget.

    ``revenue`` has ``k + 1`` non-increasing nonnegative entries; the
    revenue of a node beyond hop ``k`` (or unreachable) is zero by
    convention.
    """

    accept_prob: np.ndarray
    revenue: np.ndarray
    k: int
    budget: int = 1

    def __post_init__(self):
        accept = np.asarray(self.accept_prob, dtype=np.float64)
        rev = np.asarray(self.revenue, dtype=np.float64)
        if self.k < 0:
            raise ValueError("hop limit k must be nonnegative")
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if rev.ndim != 1 or len(rev) != self.k + 1:
            raise ValueError(f"revenue must have k+1 = {self.k + 1} entries")
        if np.any(rev < 0):
            raise ValueError("revenue entries must be nonnegative")
        if np.any(np.diff(rev) > 0):
            raise ValueError("revenue must be non-increasing by hop level")
        if np.any((accept < 0) | (accept > 1)):
            raise ValueError("acceptance probabilities must lie in [0,1]")
        object.__setattr__(self, "accept_prob", accept)
        object.__setattr__(self, "revenue", rev)

    def validate_for(self, g: Graph) -> None:
        if len(self.accept_prob) != g.node_count:
            raise ValueError(
                f"accept_prob has {len(self.accept_prob)} entries for a "
                f"{g.node_count}-node graph"
            )

    @property
    def revenue_ext(self) -> np.ndarray:
        """Revenue indexed by ``min(hop, k + 1)``; the extra slot is 0."""
        return np.append(self.revenue, 0.0)
