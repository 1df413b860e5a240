"""Ground-truth and observed state machinery.

Node states record whether an invited user accepted; edge states record
whether a friend invitation across that edge succeeds.  A full
:class:`Realization` assigns every state up front; a
:class:`LazyRealization` draws each state on first access from a
counter-based stream, which is distributionally identical and lets
independent policy runs share one ground truth regardless of the order in
which they touch it.  A :class:`PartialRealization` is what a policy has
observed so far.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .network import NO_HOP, Graph, ModelParams, multi_source_hops
from .seeding import derive_seed, unit_uniform

UNKNOWN = np.int8(-1)
ZERO = np.int8(0)
ONE = np.int8(1)


@dataclass(eq=False)
class Realization:
    """Fully assigned node and edge states."""

    node_state: np.ndarray
    edge_state: np.ndarray

    def node(self, v: int) -> int:
        return int(self.node_state[v])

    def edge(self, e: int) -> int:
        return int(self.edge_state[e])


class LazyRealization:
    """Ground truth sampled on first access.

    Each item's value is a pure function of ``(seed, item)``, so the
    realization is well-defined before anything is touched and two
    consumers reading in different orders observe the same world.
    """

    def __init__(self, g: Graph, params: ModelParams, seed: int):
        params.validate_for(g)
        self._g = g
        self._theta = params.accept_prob
        self._p = g.edge_p
        self._node_seed = derive_seed(seed, "node")
        self._edge_seed = derive_seed(seed, "edge")
        self.node_state = np.full(g.node_count, UNKNOWN, dtype=np.int8)
        self.edge_state = np.full(g.edge_count, UNKNOWN, dtype=np.int8)

    def node(self, v: int) -> int:
        s = self.node_state[v]
        if s == UNKNOWN:
            s = ONE if unit_uniform(self._node_seed, v) < self._theta[v] else ZERO
            self.node_state[v] = s
        return int(s)

    def edge(self, e: int) -> int:
        s = self.edge_state[e]
        if s == UNKNOWN:
            s = ONE if unit_uniform(self._edge_seed, e) < self._p[e] else ZERO
            self.edge_state[e] = s
        return int(s)

    def materialize(self) -> Realization:
        for v in range(len(self.node_state)):
            self.node(v)
        for e in range(len(self.edge_state)):
            self.edge(e)
        return Realization(self.node_state.copy(), self.edge_state.copy())


RealizationLike = Realization | LazyRealization


def sample_realization(g: Graph, params: ModelParams, rng: np.random.Generator) -> Realization:
    """Draw a full realization: nodes ~ Bernoulli(theta), edges ~ Bernoulli(p)."""
    params.validate_for(g)
    node_state = (rng.random(g.node_count) < params.accept_prob).astype(np.int8)
    edge_state = (rng.random(g.edge_count) < g.edge_p).astype(np.int8)
    return Realization(node_state, edge_state)


@dataclass(eq=False)
class PartialRealization:
    """States observed so far, plus the invitation bookkeeping.

    ``invited`` holds every node whose state is known (it was invited);
    ``accepted_initiators`` is the ordered sublist that accepted.  A state
    set once never changes.
    """

    node_state: np.ndarray
    edge_state: np.ndarray
    accepted_initiators: list[int] = field(default_factory=list)
    invited: set[int] = field(default_factory=set)

    @classmethod
    def empty(cls, g: Graph) -> "PartialRealization":
        return cls(
            node_state=np.full(g.node_count, UNKNOWN, dtype=np.int8),
            edge_state=np.full(g.edge_count, UNKNOWN, dtype=np.int8),
        )

    def copy(self) -> "PartialRealization":
        return PartialRealization(
            node_state=self.node_state.copy(),
            edge_state=self.edge_state.copy(),
            accepted_initiators=list(self.accepted_initiators),
            invited=set(self.invited),
        )

    def key(self) -> tuple:
        """Hashable identity of the observed states (for memoization in tests)."""
        return (
            self.node_state.tobytes(),
            self.edge_state.tobytes(),
            tuple(self.accepted_initiators),
        )


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what} size mismatch: {a.shape} vs {b.shape}")


def is_consistent(phi: Realization, psi: PartialRealization) -> bool:
    """True iff every observed entry of ``psi`` equals the corresponding entry of ``phi``."""
    _check_same_shape(phi.node_state, psi.node_state, "node state")
    _check_same_shape(phi.edge_state, psi.edge_state, "edge state")
    nodes_ok = np.all((psi.node_state == UNKNOWN) | (psi.node_state == phi.node_state))
    edges_ok = np.all((psi.edge_state == UNKNOWN) | (psi.edge_state == phi.edge_state))
    return bool(nodes_ok and edges_ok)


def is_subrealization(psi: PartialRealization, psi2: PartialRealization) -> bool:
    """True iff ``psi2`` extends ``psi``: larger domain, equal where both are observed."""
    _check_same_shape(psi.node_state, psi2.node_state, "node state")
    _check_same_shape(psi.edge_state, psi2.edge_state, "edge state")
    nodes_ok = np.all((psi.node_state == UNKNOWN) | (psi.node_state == psi2.node_state))
    edges_ok = np.all((psi.edge_state == UNKNOWN) | (psi.edge_state == psi2.edge_state))
    return bool(nodes_ok and edges_ok)


def hop_levels(g: Graph, psi: PartialRealization, k: int) -> np.ndarray:
    """Hop level of every node under ``psi``: distance to the nearest
    accepted initiator over live edges, truncated at ``k`` (:data:`NO_HOP`
    beyond that)."""
    return multi_source_hops(g, psi.accepted_initiators, k, edge_live=psi.edge_state == ONE)


def hop_level(g: Graph, psi: PartialRealization, v: int, k: int) -> int | float:
    """Hop level of node ``v`` under ``psi``; ``math.inf`` if not a participant."""
    g.check_node(v)
    h = hop_levels(g, psi, k)[v]
    return math.inf if h == NO_HOP else int(h)


def reveal_after_accept(
    g: Graph,
    psi: PartialRealization,
    u: int,
    phi: RealizationLike,
    k: int,
    mode: str = "diffusion",
) -> PartialRealization:
    """Invite ``u`` and reveal the outcome, returning the extended observation.

    If ``u`` rejects, only its node state is recorded.  If it accepts, the
    diffusion it launches is revealed level by level: every edge incident
    to a participant fewer than ``k`` live hops from ``u`` has its state
    uncovered, and the wave advances across the live ones.  Edges touching
    only non-participants stay unknown.

    ``mode="distance"`` is an alternative reveal for sensitivity studies:
    on acceptance it uncovers every edge with an endpoint within graph
    distance ``k - 1`` of ``u``, ignoring participation.
    """
    g.check_node(u)
    if u in psi.invited:
        raise ValueError(f"node {u} was already invited")
    if mode not in ("diffusion", "distance"):
        raise ValueError(f"unknown reveal mode {mode!r}")
    _check_consistent_known(psi, phi)

    out = psi.copy()
    out.invited.add(u)
    state = phi.node(u)
    out.node_state[u] = state
    if state != ONE:
        return out
    out.accepted_initiators.append(u)
    if k == 0:
        return out

    indptr, nbr, adj_edge = g.adj_indptr, g.adj_nbr, g.adj_edge
    if mode == "distance":
        dist = {u: 0}
        queue = deque([u])
        while queue:
            v = queue.popleft()
            d = dist[v]
            if d >= k:
                continue
            for i in range(indptr[v], indptr[v + 1]):
                e = adj_edge[i]
                if out.edge_state[e] == UNKNOWN:
                    out.edge_state[e] = phi.edge(e)
                w = int(nbr[i])
                if w not in dist:
                    dist[w] = d + 1
                    queue.append(w)
        return out

    # Diffusion-traced reveal: walk the new initiator's own cascade.
    dist = {u: 0}
    queue = deque([u])
    while queue:
        v = queue.popleft()
        d = dist[v]
        if d >= k:
            continue
        for i in range(indptr[v], indptr[v + 1]):
            e = adj_edge[i]
            s = out.edge_state[e]
            if s == UNKNOWN:
                s = phi.edge(e)
                out.edge_state[e] = s
            if s == ONE:
                w = int(nbr[i])
                if w not in dist:
                    dist[w] = d + 1
                    queue.append(w)
    return out


def _check_consistent_known(psi: PartialRealization, phi: RealizationLike) -> None:
    """Verify the observed entries of ``psi`` against ``phi`` (lazily readable)."""
    _check_same_shape(np.asarray(phi.node_state), psi.node_state, "node state")
    _check_same_shape(np.asarray(phi.edge_state), psi.edge_state, "edge state")
    for v in np.flatnonzero(psi.node_state != UNKNOWN):
        if phi.node(int(v)) != psi.node_state[v]:
            raise ValueError(f"observation inconsistent with realization at node {v}")
    for e in np.flatnonzero(psi.edge_state != UNKNOWN):
        if phi.edge(int(e)) != psi.edge_state[e]:
            raise ValueError(f"observation inconsistent with realization at edge {e}")


def is_reveal_closed(g: Graph, psi: PartialRealization, k: int) -> bool:
    """True iff every participant fewer than ``k`` hops deep has no unknown
    incident edges.  Observations built purely by :func:`reveal_after_accept`
    always satisfy this; it licenses shortcuts in gain estimation."""
    hops = hop_levels(g, psi, k)
    indptr, adj_edge = g.adj_indptr, g.adj_edge
    for v in np.flatnonzero(hops < k):
        for i in range(indptr[v], indptr[v + 1]):
            if psi.edge_state[adj_edge[i]] == UNKNOWN:
                return False
    return True


def dump_states(g: Graph, psi: PartialRealization) -> str:
    """Debug dump of the known states, one line per entry.

    Format: ``N <id> <0|1>`` for nodes, ``E <u> <v> <0|1>`` for edges.
    """
    lines = []
    for v in np.flatnonzero(psi.node_state != UNKNOWN):
        lines.append(f"N {v} {psi.node_state[v]}")
    for e in np.flatnonzero(psi.edge_state != UNKNOWN):
        u, v = g.endpoints(int(e))
        lines.append(f"E {u} {v} {psi.edge_state[e]}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_states(g: Graph, text: str | Iterable[str]) -> PartialRealization:
    """Parse the :func:`dump_states` format into a PartialRealization."""
    psi = PartialRealization.empty(g)
    if isinstance(text, str):
        text = text.splitlines()
    for raw in text:
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "N" and len(tokens) == 3:
            v, s = int(tokens[1]), int(tokens[2])
            g.check_node(v)
            psi.node_state[v] = s
            psi.invited.add(v)
            if s == ONE:
                psi.accepted_initiators.append(v)
        elif tokens[0] == "E" and len(tokens) == 4:
            u, v, s = int(tokens[1]), int(tokens[2]), int(tokens[3])
            e = g.edge_between(u, v)
            if e is None:
                raise ValueError(f"no edge between {u} and {v}")
            psi.edge_state[e] = s
        else:
            raise ValueError(f"unrecognized state line: {line!r}")
    return psi
