"""Hop assignment and the revenue objective.

A game started by an accepted initiator earns revenue from every
participant, graded by hop level; a node reachable at several levels
counts once at the smallest one.  Realized revenue on an observation
counts only live edges.  An exact expected-revenue oracle by enumeration
is provided for small instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .network import NO_HOP, Graph, ModelParams, multi_source_hops
from .realization import ONE, PartialRealization, Realization


class EnumerationCapError(ValueError):
    """Raised when an exact enumeration would exceed its variable cap."""

    def __init__(self, r: int, cap: int):
        super().__init__(f"enumeration over r={r} random variables exceeds cap {cap}")
        self.r = r


@dataclass(eq=False)
class HopAssignment:
    """Per-node hop levels plus the participant count per level."""

    hops: np.ndarray
    participant_counts: list[int]

    def hop_of(self, v: int) -> int | float:
        h = self.hops[v]
        return float("inf") if h == NO_HOP else int(h)


def _edge_states_of(state_map) -> np.ndarray:
    if isinstance(state_map, (PartialRealization, Realization)):
        return state_map.edge_state
    return np.asarray(state_map)


def hop_assignment(
    g: Graph,
    state_map,
    initiators: Sequence[int],
    k: int,
) -> HopAssignment:
    """Assign hop levels from ``initiators`` over live edges, truncated at ``k``.

    ``state_map`` may be a PartialRealization, a Realization, or a raw
    edge-state array; unknown edges carry no participation.  Initiators
    must have an observed One node state when node states are available.
    """
    if isinstance(state_map, (PartialRealization, Realization)):
        for s in initiators:
            if state_map.node_state[s] != ONE:
                raise ValueError(f"initiator {s} does not have an accepted (One) state")
    edge_state = _edge_states_of(state_map)
    hops = multi_source_hops(g, initiators, k, edge_live=edge_state == ONE)
    counts = np.bincount(hops[hops != NO_HOP], minlength=k + 1)
    return HopAssignment(hops=hops, participant_counts=[int(c) for c in counts[: k + 1]])


def total_revenue(assignment: HopAssignment, revenue: Sequence[float]) -> float:
    """Total revenue of an assignment: sum of the per-level revenue over
    participants (nothing beyond the last level)."""
    rev = np.asarray(revenue, dtype=np.float64)
    counts = assignment.participant_counts
    if len(counts) > len(rev) and any(counts[len(rev):]):
        raise ValueError("assignment has levels beyond the revenue schedule")
    n = min(len(counts), len(rev))
    return float(np.dot(rev[:n], counts[:n]))


def revenue_from_hops(hops: np.ndarray, revenue_ext: np.ndarray) -> float:
    """Revenue directly from a hop array (``revenue_ext`` has the extra 0 slot)."""
    k = len(revenue_ext) - 2
    idx = np.minimum(hops, k + 1)
    return float(revenue_ext[idx].sum())


def _relevant_unknown_edges(
    g: Graph,
    centers: Sequence[int],
    k: int,
    known_mask: np.ndarray,
) -> np.ndarray:
    """Unknown edges with an endpoint within graph distance ``k - 1`` of a center.

    Only these can sit on a live path of length at most ``k`` from the
    centers, so everything else may be treated as dead when scoring.
    """
    if k == 0 or not len(centers):
        return np.empty(0, dtype=np.int64)
    near = multi_source_hops(g, centers, k - 1) <= k - 1
    touch = near[g.edge_u] | near[g.edge_v]
    return np.flatnonzero(touch & ~known_mask)


def expected_revenue_exact(
    g: Graph,
    params: ModelParams,
    initiator_set: Sequence[int],
    k: int,
    cap: int = 24,
) -> float:
    """Exact expected revenue of inviting ``initiator_set`` (non-adaptive).

    Enumerates every joint assignment of the genuinely random variables:
    acceptance of each listed node with theta strictly inside (0, 1) and
    each edge with p strictly inside (0, 1) within ``k`` hops of the set.
    Refuses when the variable count exceeds ``cap``.
    """
    params.validate_for(g)
    initiators = list(dict.fromkeys(int(v) for v in initiator_set))
    for v in initiators:
        g.check_node(v)
    theta = params.accept_prob
    rev_ext = params.revenue_ext

    deterministic_edges = (g.edge_p == 0.0) | (g.edge_p == 1.0)
    free_edges = _relevant_unknown_edges(g, initiators, k, deterministic_edges)
    free_nodes = [v for v in initiators if 0.0 < theta[v] < 1.0]
    r = len(free_edges) + len(free_nodes)
    if r > cap:
        raise EnumerationCapError(r, cap)

    base_edge_live = g.edge_p == 1.0
    total = 0.0
    n_nodes = len(free_nodes)
    for node_mask in range(1 << n_nodes):
        w_nodes = 1.0
        for j, v in enumerate(free_nodes):
            w_nodes *= theta[v] if node_mask >> j & 1 else 1.0 - theta[v]
        accepted = [
            v
            for v in initiators
            if (theta[v] == 1.0)
            or (v in free_nodes and node_mask >> free_nodes.index(v) & 1)
        ]
        if not accepted:
            continue
        edge_live = base_edge_live.copy()
        for edge_mask in range(1 << len(free_edges)):
            w = w_nodes
            for j, e in enumerate(free_edges):
                if edge_mask >> j & 1:
                    edge_live[e] = True
                    w *= g.edge_p[e]
                else:
                    edge_live[e] = False
                    w *= 1.0 - g.edge_p[e]
            if w == 0.0:
                continue
            hops = multi_source_hops(g, accepted, k, edge_live=edge_live)
            total += w * revenue_from_hops(hops, rev_ext)
    return total
