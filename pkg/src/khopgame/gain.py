"""Estimators for the conditional expected marginal revenue of inviting a node.

Three routes are provided:

* :func:`marginal_gain_fast`: the layered estimator.  It places every node
  reachable within ``k`` hops of the candidate into its first BFS level,
  propagates participation probabilities level by level (known-live edges
  contribute the parent's probability, unknown edges the parent's
  probability damped by the edge probability, known-dead edges nothing),
  and accrues, for each node, the revenue step it would gain by being
  upgraded to that level.
* :func:`marginal_gain_mc`: plain Monte-Carlo over completions of the
  observation.
* :func:`marginal_gain_exact`: exact expectation by enumerating every
  assignment of the relevant unknown variables.

:class:`FastGainEvaluator` is a vectorized engine computing the layered
estimate for many candidates at once; it must agree with
:func:`marginal_gain_fast` to the last bit and is what the greedy policy
uses on real graphs.
"""

from __future__ import annotations

import random
import weakref
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .network import NO_HOP, Graph, ModelParams, multi_source_hops
from .realization import (
    ONE,
    UNKNOWN,
    PartialRealization,
    Realization,
    hop_levels,
    is_reveal_closed,
    is_subrealization,
    reveal_after_accept,
)
from .revenue import EnumerationCapError

# Monte-Carlo evaluation switches to grouped evaluation (identical statistic,
# one revenue computation per distinct sampled pattern) when the unknown
# variables fit in this many bits and the sample count exceeds the pattern
# space.
_MC_GROUPED_MAX_BITS = 16


class GainMethod(Enum):
    FAST = "fast"
    MONTE_CARLO = "mc"
    EXACT = "exact"


@dataclass(frozen=True)
class GainEstimate:
    value: float
    method: GainMethod
    samples: int | None = None


def _require_candidate(psi: PartialRealization, u: int) -> None:
    if u in psi.invited:
        raise ValueError(f"node {u} was already invited and cannot be a candidate")


# ---------------------------------------------------------------------------
# Layered (fast) estimator, per-candidate reference implementation
# ---------------------------------------------------------------------------


def layer_table(
    g: Graph,
    psi: PartialRealization,
    u: int,
    params: ModelParams,
    hops: np.ndarray | None = None,
) -> list[dict[int, float]]:
    """Per-level participation probabilities around candidate ``u``.

    Level 0 holds the candidate with its acceptance probability; level i
    holds every node first reached at BFS distance i with the probability
    that it joins the candidate's game at that level.
    """
    layers, _ = _layers_and_gain(g, psi, u, params, hops)
    return layers


def marginal_gain_fast(
    g: Graph,
    psi: PartialRealization,
    u: int,
    params: ModelParams,
    hops: np.ndarray | None = None,
) -> GainEstimate:
    """Layered estimate of the expected marginal revenue of inviting ``u``."""
    _, gain = _layers_and_gain(g, psi, u, params, hops)
    return GainEstimate(value=gain, method=GainMethod.FAST)


def _layers_and_gain(
    g: Graph,
    psi: PartialRealization,
    u: int,
    params: ModelParams,
    hops: np.ndarray | None,
) -> tuple[list[dict[int, float]], float]:
    g.check_node(u)
    params.validate_for(g)
    _require_candidate(psi, u)
    k = params.k
    rev_ext = params.revenue_ext
    if hops is None:
        hops = hop_levels(g, psi, k)
    theta_u = float(params.accept_prob[u])
    indptr, nbr, adj_edge = g.adj_indptr, g.adj_nbr, g.adj_edge
    edge_state, edge_p = psi.edge_state, g.edge_p

    layers: list[dict[int, float]] = [{u: theta_u}]
    seen = {u}
    frontier = [u]
    for _ in range(k):
        nxt: dict[int, float] = {}
        for v in frontier:
            for i in range(indptr[v], indptr[v + 1]):
                w = int(nbr[i])
                if w not in seen:
                    seen.add(w)
                    nxt[w] = 0.0
        layers.append(nxt)
        frontier = list(nxt)

    def rev_at(h: int) -> float:
        return float(rev_ext[min(h, k + 1)])

    gain = theta_u * (rev_ext[0] - rev_at(int(hops[u])))
    for i in range(1, k + 1):
        prev = layers[i - 1]
        cur = layers[i]
        for v in cur:
            t = 1.0
            for j in range(indptr[v], indptr[v + 1]):
                w = int(nbr[j])
                if w not in prev:
                    continue
                s = edge_state[adj_edge[j]]
                if s == ONE:
                    t *= 1.0 - prev[w]
                elif s == UNKNOWN:
                    t *= 1.0 - edge_p[adj_edge[j]] * prev[w]
                # known-dead edge: no invitation can cross it, no factor
            pv = 1.0 - t
            cur[v] = pv
            hv = int(hops[v])
            if i < hv:
                gain += pv * (rev_ext[i] - rev_at(hv))
    return layers, gain


# ---------------------------------------------------------------------------
# Vectorized batch engine for the layered estimator
# ---------------------------------------------------------------------------


def _concat_ranges(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate ``arange(lo[i], hi[i])`` blocks; also return block lengths."""
    lens = (hi - lo).astype(np.int64)
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), lens
    starts_out = np.zeros(len(lens), dtype=np.int64)
    np.cumsum(lens[:-1], out=starts_out[1:])
    out = np.arange(total, dtype=np.int64)
    out += np.repeat(lo.astype(np.int64) - starts_out, lens)
    return out, lens


class FastGainEvaluator:
    """Batched layered-gain computation for every candidate of one graph.

    The BFS layer structure around each candidate depends only on the
    graph and the hop limit, so it is built once; each evaluation then
    reduces to a handful of vectorized passes over precomputed
    (parent, edge, target) triples per level.
    """

    def __init__(self, g: Graph, k: int):
        self.g = g
        self.k = k
        n = g.node_count
        indptr, nbr, adj_edge = g.adj_indptr, g.adj_nbr, g.adj_edge

        self.cand_slot = np.empty(n, dtype=np.int64)
        ent_parent: list[list[int]] = [[] for _ in range(k + 1)]
        ent_edge: list[list[int]] = [[] for _ in range(k + 1)]
        tgt_slot: list[list[int]] = [[] for _ in range(k + 1)]
        tgt_node: list[list[int]] = [[] for _ in range(k + 1)]
        tgt_cand: list[list[int]] = [[] for _ in range(k + 1)]
        tgt_count: list[list[int]] = [[] for _ in range(k + 1)]
        ent_indptr = [np.zeros(n + 1, dtype=np.int64) for _ in range(k + 1)]
        tgt_indptr = [np.zeros(n + 1, dtype=np.int64) for _ in range(k + 1)]

        slot_cursor = 0
        level_of = np.full(n, -1, dtype=np.int32)
        slot_of = np.full(n, -1, dtype=np.int64)
        for u in range(n):
            self.cand_slot[u] = slot_cursor
            slot_of[u] = slot_cursor
            slot_cursor += 1
            level_of[u] = 0
            ball = [u]
            frontier = [u]
            for lvl in range(1, k + 1):
                nxt: list[int] = []
                for v in frontier:
                    for i in range(indptr[v], indptr[v + 1]):
                        w = int(nbr[i])
                        if level_of[w] < 0:
                            level_of[w] = lvl
                            slot_of[w] = slot_cursor
                            slot_cursor += 1
                            nxt.append(w)
                            ball.append(w)
                # collect product entries for this level
                for v in nxt:
                    cnt = 0
                    for i in range(indptr[v], indptr[v + 1]):
                        w = int(nbr[i])
                        if level_of[w] == lvl - 1:
                            ent_parent[lvl].append(int(slot_of[w]))
                            ent_edge[lvl].append(int(adj_edge[i]))
                            cnt += 1
                    tgt_slot[lvl].append(int(slot_of[v]))
                    tgt_node[lvl].append(v)
                    tgt_cand[lvl].append(u)
                    tgt_count[lvl].append(cnt)
                ent_indptr[lvl][u + 1] = len(ent_parent[lvl])
                tgt_indptr[lvl][u + 1] = len(tgt_slot[lvl])
                frontier = nxt
            for v in ball:
                level_of[v] = -1
                slot_of[v] = -1

        self.slot_count = slot_cursor
        self.ent_parent = [np.asarray(a, dtype=np.int64) for a in ent_parent]
        self.ent_edge = [np.asarray(a, dtype=np.int64) for a in ent_edge]
        self.ent_p = [g.edge_p[a] if len(a) else np.empty(0) for a in self.ent_edge]
        self.tgt_slot = [np.asarray(a, dtype=np.int64) for a in tgt_slot]
        self.tgt_node = [np.asarray(a, dtype=np.int64) for a in tgt_node]
        self.tgt_cand = [np.asarray(a, dtype=np.int64) for a in tgt_cand]
        self.tgt_count = [np.asarray(a, dtype=np.int64) for a in tgt_count]
        self.ent_indptr = ent_indptr
        self.tgt_indptr = tgt_indptr
        for lvl in range(1, k + 1):
            # propagate indptr through candidates with empty levels
            np.maximum.accumulate(self.ent_indptr[lvl], out=self.ent_indptr[lvl])
            np.maximum.accumulate(self.tgt_indptr[lvl], out=self.tgt_indptr[lvl])
        self._prob = np.zeros(self.slot_count)

    def gains(
        self,
        edge_state: np.ndarray,
        hops: np.ndarray,
        theta: np.ndarray,
        rev_ext: np.ndarray,
        candidates: np.ndarray | None = None,
    ) -> np.ndarray:
        """Layered gains given the observed edge states and current hop levels.

        With ``candidates=None``, returns a value for every node (callers
        mask out invited ones); otherwise returns values aligned with the
        given candidate array.  Results are bit-identical between the two
        modes.
        """
        k = self.k
        h_idx = np.minimum(hops, k + 1)
        prob = self._prob
        if candidates is None:
            cands = None
            gains = theta * (rev_ext[0] - rev_ext[h_idx])
            prob[self.cand_slot] = theta
            n_out = len(gains)
        else:
            cands = np.asarray(candidates, dtype=np.int64)
            gains = theta[cands] * (rev_ext[0] - rev_ext[h_idx[cands]])
            prob[self.cand_slot[cands]] = theta[cands]
            n_out = len(cands)

        for lvl in range(1, k + 1):
            if cands is None:
                ent_sel = slice(None)
                tgt_sel = slice(None)
                counts = self.tgt_count[lvl]
                loc = None
                if len(self.ent_parent[lvl]) == 0:
                    continue
            else:
                ent_sel, _ = _concat_ranges(
                    self.ent_indptr[lvl][cands], self.ent_indptr[lvl][cands + 1]
                )
                if len(ent_sel) == 0:
                    continue
                tgt_sel, tgt_lens = _concat_ranges(
                    self.tgt_indptr[lvl][cands], self.tgt_indptr[lvl][cands + 1]
                )
                counts = self.tgt_count[lvl][tgt_sel]
                loc = np.repeat(np.arange(n_out, dtype=np.int64), tgt_lens)

            st = edge_state[self.ent_edge[lvl][ent_sel]]
            pv = prob[self.ent_parent[lvl][ent_sel]]
            pe = self.ent_p[lvl][ent_sel]
            factor = 1.0 - pv * (st == ONE) - (pe * pv) * (st == UNKNOWN)

            starts = np.zeros(len(counts), dtype=np.int64)
            np.cumsum(counts[:-1], out=starts[1:])
            tprob = 1.0 - np.multiply.reduceat(factor, starts)
            prob[self.tgt_slot[lvl][tgt_sel]] = tprob

            node = self.tgt_node[lvl][tgt_sel]
            hv = h_idx[node]
            contrib = tprob * (rev_ext[lvl] - rev_ext[hv]) * (lvl < hv)
            if loc is None:
                loc = self.tgt_cand[lvl]
            gains += np.bincount(loc, weights=contrib, minlength=n_out)
        return gains


_evaluator_cache: "weakref.WeakKeyDictionary[Graph, dict[int, FastGainEvaluator]]" = (
    weakref.WeakKeyDictionary()
)


def get_fast_evaluator(g: Graph, k: int) -> FastGainEvaluator:
    """Shared per-(graph, hop limit) evaluator; built on first use."""
    per_graph = _evaluator_cache.setdefault(g, {})
    ev = per_graph.get(k)
    if ev is None:
        ev = FastGainEvaluator(g, k)
        per_graph[k] = ev
    return ev


# ---------------------------------------------------------------------------
# Shared revenue-difference computation on a completed world
# ---------------------------------------------------------------------------


def _added_gain(
    g: Graph,
    u: int,
    k: int,
    edge_live: np.ndarray,
    old_hops: np.ndarray,
    rev_ext: np.ndarray,
) -> float:
    """Revenue added by seeding ``u`` (already accepted) into a world whose
    live edges are ``edge_live`` and whose current hop levels are ``old_hops``."""
    k1 = k + 1
    diff = float(rev_ext[0] - rev_ext[min(int(old_hops[u]), k1)])
    if k == 0:
        return diff
    indptr, nbr, adj_edge = g.adj_indptr, g.adj_nbr, g.adj_edge
    dist = {u: 0}
    queue = deque([u])
    while queue:
        v = queue.popleft()
        d = dist[v]
        if d == k:
            continue
        for i in range(indptr[v], indptr[v + 1]):
            if not edge_live[adj_edge[i]]:
                continue
            w = int(nbr[i])
            if w not in dist:
                nd = d + 1
                dist[w] = nd
                old = int(old_hops[w])
                if nd < old:
                    diff += float(rev_ext[nd] - rev_ext[min(old, k1)])
                queue.append(w)
    return diff


def _relevant_free_edges(
    g: Graph, psi: PartialRealization, u: int, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Unknown, genuinely random edges that can influence the gain of ``u``.

    Returns ``(free_edges, base_live)`` where ``base_live`` marks known-live
    edges plus unknown edges forced live by p = 1.  Every other unknown
    edge is irrelevant: it cannot lie on a live path of length at most
    ``k`` from the candidate or from an accepted initiator.
    """
    known = psi.edge_state != UNKNOWN
    det = ~known & ((g.edge_p == 0.0) | (g.edge_p == 1.0))
    base_live = (psi.edge_state == ONE) | (det & (g.edge_p == 1.0))
    centers = list(psi.accepted_initiators) + [u]
    if k == 0:
        return np.empty(0, dtype=np.int64), base_live
    near = multi_source_hops(g, centers, k - 1) <= k - 1
    touch = near[g.edge_u] | near[g.edge_v]
    free = np.flatnonzero(touch & ~known & ~det)
    return free, base_live


def relevant_unknown_count(
    g: Graph, psi: PartialRealization, u: int, params: ModelParams
) -> int:
    """Number of random variables the exact oracle would enumerate for ``u``."""
    free, _ = _relevant_free_edges(g, psi, u, params.k)
    theta_u = float(params.accept_prob[u])
    return len(free) + (1 if 0.0 < theta_u < 1.0 else 0)


# ---------------------------------------------------------------------------
# Exact oracle
# ---------------------------------------------------------------------------


def _exact_outcomes(
    g: Graph,
    psi: PartialRealization,
    u: int,
    params: ModelParams,
    cap: int,
) -> tuple[float, list[float], list[float]]:
    """Enumerate gain outcomes conditional on the candidate accepting.

    Returns ``(theta_u, diffs, weights)``; the candidate's rejection branch
    contributes gain 0 with probability ``1 - theta_u``.
    """
    g.check_node(u)
    params.validate_for(g)
    _require_candidate(psi, u)
    k = params.k
    rev_ext = params.revenue_ext
    theta_u = float(params.accept_prob[u])

    free, base_live = _relevant_free_edges(g, psi, u, k)
    r = len(free) + (1 if 0.0 < theta_u < 1.0 else 0)
    if r > cap:
        raise EnumerationCapError(r, cap)
    if theta_u == 0.0:
        return 0.0, [0.0], [1.0]

    accepted = list(psi.accepted_initiators)
    p = g.edge_p
    live = base_live.copy()
    diffs: list[float] = []
    weights: list[float] = []
    for mask in range(1 << len(free)):
        w = 1.0
        for j, e in enumerate(free):
            if mask >> j & 1:
                live[e] = True
                w *= p[e]
            else:
                live[e] = False
                w *= 1.0 - p[e]
        old = multi_source_hops(g, accepted, k, edge_live=live)
        diffs.append(_added_gain(g, u, k, live, old, rev_ext))
        weights.append(w)
    return theta_u, diffs, weights


def marginal_gain_exact(
    g: Graph,
    psi: PartialRealization,
    u: int,
    params: ModelParams,
    cap: int = 24,
) -> GainEstimate:
    """Exact conditional expected marginal revenue by full enumeration."""
    theta_u, diffs, weights = _exact_outcomes(g, psi, u, params, cap)
    value = theta_u * float(np.dot(diffs, weights))
    return GainEstimate(value=value, method=GainMethod.EXACT)


def exact_gain_distribution(
    g: Graph,
    psi: PartialRealization,
    u: int,
    params: ModelParams,
    cap: int = 24,
) -> tuple[np.ndarray, np.ndarray]:
    """Support and probabilities of the realized gain of inviting ``u``.

    Atoms with identical values are merged; probabilities sum to 1.
    """
    theta_u, diffs, weights = _exact_outcomes(g, psi, u, params, cap)
    atoms: dict[float, float] = {}
    if theta_u < 1.0:
        atoms[0.0] = 1.0 - theta_u
    if theta_u > 0.0:
        for d, w in zip(diffs, weights):
            atoms[d] = atoms.get(d, 0.0) + theta_u * w
    values = np.array(sorted(atoms))
    probs = np.array([atoms[v] for v in values])
    return values, probs


# ---------------------------------------------------------------------------
# Monte-Carlo estimator
# ---------------------------------------------------------------------------


def marginal_gain_mc(
    g: Graph,
    psi: PartialRealization,
    u: int,
    params: ModelParams,
    samples: int,
    rng: np.random.Generator,
    hops: np.ndarray | None = None,
) -> GainEstimate:
    """Monte-Carlo estimate: average realized gain over ``samples``
    independent completions of the observation."""
    g.check_node(u)
    params.validate_for(g)
    _require_candidate(psi, u)
    if samples < 1:
        raise ValueError("samples must be at least 1")
    k = params.k
    theta_u = float(params.accept_prob[u])
    rev_ext = params.revenue_ext

    free, base_live = _relevant_free_edges(g, psi, u, k)
    if len(free) <= _MC_GROUPED_MAX_BITS and samples > (1 << len(free)):
        value = _mc_grouped(g, psi, u, k, theta_u, rev_ext, free, base_live, samples, rng)
    else:
        value = _mc_streaming(g, psi, u, params, samples, rng, hops)
    return GainEstimate(value=value, method=GainMethod.MONTE_CARLO, samples=samples)


def _mc_grouped(
    g: Graph,
    psi: PartialRealization,
    u: int,
    k: int,
    theta_u: float,
    rev_ext: np.ndarray,
    free: np.ndarray,
    base_live: np.ndarray,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Draw all samples up front, then evaluate each distinct edge pattern once.

    Exactly the mean over ``samples`` independent completions; grouping
    only deduplicates the revenue computation.
    """
    accept = rng.random(samples) < theta_u
    nbits = len(free)
    pattern = np.zeros(samples, dtype=np.int64)
    p = g.edge_p
    for j, e in enumerate(free):
        pattern |= (rng.random(samples) < p[e]).astype(np.int64) << j
    counts = np.bincount(pattern[accept], minlength=1 << nbits)
    accepted = list(psi.accepted_initiators)
    live = base_live.copy()
    total = 0.0
    for mask in np.flatnonzero(counts):
        for j, e in enumerate(free):
            live[e] = bool(mask >> j & 1)
        old = multi_source_hops(g, accepted, k, edge_live=live)
        total += counts[mask] * _added_gain(g, u, k, live, old, rev_ext)
    return total / samples


def _mc_streaming(
    g: Graph,
    psi: PartialRealization,
    u: int,
    params: ModelParams,
    samples: int,
    rng: np.random.Generator,
    hops: np.ndarray | None,
) -> float:
    """Per-sample simulation with lazily drawn edge states.

    Unknown states are drawn only when a revenue computation actually
    reads them, which leaves the estimator's distribution unchanged.  When
    the observation is reveal-closed, current participants are fully
    determined by it, so only the candidate-side cascade needs sampling.
    """
    k = params.k
    theta_u = float(params.accept_prob[u])
    rev_ext = params.revenue_ext.tolist()
    k1 = k + 1
    closed = is_reveal_closed(g, psi, k)
    if hops is None:
        hops = hop_levels(g, psi, k)
    old_hops = hops.tolist()
    accepted = list(psi.accepted_initiators)

    indptr = g.adj_indptr.tolist()
    nbr = g.adj_nbr.tolist()
    adj_edge = g.adj_edge.tolist()
    p = g.edge_p.tolist()
    state = psi.edge_state.tolist()

    # Python's generator is much cheaper per draw in this scalar-heavy loop.
    rr = random.Random(int(rng.integers(1 << 63)))
    rand = rr.random

    total = 0.0
    for _ in range(samples):
        if rand() >= theta_u:
            continue
        drawn: dict[int, bool] = {}

        def edge_live(e: int) -> bool:
            s = state[e]
            if s == 1:
                return True
            if s == 0:
                return False
            v = drawn.get(e)
            if v is None:
                v = rand() < p[e]
                drawn[e] = v
            return v

        if closed:
            old = old_hops
        else:
            old = _sampled_hops(g.node_count, accepted, k, indptr, nbr, adj_edge, edge_live)
        gain = rev_ext[0] - rev_ext[min(old[u], k1)]
        dist = {u: 0}
        queue = deque([u])
        while queue:
            v = queue.popleft()
            d = dist[v]
            if d == k:
                continue
            for i in range(indptr[v], indptr[v + 1]):
                if not edge_live(adj_edge[i]):
                    continue
                w = nbr[i]
                if w not in dist:
                    nd = d + 1
                    dist[w] = nd
                    old_w = old[w]
                    if nd < old_w:
                        gain += rev_ext[nd] - rev_ext[min(old_w, k1)]
                    queue.append(w)
        total += gain
    return total / samples


def _sampled_hops(n, sources, k, indptr, nbr, adj_edge, edge_live) -> list[int]:
    hops = [NO_HOP] * n
    queue = deque()
    for s in sources:
        if hops[s] != 0:
            hops[s] = 0
            queue.append(s)
    while queue:
        v = queue.popleft()
        d = hops[v]
        if d == k:
            continue
        for i in range(indptr[v], indptr[v + 1]):
            if not edge_live(adj_edge[i]):
                continue
            w = nbr[i]
            if hops[w] == NO_HOP:
                hops[w] = d + 1
                queue.append(w)
    return hops


# ---------------------------------------------------------------------------
# Submodularity diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubmodularityViolation:
    candidate: int
    gain_small: float
    gain_large: float
    psi_small: PartialRealization
    psi_large: PartialRealization


def reachable_observations(
    g: Graph,
    params: ModelParams,
    max_invites: int,
    max_pool: int = 2000,
) -> list[PartialRealization]:
    """Observations reachable by invite sequences of bounded length.

    Branches over every candidate, acceptance outcome and touched-edge
    state that has positive probability, deduplicating states.  The pool
    is truncated breadth-first at ``max_pool`` entries, deterministically.
    """
    params.validate_for(g)
    theta = params.accept_prob
    empty = PartialRealization.empty(g)
    pool: dict[tuple, PartialRealization] = {_states_key(empty): empty}
    frontier = [empty]
    for _ in range(max_invites):
        nxt: list[PartialRealization] = []
        for psi in frontier:
            if len(pool) >= max_pool:
                break
            for u in range(g.node_count):
                if u in psi.invited:
                    continue
                outcomes: list[PartialRealization] = []
                if theta[u] < 1.0:
                    rej = psi.copy()
                    rej.invited.add(u)
                    rej.node_state[u] = 0
                    outcomes.append(rej)
                if theta[u] > 0.0:
                    outcomes.extend(_accept_outcomes(g, psi, u, params.k))
                for out in outcomes:
                    key = _states_key(out)
                    if key not in pool and len(pool) < max_pool:
                        pool[key] = out
                        nxt.append(out)
        frontier = nxt
    return list(pool.values())


def _states_key(psi: PartialRealization) -> tuple:
    return (psi.node_state.tobytes(), psi.edge_state.tobytes())


def _accept_outcomes(g: Graph, psi: PartialRealization, u: int, k: int) -> list[PartialRealization]:
    """Every positive-probability observation after ``u`` accepts."""
    ball = multi_source_hops(g, [u], k)
    near = ball <= k
    local = np.flatnonzero(
        near[g.edge_u] & near[g.edge_v] & (psi.edge_state == UNKNOWN)
    )
    free = [int(e) for e in local if 0.0 < g.edge_p[e] < 1.0]
    node_state = psi.node_state.copy()
    node_state[node_state == UNKNOWN] = 0
    node_state[u] = 1
    base_edges = psi.edge_state.copy()
    base_edges[base_edges == UNKNOWN] = 0
    for e in local:
        base_edges[e] = 1 if g.edge_p[e] == 1.0 else 0
    outcomes: dict[tuple, PartialRealization] = {}
    for mask in range(1 << len(free)):
        edges = base_edges.copy()
        for j, e in enumerate(free):
            edges[e] = 1 if mask >> j & 1 else 0
        phi = Realization(node_state, edges)
        out = reveal_after_accept(g, psi, u, phi, k)
        outcomes.setdefault(_states_key(out), out)
    return list(outcomes.values())


def submodularity_violations(
    g: Graph,
    params: ModelParams,
    observations: list[PartialRealization],
    tol: float = 1e-9,
    cap: int = 24,
) -> list[SubmodularityViolation]:
    """All pairs ``psi ⊆ psi'`` among ``observations`` where some candidate's
    exact gain strictly increases: gain(u | psi) < gain(u | psi') - tol."""
    gains: dict[tuple, float] = {}

    def gain_of(psi: PartialRealization, u: int) -> float:
        key = (_states_key(psi), u)
        v = gains.get(key)
        if v is None:
            v = marginal_gain_exact(g, psi, u, params, cap=cap).value
            gains[key] = v
        return v

    violations: list[SubmodularityViolation] = []
    for a in observations:
        for b in observations:
            if a is b or not is_subrealization(a, b):
                continue
            for u in range(g.node_count):
                if u in b.invited:
                    continue
                d_small = gain_of(a, u)
                d_large = gain_of(b, u)
                if d_small < d_large - tol:
                    violations.append(
                        SubmodularityViolation(u, d_small, d_large, a, b)
                    )
    return violations
