"""Invitation policies: the adaptive greedy policy and four heuristic baselines.

Every policy observes feedback (acceptance, then the revealed cascade) after
each invitation; only the adaptive policy uses it for selection.  Ties are
always broken toward the smallest node id so runs are reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .gain import (
    GainMethod,
    get_fast_evaluator,
    marginal_gain_exact,
    marginal_gain_mc,
)
from .network import Graph, ModelParams, bfs_within
from .realization import (
    ONE,
    PartialRealization,
    RealizationLike,
    hop_levels,
    reveal_after_accept,
)
from .revenue import HopAssignment, hop_assignment, revenue_from_hops, total_revenue

POLICY_NAMES = ("adaptive", "max-degree", "random", "max-prob", "max-degree-prob")


@dataclass(frozen=True)
class GainSpec:
    """Which estimator the adaptive policy uses for candidate gains."""

    method: GainMethod = GainMethod.FAST
    mc_samples: int = 100

    @classmethod
    def parse(cls, text: str) -> "GainSpec":
        if text == "fast":
            return cls(GainMethod.FAST)
        if text == "exact":
            return cls(GainMethod.EXACT)
        if text == "mc" or text.startswith("mc:"):
            r = int(text.partition(":")[2] or 100)
            if r < 1:
                raise ValueError("mc sample count must be at least 1")
            return cls(GainMethod.MONTE_CARLO, r)
        raise ValueError(f"unknown gain method {text!r} (expected fast | mc:<r> | exact)")

    def token(self) -> str:
        if self.method is GainMethod.MONTE_CARLO:
            return f"mc:{self.mc_samples}"
        return self.method.value


@dataclass(eq=False)
class GainCache:
    """Cached candidate gains with per-entry validity flags."""

    values: np.ndarray
    valid: np.ndarray

    @classmethod
    def empty(cls, node_count: int) -> "GainCache":
        return cls(np.zeros(node_count), np.zeros(node_count, dtype=bool))


def invalidate_cache(cache: GainCache, g: Graph, last_accepted: int, k: int) -> GainCache:
    """Invalidate entries within distance ``2k`` of the latest accepted
    initiator; only those candidates can have seen their surroundings change.
    Nothing is invalidated after a rejection (no states changed)."""
    for v in bfs_within(g, last_accepted, 2 * k):
        cache.valid[v] = False
    return cache


@dataclass(eq=False)
class CheckpointStats:
    revenue: float
    accepted: int
    invited: int
    gain_evaluations: int
    wall_time: float


@dataclass(eq=False)
class RunResult:
    invited: list[int]
    accepted: list[int]
    final_psi: PartialRealization
    assignment: HopAssignment
    revenue: float
    gain_evaluations: int
    wall_time: float
    checkpoints: dict[int, CheckpointStats] = field(default_factory=dict)


def run_policy(
    kind: str,
    g: Graph,
    params: ModelParams,
    phi: RealizationLike,
    rng: np.random.Generator,
    *,
    gain: GainSpec = GainSpec(),
    use_cache: bool | None = None,
    checkpoints: list[int] | None = None,
    reveal_mode: str = "diffusion",
) -> RunResult:
    """Run one policy to its budget against the given ground truth.

    ``checkpoints`` requests revenue/timing snapshots after those invitation
    counts; because selection never depends on the remaining budget, the
    snapshot at ``b`` is exactly what an isolated run with budget ``b``
    would produce.
    """
    if kind not in POLICY_NAMES:
        raise ValueError(f"unknown policy {kind!r} (expected one of {POLICY_NAMES})")
    if g.node_count == 0:
        raise ValueError("cannot run a policy on an empty graph")
    params.validate_for(g)
    k = params.k
    if use_cache is None:
        use_cache = kind == "adaptive" and k <= 2
    rev_ext = params.revenue_ext
    theta = params.accept_prob

    want: set[int] = set(checkpoints or ())
    psi = PartialRealization.empty(g)
    hops = hop_levels(g, psi, k)
    invited_mask = np.zeros(g.node_count, dtype=bool)
    invited: list[int] = []
    evaluations = 0
    cache = GainCache.empty(g.node_count)
    evaluator = None
    if kind == "adaptive" and gain.method is GainMethod.FAST:
        evaluator = get_fast_evaluator(g, k)

    if kind == "max-degree":
        static_metric = g.degree.astype(np.float64)
    elif kind == "max-prob":
        static_metric = theta
    elif kind == "max-degree-prob":
        static_metric = g.degree * theta
    else:
        static_metric = None

    def evaluate(cands: np.ndarray) -> np.ndarray:
        if gain.method is GainMethod.FAST:
            return evaluator.gains(psi.edge_state, hops, theta, rev_ext, candidates=cands)
        if gain.method is GainMethod.MONTE_CARLO:
            return np.array(
                [
                    marginal_gain_mc(g, psi, int(u), params, gain.mc_samples, rng, hops).value
                    for u in cands
                ]
            )
        return np.array(
            [marginal_gain_exact(g, psi, int(u), params).value for u in cands]
        )

    results: dict[int, CheckpointStats] = {}
    start = time.perf_counter()
    budget = min(params.budget, g.node_count)
    for step in range(1, budget + 1):
        if kind == "adaptive":
            if use_cache:
                need = np.flatnonzero(~cache.valid & ~invited_mask)
                if len(need):
                    cache.values[need] = evaluate(need)
                    cache.valid[need] = True
                    evaluations += len(need)
                scores = np.where(invited_mask, -np.inf, cache.values)
            else:
                if gain.method is GainMethod.FAST:
                    values = evaluator.gains(psi.edge_state, hops, theta, rev_ext)
                else:
                    pool = np.flatnonzero(~invited_mask)
                    values = np.full(g.node_count, -np.inf)
                    values[pool] = evaluate(pool)
                evaluations += int((~invited_mask).sum())
                scores = np.where(invited_mask, -np.inf, values)
            u = int(np.argmax(scores))
        elif kind == "random":
            pool = np.flatnonzero(~invited_mask)
            u = int(pool[rng.integers(len(pool))])
        else:
            u = int(np.argmax(np.where(invited_mask, -np.inf, static_metric)))

        psi = reveal_after_accept(g, psi, u, phi, k, mode=reveal_mode)
        invited_mask[u] = True
        invited.append(u)
        if psi.node_state[u] == ONE:
            hops = hop_levels(g, psi, k)
            if use_cache:
                invalidate_cache(cache, g, u, k)
        if step in want:
            results[step] = CheckpointStats(
                revenue=revenue_from_hops(hops, rev_ext),
                accepted=len(psi.accepted_initiators),
                invited=len(invited),
                gain_evaluations=evaluations,
                wall_time=time.perf_counter() - start,
            )

    wall = time.perf_counter() - start
    assignment = hop_assignment(g, psi, psi.accepted_initiators, k)
    return RunResult(
        invited=invited,
        accepted=list(psi.accepted_initiators),
        final_psi=psi,
        assignment=assignment,
        revenue=total_revenue(assignment, params.revenue),
        gain_evaluations=evaluations,
        wall_time=wall,
        checkpoints=results,
    )
