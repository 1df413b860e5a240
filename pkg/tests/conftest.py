"""Shared fixtures and small instance builders."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from khopgame import Graph, ModelParams, build_graph

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def path_graph(n: int, p: float = 0.5) -> Graph:
    return build_graph(n, [(i, i + 1, p) for i in range(n - 1)])


def star_graph(leaves: int, p: float = 0.5) -> Graph:
    return build_graph(leaves + 1, [(0, i + 1, p) for i in range(leaves)])


def triangle_graph(p: float = 0.5) -> Graph:
    return build_graph(3, [(0, 1, p), (1, 2, p), (0, 2, p)])


def make_params(
    g: Graph,
    k: int,
    revenue,
    theta=1.0,
    budget: int = 1,
) -> ModelParams:
    if np.isscalar(theta):
        theta = np.full(g.node_count, float(theta))
    return ModelParams(
        accept_prob=np.asarray(theta, dtype=np.float64),
        revenue=np.asarray(revenue, dtype=np.float64),
        k=k,
        budget=budget,
    )


@pytest.fixture(scope="session")
def social_505() -> Graph:
    from khopgame import load_edge_list

    with open(DATA_DIR / "social-505.txt", encoding="utf-8") as fh:
        return load_edge_list(fh, default_p=0.5)


@pytest.fixture(scope="session")
def social_1000() -> Graph:
    from khopgame import load_edge_list

    with open(DATA_DIR / "social-1000.txt", encoding="utf-8") as fh:
        return load_edge_list(fh, default_p=0.5)


def random_instance(
    rng: np.random.Generator,
    max_nodes=10,
    tree=False,
    k_choices=(0, 1, 2),
    theta=None,
):
    """Random small instance: graph, params, and a reveal-built observation."""
    from khopgame import LazyRealization, PartialRealization, reveal_after_accept

    n = int(rng.integers(3, max_nodes + 1))
    edges = []
    seen = set()
    # random spanning tree
    order = rng.permutation(n)
    for i in range(1, n):
        a, b = int(order[i]), int(order[rng.integers(i)])
        key = (min(a, b), max(a, b))
        seen.add(key)
        edges.append(key)
    if not tree:
        extra = int(rng.integers(0, n))
        for _ in range(extra):
            a, b = int(rng.integers(n)), int(rng.integers(n))
            key = (min(a, b), max(a, b))
            if a != b and key not in seen:
                seen.add(key)
                edges.append(key)
    p_mode = rng.integers(4)
    if p_mode == 0:
        ps = np.full(len(edges), 0.5)
    elif p_mode == 1:
        ps = np.full(len(edges), float(rng.uniform(0.05, 0.95)))
    elif p_mode == 2:
        ps = rng.uniform(0.05, 0.95, len(edges))
    else:
        ps = np.ones(len(edges))
    g = build_graph(n, [(a, b, float(p)) for (a, b), p in zip(edges, ps)])
    k = int(rng.choice(k_choices))
    revenue = np.maximum(np.sort(rng.uniform(0, 10, k + 1))[::-1], 0.0)
    if theta is None:
        theta_vec = rng.uniform(0, 1, n)
    else:
        theta_vec = np.full(n, float(theta))
    params = ModelParams(accept_prob=theta_vec, revenue=revenue, k=k, budget=1)

    psi = PartialRealization.empty(g)
    phi = LazyRealization(g, params, int(rng.integers(1 << 48)))
    for _ in range(int(rng.integers(0, 3))):
        pool = [v for v in range(n) if v not in psi.invited]
        if not pool:
            break
        u = pool[int(rng.integers(len(pool)))]
        psi = reveal_after_accept(g, psi, u, phi, k)
    return g, params, psi
