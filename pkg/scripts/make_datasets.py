#!/usr/bin/env python3
"""Generate the bundled benchmark graphs.

Two seeded synthetic social graphs matching the scale of the evaluation
datasets: ~0.5K nodes / ~1.01K edges (average degree ~4) and ~1K nodes /
~3K edges (average degree ~6).  Edge lists carry no probabilities; the
harness supplies a uniform default.
"""

from __future__ import annotations

import random
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def random_graph(n: int, target_edges: int, seed: int) -> list[tuple[int, int]]:
    """Connected sparse graph: a random spanning backbone plus random chords."""
    rng = random.Random(seed)
    nodes = list(range(n))
    rng.shuffle(nodes)
    edges = set()
    # spanning backbone keeps the graph connected
    for i in range(1, n):
        a = nodes[i]
        b = nodes[rng.randrange(i)]
        edges.add((min(a, b), max(a, b)))
    while len(edges) < target_edges:
        a, b = rng.randrange(n), rng.randrange(n)
        if a == b:
            continue
        edges.add((min(a, b), max(a, b)))
    return sorted(edges)


def write(name: str, n: int, edges: list[tuple[int, int]]) -> None:
    DATA_DIR.mkdir(exist_ok=True)
    path = DATA_DIR / name
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# synthetic social graph: {n} nodes, {len(edges)} edges\n")
        fh.write("# format: <u> <v> per line; probabilities supplied by the harness\n")
        for a, b in edges:
            fh.write(f"{a} {b}\n")
    print(f"wrote {path}: n={n} m={len(edges)} avg_deg={2 * len(edges) / n:.2f}")


def main() -> None:
    write("social-505.txt", 505, random_graph(505, 1010, seed=20240505))
    write("social-1000.txt", 1000, random_graph(1000, 3000, seed=20241000))


if __name__ == "__main__":
    main()
