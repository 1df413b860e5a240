"""Experiment runner: seeded repetitions, statistics, and CSV emission.

Every run is reproducible in isolation: a per-run seed is derived from the
master seed by run index, and the acceptance vector, ground truth and
policy randomness are derived from it by role.  The ground truth is
lazily sampled with order-independent draws, so all policies and budgets
within one run face the same world.
"""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .gain import GainMethod
from .network import Graph, ModelParams, load_edge_list
from .policy import POLICY_NAMES, GainSpec, run_policy
from .realization import LazyRealization
from .seeding import derive_seed

CSV_HEADER = "policy,k,b,run,seed,revenue,accepted,invited,gain_evals,wall_ms"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    dataset: str | None = None
    default_p: float = 0.5
    theta: str = "uniform"
    k: int = 2
    revenue: tuple[float, ...] = (8.0, 6.0, 4.0)
    budgets: tuple[int, ...] = (10,)
    policies: tuple[str, ...] = ("adaptive",)
    reps: int = 50
    gain: str = "fast"
    master_seed: int = 0
    theta_seed: int | None = None
    jobs: int = 1
    timings: bool = True
    reveal_mode: str = "diffusion"
    use_cache: bool | None = None

    def validate(self) -> None:
        if len(self.revenue) != self.k + 1:
            raise ConfigError(
                f"revenue must have k+1 = {self.k + 1} entries, got {len(self.revenue)}"
            )
        if any(r < 0 for r in self.revenue):
            raise ConfigError("revenue entries must be nonnegative")
        if any(a < b for a, b in zip(self.revenue, self.revenue[1:])):
            raise ConfigError("revenue must be non-increasing")
        if self.reps < 1:
            raise ConfigError("repetitions must be at least 1")
        if not self.budgets or any(b < 1 for b in self.budgets):
            raise ConfigError("budgets must be positive")
        if not 0.0 <= self.default_p <= 1.0:
            raise ConfigError("default-p must lie in [0,1]")
        for pol in self.policies:
            if pol not in POLICY_NAMES:
                raise ConfigError(f"unknown policy {pol!r} (expected one of {POLICY_NAMES})")
        try:
            GainSpec.parse(self.gain)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.theta != "uniform" and not self.theta.startswith(("const:", "file:")):
            raise ConfigError(
                f"theta must be uniform, const:<v> or file:<path>, got {self.theta!r}"
            )
        if self.theta.startswith("const:"):
            v = float(self.theta.partition(":")[2])
            if not 0.0 <= v <= 1.0:
                raise ConfigError("constant theta must lie in [0,1]")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.reveal_mode not in ("diffusion", "distance"):
            raise ConfigError("reveal mode must be diffusion or distance")


@dataclass
class ExperimentRow:
    policy: str
    k: int
    b: int
    run: str
    seed: str
    revenue: float | str
    accepted: float | str
    invited: float | str
    gain_evals: float | str
    wall_ms: float | str


def load_dataset(config: ExperimentConfig) -> Graph:
    if config.dataset is None:
        raise ConfigError("no dataset configured")
    with open(config.dataset, "r", encoding="utf-8") as fh:
        return load_edge_list(fh, default_p=config.default_p)


def resolve_theta(config: ExperimentConfig, g: Graph, run_seed: int) -> np.ndarray:
    """Acceptance vector for one run.

    ``uniform`` draws each node's probability from U[0,1] with the run's
    seed (or a frozen seed when ``theta_seed`` is set, isolating the
    acceptance draw from run-to-run variance).
    """
    if config.theta == "uniform":
        base = (
            derive_seed(config.theta_seed, "theta")
            if config.theta_seed is not None
            else derive_seed(run_seed, "theta")
        )
        return np.random.default_rng(base).random(g.node_count)
    if config.theta.startswith("const:"):
        return np.full(g.node_count, float(config.theta.partition(":")[2]))
    path = config.theta.partition(":")[2]
    values = np.loadtxt(path, dtype=np.float64, ndmin=1)
    if len(values) != g.node_count:
        raise ConfigError(
            f"theta file has {len(values)} values for a {g.node_count}-node graph"
        )
    return values


# Context shared with forked pool workers (set before the pool is created).
_POOL_CTX: dict = {}


def _execute_run(task: tuple[str, str, int]) -> list[tuple]:
    """Run one (policy, run index) cell; returns per-budget row tuples."""
    policy, gain_text, run_index = task
    config: ExperimentConfig = _POOL_CTX["config"]
    g: Graph = _POOL_CTX["graph"]
    run_seed = derive_seed(config.master_seed, "run", run_index)
    theta = resolve_theta(config, g, run_seed)
    params = ModelParams(
        accept_prob=theta,
        revenue=np.asarray(config.revenue),
        k=config.k,
        budget=max(config.budgets),
    )
    phi = LazyRealization(g, params, derive_seed(run_seed, "phi"))
    rng = np.random.default_rng(derive_seed(run_seed, "policy", policy, gain_text))
    result = run_policy(
        policy,
        g,
        params,
        phi,
        rng,
        gain=GainSpec.parse(gain_text),
        use_cache=config.use_cache,
        checkpoints=list(config.budgets),
        reveal_mode=config.reveal_mode,
    )
    rows = []
    for b in config.budgets:
        stats = result.checkpoints[b]
        rows.append(
            (
                b,
                run_index,
                run_seed,
                stats.revenue,
                stats.accepted,
                stats.invited,
                stats.gain_evaluations,
                stats.wall_time * 1000.0 if config.timings else 0.0,
            )
        )
    return rows


def _run_cells(
    config: ExperimentConfig, g: Graph, cells: list[tuple[str, str]]
) -> dict[tuple[str, str, int], list[tuple]]:
    """Execute (policy, gain) cells for all run indices, optionally in a pool."""
    tasks = [
        (policy, gain_text, run_index)
        for policy, gain_text in cells
        for run_index in range(config.reps)
    ]
    global _POOL_CTX
    _POOL_CTX = {"config": config, "graph": g}
    if config.jobs > 1:
        try:
            ctx = get_context("fork")
        except ValueError:
            ctx = None
        if ctx is not None:
            with ProcessPoolExecutor(max_workers=config.jobs, mp_context=ctx) as pool:
                outputs = list(pool.map(_execute_run, tasks))
            return dict(zip(tasks, outputs))
    return {task: _execute_run(task) for task in tasks}


def _aggregate(values: list[float]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def _emit_rows(
    config: ExperimentConfig,
    cells: list[tuple[str, str]],
    labels: dict[tuple[str, str], str],
    outputs: dict[tuple[str, str, int], list[tuple]],
) -> list[ExperimentRow]:
    rows: list[ExperimentRow] = []
    for cell in cells:
        label = labels[cell]
        for bi, b in enumerate(config.budgets):
            per_run = [outputs[(*cell, r)][bi] for r in range(config.reps)]
            for (_, run_index, run_seed, rev, acc, inv, evals, wall) in per_run:
                rows.append(
                    ExperimentRow(
                        label, config.k, b, str(run_index), str(run_seed),
                        rev, acc, inv, evals, wall,
                    )
                )
            cols = list(zip(*[(r[3], r[4], r[5], r[6], r[7]) for r in per_run]))
            agg = [_aggregate(list(map(float, c))) for c in cols]
            rows.append(
                ExperimentRow(
                    label, config.k, b, "mean", "",
                    *[a[0] for a in agg],
                )
            )
            rows.append(
                ExperimentRow(
                    label, config.k, b, "std", "",
                    *[a[1] for a in agg],
                )
            )
    return rows


def run_experiment(config: ExperimentConfig, graph: Graph | None = None) -> list[ExperimentRow]:
    """Run the configured policies over the budget grid with seeded repetitions.

    Emits one row per (policy, budget, run) plus mean/std aggregate rows,
    in deterministic order.  Budgets are taken as checkpoints of a single
    run per (policy, run index), which is exactly equivalent to isolated
    runs because selection never looks at the remaining budget.
    """
    config.validate()
    g = graph if graph is not None else load_dataset(config)
    cells = [(policy, config.gain) for policy in config.policies]
    labels = {cell: cell[0] for cell in cells}
    outputs = _run_cells(config, g, cells)
    return _emit_rows(config, cells, labels, outputs)


def compare_gain_methods(
    config: ExperimentConfig, graph: Graph | None = None
) -> list[ExperimentRow]:
    """Run the adaptive policy with the fast and Monte-Carlo estimators on
    identical ground truths; per-budget ratio rows report revenue
    (fast over mc) and wall time (mc over fast)."""
    config.validate()
    spec = GainSpec.parse(config.gain)
    mc_text = spec.token() if spec.method is GainMethod.MONTE_CARLO else "mc:100"
    g = graph if graph is not None else load_dataset(config)
    cells = [("adaptive", "fast"), ("adaptive", mc_text)]
    labels = {cells[0]: "adaptive[fast]", cells[1]: f"adaptive[{mc_text}]"}
    outputs = _run_cells(config, g, cells)
    rows = _emit_rows(config, cells, labels, outputs)

    for bi, b in enumerate(config.budgets):
        means = {}
        for cell in cells:
            per_run = [outputs[(*cell, r)][bi] for r in range(config.reps)]
            means[cell] = (
                statistics.fmean(r[3] for r in per_run),
                statistics.fmean(r[7] for r in per_run),
            )
        rev_ratio = means[cells[0]][0] / means[cells[1]][0] if means[cells[1]][0] else float("nan")
        wall_ratio = (
            means[cells[1]][1] / means[cells[0]][1] if means[cells[0]][1] else float("nan")
        )
        rows.append(
            ExperimentRow("fast_vs_mc", config.k, b, "ratio", "", rev_ratio, "", "", "", wall_ratio)
        )
    return rows


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(rows: Sequence[ExperimentRow], out: IO[str] | str | Path) -> None:
    """Write rows with the fixed header; floats use shortest round-trip form."""
    own = isinstance(out, (str, Path))
    fh = open(out, "w", encoding="utf-8") if own else out
    try:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    _fmt(v)
                    for v in (
                        r.policy, r.k, r.b, r.run, r.seed,
                        r.revenue, r.accepted, r.invited, r.gain_evals, r.wall_ms,
                    )
                )
                + "\n"
            )
    finally:
        if own:
            fh.close()


def rows_to_csv(rows: Sequence[ExperimentRow]) -> str:
    import io

    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
