"""Adaptive initiator selection for k-hop collaborative game promotion.

A game company invites up to ``b`` users of a social network to launch a
multiplayer game; an accepted invitation starts a cascade of friend
invitations that reaches at most ``k`` hops, and each participant yields
revenue graded by hop level.  This package provides the network model,
the observation machinery, marginal-gain estimators (layered, Monte-Carlo
and exact), the adaptive greedy policy with heuristic baselines, and an
experiment harness with a CLI.
"""

from .gain import (
    FastGainEvaluator,
    GainEstimate,
    GainMethod,
    exact_gain_distribution,
    get_fast_evaluator,
    layer_table,
    marginal_gain_exact,
    marginal_gain_fast,
    marginal_gain_mc,
    reachable_observations,
    submodularity_violations,
)
from .harness import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    ExperimentRow,
    compare_gain_methods,
    resolve_theta,
    run_experiment,
    write_csv,
)
from .network import (
    NO_HOP,
    EdgeListParseError,
    Graph,
    ModelParams,
    bfs_within,
    build_graph,
    load_edge_list,
    multi_source_hops,
    neighbors,
)
from .policy import (
    POLICY_NAMES,
    GainCache,
    GainSpec,
    RunResult,
    invalidate_cache,
    run_policy,
)
from .realization import (
    ONE,
    UNKNOWN,
    ZERO,
    LazyRealization,
    PartialRealization,
    Realization,
    dump_states,
    hop_level,
    hop_levels,
    is_consistent,
    is_reveal_closed,
    is_subrealization,
    parse_states,
    reveal_after_accept,
    sample_realization,
)
from .revenue import (
    EnumerationCapError,
    HopAssignment,
    expected_revenue_exact,
    hop_assignment,
    total_revenue,
)

__version__ = "0.1.0"
