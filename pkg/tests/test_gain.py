"""Marginal-gain estimators: layered, Monte-Carlo, exact, and their relations."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from khopgame import (
    LazyRealization,
    PartialRealization,
    build_graph,
    exact_gain_distribution,
    get_fast_evaluator,
    hop_levels,
    layer_table,
    marginal_gain_exact,
    marginal_gain_fast,
    marginal_gain_mc,
    parse_states,
    reachable_observations,
    submodularity_violations,
)

from conftest import make_params, path_graph, random_instance, star_graph, triangle_graph


def worked_example():
    """Path v1..v5 (ids 0..4) after the first invite: center accepted, live
    edge toward v2, dead edges toward v4 and v1."""
    g = path_graph(5)
    params = make_params(g, 2, [8.0, 6.0, 4.0], theta=1.0, budget=2)
    psi = parse_states(g, "N 2 1\nE 1 2 1\nE 2 3 0\nE 0 1 0")
    return g, params, psi


def lemma2_instance():
    g = build_graph(4, [(0, 1, 0.1), (1, 2, 0.1), (1, 3, 0.1)])
    params = make_params(g, 2, [5.0, 3.0, 1.0], theta=0.5)
    psi1 = PartialRealization.empty(g)
    psi2 = parse_states(g, "N 0 1\nE 0 1 1\nE 1 2 1\nE 1 3 1")
    return g, params, psi1, psi2


class TestFastEstimator:
    def test_worked_example_values(self):
        g, params, psi = worked_example()
        values = {u: marginal_gain_fast(g, psi, u, params).value for u in (0, 1, 3, 4)}
        assert values[0] == pytest.approx(8.0, abs=1e-12)          # R0
        assert values[1] == pytest.approx(2.0, abs=1e-12)          # R0 - R1
        assert values[3] == pytest.approx(11.0, abs=1e-12)         # R0 + R1/2
        assert values[4] == pytest.approx(11.0, abs=1e-12)

    def test_worked_example_symbolic(self):
        g, _, psi = worked_example()
        for r0, r1, r2 in [(8.0, 6.0, 4.0), (9.0, 5.0, 5.0), (7.0, 7.0, 0.0)]:
            params = make_params(g, 2, [r0, r1, r2], theta=1.0)
            assert marginal_gain_fast(g, psi, 0, params).value == pytest.approx(r0, abs=1e-12)
            assert marginal_gain_fast(g, psi, 1, params).value == pytest.approx(
                r0 - r1, abs=1e-12
            )
            assert marginal_gain_fast(g, psi, 3, params).value == pytest.approx(
                r0 + r1 / 2, abs=1e-12
            )

    def test_first_selection_is_center(self):
        g, params, _ = worked_example()
        empty = PartialRealization.empty(g)
        gains = [marginal_gain_fast(g, empty, u, params).value for u in range(5)]
        assert int(np.argmax(gains)) == 2

    def test_lemma2_values(self):
        g, params, psi1, psi2 = lemma2_instance()
        assert marginal_gain_fast(g, psi1, 1, params).value == pytest.approx(2.95, abs=1e-12)
        assert marginal_gain_fast(g, psi2, 1, params).value == pytest.approx(3.0, abs=1e-12)

    def test_theta_zero_gives_zero(self):
        g = triangle_graph()
        params = make_params(g, 2, [8.0, 6.0, 4.0], theta=0.0)
        psi = PartialRealization.empty(g)
        assert marginal_gain_fast(g, psi, 0, params).value == 0.0

    def test_invited_candidate_rejected(self):
        g, params, psi = worked_example()
        with pytest.raises(ValueError, match="already invited"):
            marginal_gain_fast(g, psi, 2, params)

    def test_layer_table_structure_and_bounds(self):
        g, params, psi = worked_example()
        layers = layer_table(g, psi, 3, params)
        assert layers[0] == {3: 1.0}
        assert set(layers[1]) == {2, 4}
        assert set(layers[2]) == {1}
        for level in layers:
            for prob in level.values():
                assert 0.0 <= prob <= 1.0

    def test_layer_assignment_is_first_level_only(self):
        g = triangle_graph()
        params = make_params(g, 2, [8.0, 6.0, 4.0], theta=1.0)
        layers = layer_table(g, PartialRealization.empty(g), 0, params)
        assert set(layers[1]) == {1, 2}
        assert layers[2] == {}


class TestExactOracle:
    def test_lemma2_values(self):
        g, params, psi1, psi2 = lemma2_instance()
        assert marginal_gain_exact(g, psi1, 1, params).value == pytest.approx(2.95, abs=1e-12)
        assert marginal_gain_exact(g, psi2, 1, params).value == pytest.approx(3.0, abs=1e-12)

    def test_tree_matches_fast(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            g, params, psi = random_instance(rng, tree=True, k_choices=(0, 1, 2, 3))
            for u in range(g.node_count):
                if u in psi.invited:
                    continue
                fast = marginal_gain_fast(g, psi, u, params).value
                exact = marginal_gain_exact(g, psi, u, params).value
                assert fast == pytest.approx(exact, abs=1e-12)

    def test_k_le_1_matches_fast(self):
        rng = np.random.default_rng(23)
        for _ in range(40):
            g, params, psi = random_instance(rng, k_choices=(0, 1))
            for u in range(g.node_count):
                if u in psi.invited:
                    continue
                fast = marginal_gain_fast(g, psi, u, params).value
                exact = marginal_gain_exact(g, psi, u, params).value
                assert fast == pytest.approx(exact, abs=1e-12)

    def test_triangle_under_approximation(self):
        # the layered estimator ignores the two-hop fallback path of each
        # direct neighbor; each contributes (1-p) * p^2 * R2
        g = triangle_graph(p=0.5)
        params = make_params(g, 2, [8.0, 6.0, 4.0], theta=1.0)
        psi = PartialRealization.empty(g)
        fast = marginal_gain_fast(g, psi, 0, params).value
        exact = marginal_gain_exact(g, psi, 0, params).value
        per_node_term = 0.5 * 0.25 * 4.0
        assert exact - fast == pytest.approx(2 * per_node_term, abs=1e-12)

    def test_fast_below_exact_at_k2_with_certain_acceptance(self):
        rng = np.random.default_rng(31)
        checked = 0
        while checked < 60:
            g, params, psi = random_instance(rng, k_choices=(2,))
            theta = params.accept_prob.copy()
            for u in range(g.node_count):
                if u in psi.invited:
                    continue
                theta[u] = 1.0
                sure = make_params(g, params.k, params.revenue, theta=theta, budget=1)
                fast = marginal_gain_fast(g, psi, u, sure).value
                exact = marginal_gain_exact(g, psi, u, sure).value
                assert fast <= exact + 1e-12
                theta[u] = params.accept_prob[u]
                checked += 1

    def test_overcount_regression_shared_acceptance(self):
        # diamond with sure edges and an unsure candidate: both two-hop
        # parents repeat the candidate's acceptance factor, and treating
        # them as independent overshoots
        g = build_graph(4, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
        params = make_params(g, 2, [8.0, 6.0, 4.0], theta=[0.5, 1.0, 1.0, 1.0])
        psi = PartialRealization.empty(g)
        fast = marginal_gain_fast(g, psi, 0, params).value
        exact = marginal_gain_exact(g, psi, 0, params).value
        assert exact == pytest.approx(0.5 * (8.0 + 2 * 6.0 + 4.0), abs=1e-12)
        assert fast == pytest.approx(exact + 0.25 * 4.0, abs=1e-12)

    def test_overcount_regression_shared_edge(self):
        # two length-3 routes sharing their first edge; the layered product
        # treats the mid-level parents as independent
        g = build_graph(5, [(0, 1, 0.5), (1, 2, 0.5), (1, 3, 0.5), (2, 4, 0.5), (3, 4, 0.5)])
        params = make_params(g, 3, [8.0, 6.0, 4.0, 2.0], theta=1.0)
        psi = PartialRealization.empty(g)
        fast = marginal_gain_fast(g, psi, 0, params).value
        exact = marginal_gain_exact(g, psi, 0, params).value
        p = 0.5
        assert fast - exact == pytest.approx((p**5 - p**6) * 2.0, abs=1e-12)

    def test_distribution_sums_to_one(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            g, params, psi = random_instance(rng)
            for u in range(g.node_count):
                if u in psi.invited:
                    continue
                values, probs = exact_gain_distribution(g, psi, u, params)
                assert probs.sum() == pytest.approx(1.0, abs=1e-12)
                assert np.all(values >= -1e-12)
                mean = float(np.dot(values, probs))
                assert mean == pytest.approx(
                    marginal_gain_exact(g, psi, u, params).value, abs=1e-12
                )


class TestMonteCarlo:
    def test_deterministic_world_exact_for_any_r(self):
        g = path_graph(4, p=1.0)
        params = make_params(g, 2, [8.0, 6.0, 4.0], theta=1.0)
        psi = PartialRealization.empty(g)
        for r in (1, 3, 10):
            est = marginal_gain_mc(g, psi, 0, params, r, np.random.default_rng(0))
            assert est.value == pytest.approx(8.0 + 6.0 + 4.0, abs=1e-12)
            assert est.samples == r

    def test_lemma2_concentration(self):
        g, params, psi1, _ = lemma2_instance()
        est = marginal_gain_mc(g, psi1, 1, params, 100_000, np.random.default_rng(42))
        assert abs(est.value - 2.95) < 0.05

    def test_single_sample_lands_in_support(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            g, params, psi = random_instance(rng)
            candidates = [u for u in range(g.node_count) if u not in psi.invited]
            if not candidates:
                continue
            u = candidates[0]
            values, _ = exact_gain_distribution(g, psi, u, params)
            one = marginal_gain_mc(g, psi, u, params, 1, rng).value
            assert any(math.isclose(one, v, abs_tol=1e-9) for v in values)

    def test_streaming_and_grouped_paths_agree_with_exact(self):
        # grouped evaluation kicks in for large r over few unknowns; the
        # streaming loop handles everything else; both concentrate on the
        # exact value
        g, params, psi1, _ = lemma2_instance()
        exact = marginal_gain_exact(g, psi1, 1, params).value
        grouped = marginal_gain_mc(g, psi1, 1, params, 50_000, np.random.default_rng(1))
        streaming = marginal_gain_mc(g, psi1, 1, params, 7, np.random.default_rng(1))
        assert abs(grouped.value - exact) < 0.1
        assert streaming.value >= 0.0

    def test_open_observation_slow_path(self):
        # hand-built observation that is not reveal-closed: a participant
        # one hop deep still has an unknown incident edge
        g = path_graph(4)
        params = make_params(g, 2, [8.0, 6.0, 4.0], theta=1.0)
        psi = parse_states(g, "N 0 1\nE 0 1 1")
        exact = marginal_gain_exact(g, psi, 3, params).value
        est = marginal_gain_mc(g, psi, 3, params, 200_000, np.random.default_rng(3))
        values, probs = exact_gain_distribution(g, psi, 3, params)
        sigma = math.sqrt(max(float(np.dot(values**2, probs)) - exact**2, 0.0))
        assert abs(est.value - exact) <= 4 * sigma / math.sqrt(200_000) + 1e-12

    def test_requires_positive_samples(self):
        g, params, psi1, _ = lemma2_instance()
        with pytest.raises(ValueError, match="samples"):
            marginal_gain_mc(g, psi1, 1, params, 0, np.random.default_rng(0))


class TestNonnegativity:
    @given(seed=st.integers(0, 1_000_000))
    @settings(max_examples=40, deadline=None, derandomize=True)
    def test_all_estimators_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        g, params, psi = random_instance(rng, k_choices=(0, 1, 2, 3))
        candidates = [u for u in range(g.node_count) if u not in psi.invited]
        if not candidates:
            return
        u = candidates[int(rng.integers(len(candidates)))]
        assert marginal_gain_fast(g, psi, u, params).value >= -1e-12
        assert marginal_gain_exact(g, psi, u, params).value >= -1e-12
        assert marginal_gain_mc(g, psi, u, params, 50, rng).value >= -1e-12


class TestBatchEvaluator:
    @given(seed=st.integers(0, 1_000_000))
    @settings(max_examples=30, deadline=None, derandomize=True)
    def test_matches_reference_bitwise(self, seed):
        rng = np.random.default_rng(seed)
        g, params, psi = random_instance(rng, k_choices=(0, 1, 2, 3))
        ev = get_fast_evaluator(g, params.k)
        hops = hop_levels(g, psi, params.k)
        batch = ev.gains(psi.edge_state, hops, params.accept_prob, params.revenue_ext)
        for u in range(g.node_count):
            if u in psi.invited:
                continue
            # summation order differs between the two implementations, so
            # allow last-bit rounding
            reference = marginal_gain_fast(g, psi, u, params, hops).value
            assert math.isclose(batch[u], reference, rel_tol=1e-12, abs_tol=1e-12)

    def test_subset_mode_matches_full_mode(self):
        rng = np.random.default_rng(77)
        g, params, psi = random_instance(rng, max_nodes=9, k_choices=(2, 3))
        ev = get_fast_evaluator(g, params.k)
        hops = hop_levels(g, psi, params.k)
        full = ev.gains(psi.edge_state, hops, params.accept_prob, params.revenue_ext)
        subset = np.array([0, g.node_count - 1, g.node_count // 2])
        got = ev.gains(
            psi.edge_state, hops, params.accept_prob, params.revenue_ext, candidates=subset
        )
        for pos, u in enumerate(subset):
            assert got[pos] == full[u]


class TestSubmodularityDiagnostics:
    def test_lemma2_violation_is_found(self):
        g, params, _, _ = lemma2_instance()
        observations = reachable_observations(g, params, max_invites=1)
        violations = submodularity_violations(g, params, observations)
        assert violations, "expected a violation on the non-submodular witness"
        best = {
            (v.candidate, round(v.gain_small, 10), round(v.gain_large, 10))
            for v in violations
        }
        assert (1, 2.95, 3.0) in best

    def test_no_violation_on_sure_edges(self):
        g = triangle_graph(p=1.0)
        params = make_params(g, 2, [8.0, 6.0, 4.0], theta=0.5)
        observations = reachable_observations(g, params, max_invites=2)
        assert submodularity_violations(g, params, observations) == []

    def test_no_violation_at_k1(self):
        g = star_graph(3, p=0.3)
        params = make_params(g, 1, [8.0, 6.0], theta=0.5)
        observations = reachable_observations(g, params, max_invites=2)
        assert submodularity_violations(g, params, observations) == []
