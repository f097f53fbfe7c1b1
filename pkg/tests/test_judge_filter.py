import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphpurify import (
    ConfigError,
    DEFAULT_TAU,
    EdgeScores,
    FilterSpec,
    JudgeSpec,
    apply_judge_filter,
    build_graph,
    connected_components,
    filter_connectivity,
    filter_singleton,
    judge_percentage,
    judge_threshold,
    remove_edges,
)

from .conftest import graphs


def scored(g, values):
    return EdgeScores(g.edge_array, np.asarray(values, dtype=np.float64), "test")


def k3():
    return build_graph(3, [(0, 1), (0, 2), (1, 2)])


class TestSpecs:
    def test_judge_parse(self):
        j = JudgeSpec.parse("p:0.05")
        assert j.kind == "percentage" and j.p == 0.05
        assert j.label() == "p:0.05"
        j = JudgeSpec.parse("t:-2.3")
        assert j.kind == "threshold" and j.tau == -2.3
        assert j.label() == "t:-2.3"

    @pytest.mark.parametrize("text", ["x:0.1", "p", "p:", "p:abc", "0.1"])
    def test_judge_parse_rejects(self, text):
        with pytest.raises(ConfigError):
            JudgeSpec.parse(text)

    def test_judge_p_range(self):
        with pytest.raises(ConfigError):
            JudgeSpec("percentage", p=0.0)
        with pytest.raises(ConfigError):
            JudgeSpec("percentage", p=1.2)
        JudgeSpec("percentage", p=1.0)  # boundary allowed

    def test_judge_exclusive_params(self):
        with pytest.raises(ConfigError):
            JudgeSpec("percentage", p=0.1, tau=0.5)
        with pytest.raises(ConfigError):
            JudgeSpec("threshold")

    def test_filter_parse(self):
        assert FilterSpec.parse("s").kind == "singleton"
        assert FilterSpec.parse("c").kind == "connectivity"
        assert FilterSpec.parse("none").kind == "none"
        with pytest.raises(ConfigError):
            FilterSpec.parse("q")

    def test_default_taus(self):
        assert DEFAULT_TAU["jaccard"] == 0.01
        assert DEFAULT_TAU["cosine"] == 0.01
        assert DEFAULT_TAU["kld"] == -2.3


class TestJudges:
    def test_percentage_floor_and_tie_break(self):
        g = k3()
        cand = judge_percentage(g, scored(g, [0.5, 0.5, 0.5]), p=0.34)
        # floor(0.34 * 3) = 1; tie broken toward the lower canonical index
        assert cand.tolist() == [[0, 1]]

    def test_percentage_takes_lowest(self):
        g = k3()
        cand = judge_percentage(g, scored(g, [0.9, 0.1, 0.5]), p=0.67)
        assert cand.tolist() == [[0, 2], [1, 2]]

    def test_percentage_zero_floor(self):
        g = k3()
        assert len(judge_percentage(g, scored(g, [1, 2, 3]), p=0.3)) == 0

    def test_percentage_all(self):
        g = k3()
        assert len(judge_percentage(g, scored(g, [1, 2, 3]), p=1.0)) == 3

    def test_percentage_validates_p(self):
        g = k3()
        with pytest.raises(ConfigError):
            judge_percentage(g, scored(g, [1, 2, 3]), p=0.0)

    def test_threshold_is_strict(self):
        g = k3()
        cand = judge_threshold(g, scored(g, [0.0, 0.1, -0.1]), tau=0.0)
        # score == tau is NOT selected
        assert cand.tolist() == [[1, 2]]

    def test_threshold_orders_by_score(self):
        g = k3()
        cand = judge_threshold(g, scored(g, [0.3, 0.1, 0.2]), tau=0.5)
        assert cand.tolist() == [[0, 2], [1, 2], [0, 1]]

    def test_misaligned_scores_rejected(self):
        g = k3()
        other = build_graph(3, [(0, 1), (1, 2)])
        with pytest.raises(Exception):
            judge_percentage(g, scored(other, [1, 2]), p=0.5)


class TestSingletonFilter:
    def test_k3_all_candidates_one_accepted(self):
        g = k3()
        out = filter_singleton(g, g.edge_array)
        # after one deletion two nodes drop to degree 1
        assert out.tolist() == [[0, 1]]

    def test_leaf_edge_protected(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        assert len(filter_singleton(g, g.edge_array)) == 0

    def test_order_dependence_of_budget(self):
        # path 0-1-2-3: deleting (1,2) first blocks everything else
        g = build_graph(4, [(0, 1), (1, 2), (2, 3)])
        out = filter_singleton(g, np.array([[1, 2], [0, 1], [2, 3]]))
        assert out.tolist() == [[1, 2]]

    def test_output_sorted_canonically(self):
        g = build_graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
        out = filter_singleton(g, np.array([[2, 3], [0, 1]]))
        assert out.tolist() == [[0, 1], [2, 3]]

    def test_empty_candidates(self):
        g = k3()
        assert filter_singleton(g, np.zeros((0, 2), dtype=np.int64)).shape == (0, 2)


class TestConnectivityFilter:
    def test_k3_all_candidates_one_deleted(self):
        g = k3()
        out = filter_connectivity(g, g.edge_array, scored(g, [0.5, 0.5, 0.5]))
        # MST keeps 2 of 3 edges; exactly one cycle edge is deletable
        assert len(out) == 1

    def test_tree_deletes_nothing(self):
        g = build_graph(4, [(0, 1), (1, 2), (2, 3)])
        out = filter_connectivity(g, g.edge_array, scored(g, [0.1, 0.2, 0.3]))
        assert len(out) == 0

    def test_weighting_rule_picks_the_heavier_candidate(self):
        # candidate weight is 1 + minmax(score); the minimum spanning tree
        # keeps light edges, so where a cycle allows one deletion the
        # higher-scored candidate is the one removed
        g = build_graph(4, [(0, 1), (0, 3), (1, 2), (2, 3)])
        scores = scored(g, [0.05, 0.9, 0.8, 0.7])
        out = filter_connectivity(g, np.array([[0, 1], [2, 3]]), scores)
        assert out.tolist() == [[2, 3]]

    def test_single_lowest_candidate_on_k3_deleted(self):
        g = k3()
        out = filter_connectivity(g, np.array([[1, 2]]), scored(g, [0.9, 0.8, 0.1]))
        assert out.tolist() == [[1, 2]]

    def test_unselected_edges_never_deleted(self):
        g = build_graph(4, [(0, 1), (0, 2), (1, 2), (2, 3)])
        cand = np.array([[0, 1]])
        out = filter_connectivity(g, cand, scored(g, [0.1, 0.2, 0.3, 0.4]))
        as_set = {tuple(e) for e in out.tolist()}
        assert as_set <= {(0, 1)}

    def test_empty_candidates(self):
        g = k3()
        out = filter_connectivity(
            g, np.zeros((0, 2), dtype=np.int64), scored(g, [1, 2, 3])
        )
        assert out.shape == (0, 2)


class TestApply:
    def test_end_to_end_composition(self):
        g = k3()
        s = scored(g, [0.2, 0.6, 0.9])
        g2, deleted = apply_judge_filter(
            g, s, JudgeSpec("percentage", p=1.0), FilterSpec("singleton")
        )
        assert deleted.tolist() == [[0, 1]]
        assert g2.num_edges == 2
        assert not g2.has_edge(0, 1)

    def test_filter_none_deletes_all_candidates(self):
        g = k3()
        s = scored(g, [0.2, 0.6, 0.9])
        g2, deleted = apply_judge_filter(
            g, s, JudgeSpec("threshold", tau=0.7), FilterSpec("none")
        )
        assert deleted.tolist() == [[0, 1], [0, 2]]
        assert g2.num_edges == 1

    def test_no_candidates_is_identity(self):
        g = k3()
        s = scored(g, [0.2, 0.6, 0.9])
        g2, deleted = apply_judge_filter(
            g, s, JudgeSpec("threshold", tau=-1.0), FilterSpec("singleton")
        )
        assert len(deleted) == 0
        assert g2.num_edges == 3


# ---------------------------------------------------------------------------
# invariant properties


@st.composite
def graph_scores_candidates(draw):
    g = draw(graphs(max_nodes=10, min_edges=1))
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    rng = np.random.default_rng(seed)
    scores = EdgeScores(g.edge_array, rng.random(g.num_edges), "test")
    p = draw(st.floats(min_value=0.05, max_value=1.0))
    cand = judge_percentage(g, scores, p=p)
    return g, scores, cand


@settings(max_examples=80, deadline=None)
@given(graph_scores_candidates())
def test_connectivity_filter_preserves_component_partition(case):
    g, scores, cand = case
    out = filter_connectivity(g, cand, scores)
    before, n_before = connected_components(g)
    after, n_after = connected_components(remove_edges(g, out))
    assert n_before == n_after
    assert np.array_equal(before, after)


@settings(max_examples=80, deadline=None)
@given(graph_scores_candidates())
def test_singleton_filter_never_isolates(case):
    g, _, cand = case
    out = filter_singleton(g, cand)
    g2 = remove_edges(g, out)
    had_edges = g.degrees > 0
    assert np.all(g2.degrees[had_edges] >= 1)


@settings(max_examples=80, deadline=None)
@given(graph_scores_candidates())
def test_filters_delete_only_candidates(case):
    g, scores, cand = case
    cand_set = {tuple(e) for e in cand.tolist()}
    for out in (
        filter_singleton(g, cand),
        filter_connectivity(g, cand, scores),
    ):
        assert {tuple(e) for e in out.tolist()} <= cand_set
