import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from echolens.graph import InteractionGraph
from echolens.influence import pagerank, rank_tables, scale_scores

from _oracles import dense_pagerank
from conftest import make_tweet, make_user


def cycle_graph(n=3):
    g = InteractionGraph()
    for i in range(n):
        g.add_interaction(f"n{i}", f"n{(i + 1) % n}", "retweet")
    return g


def star_graph():
    """Three leaves each pointing at the hub."""
    g = InteractionGraph()
    for leaf in ("l1", "l2", "l3"):
        g.add_interaction(leaf, "hub", "retweet")
    return g


def random_graph(seed: int):
    rng = random.Random(seed)
    n = rng.randint(1, 10)
    nodes = [f"n{i}" for i in range(n)]
    g = InteractionGraph()
    for node in nodes:
        g.add_node(node)
    edges = {}
    for _ in range(rng.randint(0, 3 * n)):
        src, dst = rng.sample(nodes, 2) if n > 1 else (None, None)
        if src is None:
            break
        w = rng.randint(1, 5)
        g.add_interaction(src, dst, rng.choice(("retweet", "reply")), w)
        edges[(src, dst)] = edges.get((src, dst), 0) + w
    return g, edges


class TestPageRank:
    def test_three_node_cycle_uniform(self):
        result = pagerank(cycle_graph(3))
        for score in result.scores.values():
            assert abs(score - 1.0 / 3.0) < 1e-9
        assert result.converged

    def test_single_node_exact_unit_mass(self):
        g = InteractionGraph()
        g.add_node("only")
        result = pagerank(g)
        assert result.scores["only"] == 1.0

    def test_star_matches_dense_oracle(self):
        g = star_graph()
        edges = {(leaf, "hub"): 1 for leaf in ("l1", "l2", "l3")}
        expected = dense_pagerank(g.sorted_nodes(), edges, damping=0.85)
        result = pagerank(g, damping=0.85)
        for node in g.nodes:
            assert abs(result.scores[node] - expected[node]) < 1e-6
        assert result.scores["hub"] == max(result.scores.values())

    def test_fifty_random_graphs_match_oracle(self):
        for seed in range(50):
            g, edges = random_graph(seed)
            result = pagerank(g)
            expected = dense_pagerank(g.sorted_nodes(), edges)
            assert abs(sum(result.scores.values()) - 1.0) < 1e-9
            for node in g.nodes:
                assert abs(result.scores[node] - expected[node]) < 1e-6, seed

    def test_mass_conserved_every_graph(self):
        for seed in range(20):
            g, _ = random_graph(seed + 100)
            scores = pagerank(g).scores
            assert abs(sum(scores.values()) - 1.0) < 1e-9
            assert all(0.0 <= s <= 1.0 for s in scores.values())

    def test_relabeling_permutes_scores(self):
        g, edges = random_graph(3)
        mapping = {n: f"x_{n}" for n in g.nodes}
        relabeled = InteractionGraph.from_weighted_edges(
            ((mapping[s], mapping[d], rt, rp) for s, d, _, rt, rp in g.edges()),
            nodes=[mapping[n] for n in g.sorted_nodes()])
        base = pagerank(g).scores
        moved = pagerank(relabeled).scores
        for node, score in base.items():
            assert abs(moved[mapping[node]] - score) < 1e-12

    def test_nonconvergence_sets_warning_flag(self):
        result = pagerank(star_graph(), tol=1e-30, max_iter=3)
        assert not result.converged
        assert result.iterations == 3
        assert abs(sum(result.scores.values()) - 1.0) < 1e-9

    def test_empty_graph_rejected(self):
        with pytest.raises(ValueError):
            pagerank(InteractionGraph())

    def test_bad_damping_rejected(self):
        with pytest.raises(ValueError):
            pagerank(cycle_graph(), damping=1.0)


class TestScaleScores:
    def test_hand_worked_mapping(self):
        scaled = scale_scores({"A": 0.2, "B": 0.5, "C": 0.3})
        assert scaled["A"] == 0.0
        assert scaled["B"] == 10.0
        assert abs(scaled["C"] - 10.0 * (0.1 / 0.3)) < 1e-12

    def test_degenerate_span_all_ten(self):
        assert scale_scores({"A": 0.5, "B": 0.5}) == {"A": 10.0, "B": 10.0}
        assert scale_scores({"only": 1.0}) == {"only": 10.0}

    def test_two_nodes_hit_endpoints(self):
        scaled = scale_scores({"A": 0.25, "B": 0.75})
        assert scaled == {"A": 0.0, "B": 10.0}

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            scale_scores({})

    @settings(max_examples=50, deadline=None)
    @given(st.dictionaries(st.text(min_size=1, max_size=4),
                           st.floats(0, 1, allow_nan=False), min_size=1, max_size=8))
    def test_ranking_preserved_and_range(self, raw):
        scaled = scale_scores(raw)
        assert all(0.0 <= v <= 10.0 for v in scaled.values())
        best_raw = max(raw, key=lambda k: (raw[k], k))
        assert scaled[best_raw] == max(scaled.values())
        ranked_raw = sorted(raw, key=lambda k: (raw[k], k))
        ranked_scaled = sorted(scaled, key=lambda k: (scaled[k], k))
        assert ranked_raw == ranked_scaled


class TestRankTables:
    def users(self):
        return {
            "hub": make_user("hub", display_name="Hub Org", account_kind="organization"),
            "l1": make_user("l1", display_name="Leaf One", account_kind="individual"),
            "l2": make_user("l2", display_name="Leaf Two", account_kind="individual"),
            "l3": make_user("l3", display_name="Leaf Three", account_kind="unknown"),
        }

    def test_privacy_renders_individual(self):
        g = star_graph()
        scaled = scale_scores(pagerank(g).scores)
        tweets = [make_tweet("t1", author_id="l1")]
        table = rank_tables(g, scaled, tweets, self.users(), k=4, privacy=True)
        rendered = [row[2] for row in table.rows]
        assert "Individual" in rendered
        assert rendered[0] == "Hub Org"
        off = rank_tables(g, scaled, tweets, self.users(), k=4, privacy=False)
        assert "Individual" not in [row[2] for row in off.rows]

    def test_star_hub_tops_retweeted_and_pagerank(self):
        g = star_graph()
        scaled = scale_scores(pagerank(g).scores)
        table = rank_tables(g, scaled, [], self.users(), k=1)
        assert table.columns["retweeted"][0][0] == "hub"
        assert table.columns["pagerank"][0][0] == "hub"

    def test_empty_everything_empty_table(self):
        table = rank_tables(InteractionGraph(), {}, [], {}, k=5)
        assert table.rows == []

    def test_k_larger_than_nodes_truncates(self):
        g = star_graph()
        scaled = scale_scores(pagerank(g).scores)
        table = rank_tables(g, scaled, [], self.users(), k=99)
        assert len(table.rows) == 4

    def test_volume_column_counts_authored(self):
        g = star_graph()
        scaled = scale_scores(pagerank(g).scores)
        tweets = [make_tweet(f"t{i}", author_id="l2") for i in range(3)]
        tweets += [make_tweet("t9", author_id="l1")]
        table = rank_tables(g, scaled, tweets, self.users(), k=2)
        assert table.columns["tweet_volume"][0] == ("l2", 3.0)
