import io
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from diagembed.diagnet import D, N, S, W, Triplet, build_network, neighbors_of_type, subgraph
from diagembed.walker import (MetaPath, MetaPaths, Node2vec, WalkParams, extract_skipgrams, generate_corpus,
                              metapath_next, metapath_walk, node2vec_next, node2vec_walk, read_corpus,
                              skipgram_count, write_corpus)

from helpers import PlainGraph, cyclic_prefix_ok, twenty_node_net


def path_net():
    return PlainGraph({"A": ["B"], "B": ["A", "C"], "C": ["B"]})


class TestMetaPath:
    def test_parse_and_cycle(self):
        mp = MetaPath.parse("D,S,N,S,D")
        assert [mp.type_at(i).value for i in range(9)] == list("DSNSDSNSD")
        assert str(mp) == "D-S-N-S-D"

    @pytest.mark.parametrize("text", ["D,S,N", "D,N,D", "D,S", "S,D,S,N", "D,X,D"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            MetaPath.parse(text)

    def test_d_s_d_is_valid(self):
        assert MetaPath.parse("D,S,D").period == 2


class TestNode2vec:
    def test_path_graph_return_probability(self):
        g = path_net()
        A, B, C = g.ids("A", "B", "C")
        rng = np.random.default_rng(0)
        draws = Counter(node2vec_next(g, A, B, 2.0, 0.5, rng) for _ in range(20_000))
        assert abs(draws[A] / 20_000 - 0.2) < 0.015
        assert abs(draws[C] / 20_000 - 0.8) < 0.015

    @pytest.mark.parametrize("p", [0.25, 1.0, 4.0])
    def test_triangle_middle_case(self, p):
        g = PlainGraph({"A": ["B", "C"], "B": ["A", "C"], "C": ["A", "B"]})
        A, B, C = g.ids("A", "B", "C")
        rng = np.random.default_rng(1)
        n = 20_000
        draws = Counter(node2vec_next(g, A, B, p, 7.0, rng) for _ in range(n))
        expect_a = (1 / p) / (1 / p + 1)
        assert abs(draws[A] / n - expect_a) < 0.015
        assert abs(draws[C] / n - (1 - expect_a)) < 0.015

    def test_uniform_when_p_q_one(self):
        net = twenty_node_net()
        d3 = net.node_id("d:d3")
        s = neighbors_of_type(net, d3, S)[0]
        rng = np.random.default_rng(2)
        nbrs = net.neighbors(s)
        draws = Counter(node2vec_next(net, d3, s, 1, 1, rng) for _ in range(30_000))
        _, pval = stats.chisquare([draws[x] for x in nbrs])
        assert pval > 0.01

    def test_walk_properties(self):
        net = twenty_node_net()
        rng = np.random.default_rng(3)
        for v in range(len(net)):
            walk = node2vec_walk(net, v, 15, 0.5, 2.0, rng)
            assert len(walk) == 15 and walk[0] == v
            for a, b in zip(walk, walk[1:]):
                assert b in net.neighbor_set(a)

    def test_isolated_start(self):
        g = PlainGraph({"A": []})
        assert node2vec_walk(g, 0, 10, 1, 1, np.random.default_rng(0)) == [0]

    def test_bad_params(self):
        with pytest.raises(ValueError):
            node2vec_walk(twenty_node_net(), 0, 5, 0, 1, np.random.default_rng(0))
        with pytest.raises(KeyError):
            node2vec_walk(twenty_node_net(), 999, 5, 1, 1, np.random.default_rng(0))


class TestMetapathWalk:
    def test_uniform_over_required_type(self):
        net = build_network([Triplet("d1", f"n{i}", "w") for i in range(3)])
        d1 = net.node_id("d:d1")
        rng = np.random.default_rng(0)
        draws = Counter(metapath_next(net, d1, S, rng) for _ in range(30_000))
        assert set(draws) == set(neighbors_of_type(net, d1, S))
        for c in draws.values():
            assert abs(c / 30_000 - 1 / 3) < 0.015

    def test_wrong_type_never_chosen(self):
        net = twenty_node_net()
        rng = np.random.default_rng(1)
        for s in net.nodes_of_type(S):
            for _ in range(50):
                assert net.types[metapath_next(net, s, D, rng)] is D
                assert net.types[metapath_next(net, s, W, rng)] is W
        assert metapath_next(net, net.node_id("d:d1"), N, rng) is None

    def test_single_triplet_walk_is_forced(self):
        net = build_network([Triplet("d1", "n1", "w1")])
        mp = MetaPath.parse("D,S,N,S,D")
        walk = metapath_walk(net, net.node_id("d:d1"), 5, mp, np.random.default_rng(0))
        assert [net.keys[v] for v in walk] == ["d:d1", "s:n1|w1", "n:n1", "s:n1|w1", "d:d1"]

    def test_start_type_must_match_head(self):
        net = build_network([Triplet("d1", "n1", "w1")])
        with pytest.raises(ValueError):
            metapath_walk(net, net.node_id("n:n1"), 5, MetaPath.parse("D,S,D"), np.random.default_rng(0))

    def test_dead_end_truncates(self):
        net = build_network([Triplet("d1", "n1", "w1")])
        lone = subgraph(net, [net.node_id("d:d1")])
        assert metapath_walk(lone, 0, 10, MetaPath.parse("D,S,D"), np.random.default_rng(0)) == [0]

    def test_walks_follow_cycle(self):
        net = twenty_node_net()
        mp = MetaPath.parse("D,S,W,S,D")
        rng = np.random.default_rng(5)
        for d in net.nodes_of_type(D):
            walk = metapath_walk(net, d, 30, mp, rng)
            assert cyclic_prefix_ok(net, walk, mp)


class TestCorpus:
    def test_rounds(self):
        net = twenty_node_net()
        walks = generate_corpus(net, MetaPaths(["D,S,N,S,D", "D,S,W,S,D"]), WalkParams(r=10, l=9),
                                np.random.default_rng(0))
        per_start = Counter(w[0] for w in walks)
        assert set(per_start) == set(net.nodes_of_type(D))
        assert all(c == 5 * 2 for c in per_start.values())

    def test_single_path_and_floor(self):
        net = twenty_node_net()
        walks = generate_corpus(net, MetaPaths(["D,S,N,S,D"]), WalkParams(r=10, l=9), np.random.default_rng(0))
        assert len(walks) == 10 * len(net.nodes_of_type(D))
        walks = generate_corpus(net, MetaPaths(["D,S,N,S,D", "D,S,W,S,D", "D,S,D"]), WalkParams(r=10, l=9),
                                np.random.default_rng(0))
        assert len(walks) == 3 * 3 * len(net.nodes_of_type(D))

    def test_single_triplet_example(self):
        net = build_network([Triplet("d1", "n1", "w1")])
        walks = generate_corpus(net, MetaPaths(["D,S,N,S,D"]), WalkParams(r=2, l=5), np.random.default_rng(0))
        assert len(walks) == 2 and all(w[0] == net.node_id("d:d1") for w in walks)

    def test_budget_too_small(self):
        with pytest.raises(ValueError):
            generate_corpus(twenty_node_net(), MetaPaths(["D,S,N,S,D", "D,S,W,S,D"]), WalkParams(r=1, l=5),
                            np.random.default_rng(0))

    def test_node2vec_corpus(self):
        net = twenty_node_net()
        walks = generate_corpus(net, Node2vec(1, 1), WalkParams(r=3, l=6), np.random.default_rng(0))
        assert len(walks) == 3 * len(net)
        assert Counter(w[0] for w in walks) == {v: 3 for v in range(len(net))}

    @pytest.mark.parametrize("strategy", [Node2vec(0.5, 2.0), MetaPaths(["D,S,N,S,D", "D,S,W,S,D"])])
    def test_deterministic(self, strategy):
        net = twenty_node_net()
        a = generate_corpus(net, strategy, WalkParams(4, 12), np.random.default_rng(9))
        b = generate_corpus(net, strategy, WalkParams(4, 12), np.random.default_rng(9))
        assert a == b

    def test_corpus_file_round_trip(self):
        net = build_network([Triplet("d 1", "a b", "c%d")])
        walks = [[0, 1, 2], [1, 3]]
        buf = io.StringIO()
        write_corpus(walks, net.keys, buf)
        assert read_corpus(io.StringIO(buf.getvalue()), net) == walks


class TestSkipgrams:
    def test_window_one(self):
        pairs = extract_skipgrams([[0, 1, 2]], 1)
        assert {tuple(p) for p in pairs} == {(0, 1), (1, 0), (1, 2), (2, 1)}

    def test_window_two(self):
        pairs = extract_skipgrams([[0, 1, 2]], 2)
        assert {tuple(p) for p in pairs} == {(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)}

    def test_order_by_center_then_context(self):
        pairs = extract_skipgrams([[5, 6, 7], [8, 9]], 2)
        assert [tuple(p) for p in pairs] == [(5, 6), (5, 7), (6, 5), (6, 7), (7, 5), (7, 6), (8, 9), (9, 8)]

    def test_pairs_do_not_cross_walks(self):
        pairs = extract_skipgrams([[0, 1], [2, 3]], 3)
        assert {tuple(p) for p in pairs} == {(0, 1), (1, 0), (2, 3), (3, 2)}

    def test_limit_subsamples(self):
        walks = [list(range(50))] * 100
        pairs = extract_skipgrams(walks, 5, limit=1000, rng=np.random.default_rng(0))
        assert pairs.shape == (1000, 2)

    def test_limit_one_million(self):
        walks = [list(range(80))] * 1500  # 1500 * 770 = 1,155,000 pairs
        pairs = extract_skipgrams(walks, 5, limit=1_000_000, rng=np.random.default_rng(0))
        assert len(pairs) == 1_000_000

    def test_limit_tops_up(self):
        pool = extract_skipgrams([[0, 1, 2]], 1)
        pairs = extract_skipgrams([[0, 1, 2]], 1, limit=10, rng=np.random.default_rng(0))
        assert len(pairs) == 10
        assert (pairs[:4] == pool).all()
        assert {tuple(p) for p in pairs} == {tuple(p) for p in pool}

    def test_window_must_be_positive(self):
        with pytest.raises(ValueError):
            extract_skipgrams([[0, 1]], 0)


def brute_pair_count(n, k):
    return sum(1 for i in range(n) for j in range(n) if i != j and abs(i - j) <= k)


@given(st.integers(1, 60), st.integers(1, 12))
def test_pair_count_closed_form(n, k):
    pairs = extract_skipgrams([list(range(n))], k)
    assert len(pairs) == brute_pair_count(n, k) == skipgram_count(n, k)
    if n > k:
        assert len(pairs) == 2 * (k * n - k * (k + 1) // 2)


@given(st.lists(st.lists(st.integers(0, 9), min_size=1, max_size=12), min_size=1, max_size=6), st.integers(1, 4))
def test_pairs_within_window(walks, k):
    pairs = extract_skipgrams(walks, k)
    expected = [(w[i], w[j]) for w in walks for i in range(len(w)) for j in range(len(w))
                if i != j and abs(i - j) <= k]
    assert [tuple(p) for p in pairs] == expected
