from collections import deque

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pegemd.graph import LAMBDA_DE8, DegreeDistribution, GraphError, TannerGraph, check_rho_form, tree_expand

from conftest import graphs, random_graph


def bfs_oracle(g, root):
    """Plain BFS over an explicit node-pair adjacency."""
    adj = {("v", v): [("c", c) for c in g.var_adj[v]] for v in range(g.n_var)}
    adj.update({("c", c): [("v", v) for v in g.chk_adj[c]] for c in range(g.n_chk)})
    dist = {("v", root): 0}
    q = deque([("v", root)])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


class TestTannerGraph:
    def test_add_and_views(self):
        g = TannerGraph(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)])
        assert g.n_edges == 4
        assert g.var_adj == [[0], [0, 1], [1]]
        assert g.chk_adj == [[0, 1], [1, 2]]
        assert g.var_degrees.tolist() == [1, 2, 1]
        assert g.chk_degrees.tolist() == [2, 2]

    def test_parallel_edge_rejected(self):
        g = TannerGraph(2, 2, [(0, 0)])
        with pytest.raises(GraphError):
            g.add_edge(0, 0)

    @pytest.mark.parametrize("edge", [(2, 0), (0, 2), (-1, 0)])
    def test_out_of_range_rejected(self, edge):
        with pytest.raises(GraphError):
            TannerGraph(2, 2).add_edge(*edge)

    def test_remove_edge_keeps_order(self):
        g = TannerGraph(1, 4, [(0, 3), (0, 1), (0, 2)])
        g.remove_edge(0, 1)
        assert g.var_adj == [[3, 2]]
        with pytest.raises(GraphError):
            g.remove_edge(0, 1)

    def test_widening(self):
        g = TannerGraph(20, 20)
        for v in range(20):
            for c in range(20):
                g.add_edge(v, c)
        assert g.n_edges == 400
        assert (g.var_degrees == 20).all() and (g.chk_degrees == 20).all()

    @given(graphs())
    def test_invariants(self, g):
        assert g.var_degrees.sum() == g.chk_degrees.sum() == g.n_edges
        for v, row in enumerate(g.var_adj):
            for c in row:
                assert v in g.chk_adj[c]
        assert len(set(g.edges())) == g.n_edges
        assert TannerGraph.from_matrix(g.to_matrix()) == g

    def test_copy_is_independent(self):
        g = TannerGraph(2, 2, [(0, 0)])
        h = g.copy()
        h.add_edge(1, 1)
        assert g.n_edges == 1 and h.n_edges == 2

    def test_equality_ignores_insertion_order(self):
        assert TannerGraph(2, 2, [(0, 0), (0, 1)]) == TannerGraph(2, 2, [(0, 1), (0, 0)])
        assert TannerGraph(2, 2, [(0, 0)]) != TannerGraph(2, 3, [(0, 0)])


class TestDegreeDistribution:
    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            DegreeDistribution({2: 0.5, 3: 0.4})
        DegreeDistribution({2: 0.5, 3: 0.5 + 5e-10})

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            DegreeDistribution({2: 1.2, 3: -0.2})

    def test_node_fractions_of_reference_ensemble(self):
        # node share of degree d is (lambda_d / d) normalised
        w = {2: 0.30013 / 2, 3: 0.28395 / 3, 8: 0.41592 / 8}
        s = sum(w.values())
        frac = LAMBDA_DE8.node_fractions()
        for d in w:
            assert frac[d] == pytest.approx(w[d] / s, abs=1e-12)
        assert frac[2] == pytest.approx(0.50577, abs=5e-6)
        assert frac[3] == pytest.approx(0.31900, abs=1e-5)
        assert frac[8] == pytest.approx(0.17522, abs=5e-6)
        assert 1 / s == pytest.approx(3.37035, abs=1e-5)

    def test_node_counts_frozen(self):
        assert LAMBDA_DE8.node_counts(250) == {2: 126, 3: 80, 8: 44}
        assert LAMBDA_DE8.node_counts(250, max_degree2=124) == {2: 124, 3: 81, 8: 45}
        assert LAMBDA_DE8.node_counts(32, max_degree2=15) == {2: 15, 3: 11, 8: 6}

    @given(st.integers(1, 600), st.integers(0, 400))
    def test_node_counts_sum(self, n, cap):
        counts = LAMBDA_DE8.node_counts(n, max_degree2=cap)
        assert sum(counts.values()) == n
        assert counts.get(2, 0) <= cap

    def test_parse(self):
        d = DegreeDistribution.parse("2:0.30013, 3:0.28395, 8:0.41592")
        assert d.lambda_coeffs == pytest.approx(LAMBDA_DE8.lambda_coeffs)

    def test_restricted(self):
        r = LAMBDA_DE8.restricted(3)
        assert set(r.lambda_coeffs) == {3, 8}
        assert sum(r.lambda_coeffs.values()) == pytest.approx(1.0)

    def test_degree_sequence_sorted(self):
        seq = LAMBDA_DE8.degree_sequence(100)
        assert seq == sorted(seq) and len(seq) == 100

    def test_rho_form(self):
        g = TannerGraph(4, 2, [(0, 0), (1, 0), (2, 0), (3, 1), (2, 1)])
        a, b = check_rho_form(g)
        assert b == 2 and a == pytest.approx(3 / 5)


class TestTreeExpand:
    def test_two_candidate_levels(self, twocand):
        exp = tree_expand(twocand, 0)
        assert exp.var_levels[0] == {0}
        assert exp.var_levels[1] == {1, 2, 3}
        assert exp.var_levels[2] == {4, 5, 6}
        assert exp.chk_levels[0] == {0, 1}
        assert exp.termination == "complete"

    def test_edgeless(self):
        exp = tree_expand(TannerGraph(3, 4), 1)
        assert exp.covered_chk == set()
        assert exp.uncovered_chk == {0, 1, 2, 3}
        assert exp.termination == "saturated"
        assert exp.depth == -1

    def test_saturation_reported(self):
        g = TannerGraph(2, 3, [(0, 0), (1, 1)])
        exp = tree_expand(g, 0)
        assert exp.termination == "saturated"
        assert exp.uncovered_chk == {1, 2}

    def test_max_depth_reported(self):
        # chain v0-c0-v1-c1-v2-c2
        g = TannerGraph(3, 3, [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)])
        exp = tree_expand(g, 0, max_depth=1)
        assert exp.termination == "max_depth"
        assert exp.covered_chk == {0, 1}
        assert tree_expand(g, 0, max_depth=2).termination == "complete"

    def test_excluded_edge(self):
        g = TannerGraph(2, 2, [(0, 0), (1, 0), (1, 1), (0, 1)])
        exp = tree_expand(g, 0, excluded_edge=(0, 1))
        assert exp.chk_depth[1] == 1

    def test_bad_root(self):
        with pytest.raises(GraphError):
            tree_expand(TannerGraph(2, 2), 5)

    def test_depths_match_bfs_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            g = random_graph(rng, 20, 12, 0.12)
            root = int(rng.integers(20))
            exp = tree_expand(g, root)
            dist = bfs_oracle(g, root)
            for c in range(g.n_chk):
                want = (dist[("c", c)] - 1) // 2 if ("c", c) in dist else -1
                assert exp.chk_depth[c] == want

    @given(graphs(max_var=12, max_chk=10), st.data())
    def test_levels_disjoint_and_cover(self, g, data):
        root = data.draw(st.integers(0, g.n_var - 1))
        exp = tree_expand(g, root)
        seen = set()
        for lvl in exp.chk_levels:
            assert not (lvl & seen)
            seen |= lvl
        assert exp.covered_chk | exp.uncovered_chk == set(range(g.n_chk))
        assert not (exp.covered_chk & exp.uncovered_chk)
        for a, lvl in enumerate(exp.chk_levels):
            prev = exp.var_levels[a] if a < len(exp.var_levels) else set()
            reach = {c for v in prev for c in g.var_adj[v]}
            assert lvl == reach - set().union(*exp.chk_levels[:a])
