import numpy as np
import pytest

from pegemd.alist import read_alist, write_alist
from pegemd.cycles import count_cycles, induced_variable_subgraph
from pegemd.graph import LAMBDA_DE8, DegreeDistribution, TannerGraph
from pegemd.peg import MetricPipeline, peg_construct
from pegemd.structured import (
    IraConstraint,
    QcConstraint,
    Weight2Error,
    degree2_limit,
    enforce_weight2_constraint,
    ira_encode,
    ira_init,
    ira_peg_construct,
    is_ira,
    is_quasi_cyclic,
    qc_peg_construct,
    quantized_base_degrees,
    read_shift_csv,
)


def orbit_closed(g, q):
    """Exhaustive check: every edge's full rotation orbit is present."""
    for v, c in g.edges():
        t, i = divmod(v, q)
        r, j = divmod(c, q)
        for k in range(q):
            if not g.has_edge(t * q + (i + k) % q, r * q + (j + k) % q):
                return False
    return True


def degree2_acyclic(g):
    two = [v for v in range(g.n_var) if g.var_degree(v) == 2]
    return count_cycles(induced_variable_subgraph(g, two)).acyclic


class TestWeight2:
    def test_hand_count(self):
        # node share of degree 2 = (lambda_2/2) / sum(lambda_d/d)
        share = (0.30013 / 2) / (0.30013 / 2 + 0.28395 / 3 + 0.41592 / 8)
        assert round(250 * share) == 126
        assert LAMBDA_DE8.node_counts(250)[2] == 126

    def test_reference_ensemble_over_budget(self):
        with pytest.raises(Weight2Error) as e:
            enforce_weight2_constraint(LAMBDA_DE8, 125, n_var=250)
        assert (e.value.count, e.value.limit, e.value.excess) == (126, 124, 2)
        s = enforce_weight2_constraint(LAMBDA_DE8, 125, n_var=250, redistribute=True)
        assert s.n_degree2 == 124 and len(s.degrees) == 250

    def test_boundary(self):
        m = 10
        ok = enforce_weight2_constraint([2] * (m - 1) + [3] * 5, m)
        assert ok.n_degree2 == m - 1
        with pytest.raises(Weight2Error) as e:
            enforce_weight2_constraint([2] * m + [3] * 5, m)
        assert e.value.excess == 1
        assert degree2_limit(m) == m - 1

    def test_schedule_puts_degree2_first(self):
        s = enforce_weight2_constraint([3, 2, 8, 2, 3], 5)
        assert [s.degrees[v] for v in s.order] == [2, 2, 3, 3, 8]

    def test_distribution_needs_n_var(self):
        with pytest.raises(ValueError):
            enforce_weight2_constraint(LAMBDA_DE8, 125)

    def test_boundary_construction_is_acyclic(self):
        m = 12
        s = enforce_weight2_constraint([2] * (m - 1) + [3] * 13, m)
        for seed in range(3):
            g, _ = peg_construct(len(s.degrees), m, list(s.degrees), MetricPipeline.named("peg", seed), order=s.order)
            assert degree2_acyclic(g)

    @pytest.mark.parametrize("name", ["peg", "multipath-emd"])
    def test_degree2_subgraph_acyclic(self, name):
        for seed in range(2):
            g, _ = peg_construct(250, 125, LAMBDA_DE8, MetricPipeline.named(name, seed))
            assert degree2_acyclic(g)


class TestQc:
    def test_reference_shape(self):
        g, qc, _ = qc_peg_construct(256, 128, 8, LAMBDA_DE8, MetricPipeline.named("multipath-emd"))
        assert qc.shift_table.shape == (16, 32)
        assert orbit_closed(g, 8) and is_quasi_cyclic(g, 8)
        assert qc.expand() == g
        tiles = int((qc.shift_table >= 0).sum())
        assert g.n_edges == 8 * tiles
        assert sorted(set(g.var_degrees.tolist())) == [2, 3, 8]
        assert degree2_acyclic(g)

    def test_quantized_degrees(self):
        base = quantized_base_degrees(LAMBDA_DE8, 256, 128, 8)
        assert {d: base.count(d) for d in set(base)} == {2: 15, 3: 11, 8: 6}
        with pytest.raises(ValueError):
            quantized_base_degrees(LAMBDA_DE8, 64, 16, 8)

    def test_q1_is_plain(self):
        for name in ("peg", "multipath-emd", "ace-emd"):
            p = MetricPipeline.named(name, 4)
            g1, qc, _ = qc_peg_construct(64, 32, 1, LAMBDA_DE8, p)
            g0, _ = peg_construct(64, 32, LAMBDA_DE8, p)
            assert g1 == g0
            assert qc.expand() == g0

    def test_q2_manual_expansion(self):
        g, qc, _ = qc_peg_construct(12, 6, 2, DegreeDistribution({2: 0.4, 3: 0.6}), MetricPipeline.named("peg", 1))
        manual = np.zeros((6, 12), dtype=np.uint8)
        for r in range(3):
            for t in range(6):
                s = qc.shift_table[r, t]
                if s >= 0:
                    for k in range(2):
                        manual[2 * r + (k + s) % 2, 2 * t + k] = 1
        assert (g.to_matrix() == manual).all()

    def test_divisibility(self):
        with pytest.raises(ValueError):
            QcConstraint.for_graph(250, 125, 8)

    def test_orbit(self):
        qc = QcConstraint.for_graph(8, 4, 4)
        assert qc.orbit(1, 3) == [(0, 2), (1, 3), (2, 0), (3, 1)]
        assert (1, 3) not in qc.companions(None, 1, 3)

    def test_not_quasi_cyclic(self):
        assert not is_quasi_cyclic(TannerGraph(4, 2, [(0, 0)]), 2)
        assert not is_quasi_cyclic(TannerGraph(3, 2), 2)

    def test_shift_csv_round_trip(self):
        _, qc, _ = qc_peg_construct(64, 32, 4, LAMBDA_DE8, MetricPipeline.named("multipath-emd", 2))
        text = qc.shift_csv()
        assert text.startswith("base_row,base_col,shift\n")
        back = read_shift_csv(text, 4, qc.base_rows, qc.base_cols)
        assert (back.shift_table == qc.shift_table).all()

    def test_shift_csv_errors(self):
        with pytest.raises(ValueError):
            read_shift_csv("row,col,shift\n", 2, 1, 1)
        with pytest.raises(ValueError):
            read_shift_csv("base_row,base_col,shift\n0,0,2\n", 2, 1, 1)
        with pytest.raises(ValueError):
            read_shift_csv("base_row,base_col,shift\n0,0,1\n0,0,0\n", 2, 1, 1)


class TestIra:
    def test_m4_adjacency(self):
        g = ira_init(6, 4)
        assert [sorted(g.var_adj[2 + j]) for j in range(4)] == [[0], [0, 1], [1, 2], [2, 3]]
        assert g.var_degrees[:2].tolist() == [0, 0]

    @pytest.mark.parametrize("m", [1, 2, 5, 17])
    def test_edge_count(self, m):
        assert len(IraConstraint(m, 2 * m).accumulator_edges) == 2 * m - 1
        assert ira_init(2 * m, m).n_edges == 2 * m - 1

    def test_errors(self):
        with pytest.raises(ValueError):
            ira_init(10, 5, parity_count=4)
        with pytest.raises(ValueError):
            ira_init(4, 5)

    def test_reference_construction(self):
        g, _ = ira_peg_construct(250, 125, LAMBDA_DE8, MetricPipeline.named("multipath-emd"))
        assert is_ira(g)
        assert (g.var_degrees[:125] >= 3).all()
        assert int((g.var_degrees[125:] == 2).sum()) == 124
        assert degree2_acyclic(g)
        assert read_alist(write_alist(g)) == g

    def test_encoding_satisfies_checks(self):
        g, _ = ira_peg_construct(60, 30, LAMBDA_DE8, MetricPipeline.named("peg", 3))
        rng = np.random.default_rng(0)
        msg = rng.integers(0, 2, (50, 30)).astype(np.uint8)
        cw = ira_encode(g, msg)
        assert (cw[:, :30] == msg).all()
        assert not ((cw.astype(int) @ g.to_matrix().T.astype(int)) & 1).any()
        assert (ira_encode(g, msg[0]) == cw[0]).all()

    def test_encode_rejects(self):
        with pytest.raises(ValueError):
            ira_encode(TannerGraph(4, 2, [(0, 0)]), np.zeros(2))
        g = ira_init(6, 3)
        with pytest.raises(ValueError):
            ira_encode(g, np.zeros(4))
