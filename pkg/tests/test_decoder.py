import itertools

import numpy as np
import pytest

from pegemd.channel import ChannelSpec, llr_init, transmit
from pegemd.decoder import IraEncoder, bec_peel, encode, make_encoder, spa_decode, syndrome
from pegemd.graph import LAMBDA_DE8, TannerGraph
from pegemd.peg import MetricPipeline, peg_construct
from pegemd.stopping import is_stopping_set
from pegemd.structured import ira_init

from conftest import random_graph
from oracles import exact_posteriors, random_tree


@pytest.fixture(scope="module")
def code():
    g, _ = peg_construct(64, 32, LAMBDA_DE8, MetricPipeline.named("peg", 0))
    return g


def unrecoverable(g, erased):
    erased = sorted(erased)
    out = {v for v in erased if g.var_degree(v) == 0}
    for r in range(1, len(erased) + 1):
        for s in itertools.combinations(erased, r):
            if is_stopping_set(g, s):
                out |= set(s)
    return out


class TestEncode:
    def test_zero_message(self, code):
        enc = make_encoder(code)
        assert not encode(code, np.zeros(enc.k, dtype=np.uint8)).any()

    def test_ira_toy(self):
        g = ira_init(8, 4)
        g.add_edge(0, 1)
        g.add_edge(0, 2)
        enc = make_encoder(g)
        assert isinstance(enc, IraEncoder) and enc.k == 4
        # check sums s = (0,1,1,0); p3 = s3, p_j = s_j ^ p_{j+1}
        assert enc.encode(np.array([1, 0, 0, 0])).tolist() == [1, 0, 0, 0, 0, 0, 1, 0]

    def test_random_full_rank(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            g = random_graph(rng, 20, 10, 0.3)
            enc = make_encoder(g)
            msg = rng.integers(0, 2, (30, enc.k))
            cw = enc.encode(msg)
            assert not syndrome(g, cw).any()
            assert (cw[:, enc.info] == msg).all()

    def test_rank_deficient(self):
        # two identical rows: rank 1, so K = N - 1
        g = TannerGraph(4, 2, [(0, 0), (1, 0), (0, 1), (1, 1)])
        enc = make_encoder(g)
        assert enc.k == 3
        assert not syndrome(g, enc.encode(np.ones(3, dtype=np.uint8))).any()

    def test_explicit_info(self, code):
        enc = make_encoder(code)
        again = make_encoder(code, enc.info)
        assert (again.info == enc.info).all()


class TestSpa:
    def test_noiseless(self, code):
        enc = make_encoder(code)
        cw = enc.encode(np.random.default_rng(1).integers(0, 2, enc.k))
        res = spa_decode(code, np.where(cw == 1, -20.0, 20.0))
        assert res.converged and res.iterations_used <= 1
        assert (res.estimate == cw).all()

    def test_all_zero_llrs(self, code):
        res = spa_decode(code, np.zeros(64), max_iter=5)
        assert not res.converged
        assert res.iterations_used == 5
        assert not res.estimate.any()

    def test_exact_on_trees(self):
        rng = np.random.default_rng(2)
        for _ in range(12):
            g = random_tree(rng, int(rng.integers(2, 6)))
            if g.n_var > 15:
                continue
            llr = rng.normal(0.5, 1.5, g.n_var)
            res = spa_decode(g, llr, max_iter=2 * g.n_var, early_stop=False)
            np.testing.assert_allclose(res.posterior, exact_posteriors(g, llr), atol=1e-8)

    def test_converged_satisfies_checks(self, code):
        enc = make_encoder(code)
        rng = np.random.default_rng(3)
        cw = enc.encode(rng.integers(0, 2, (400, enc.k)))
        spec = ChannelSpec.awgn(snr_db=1.5)
        res = spa_decode(code, llr_init(transmit(cw, spec, rng, rate=0.5), spec))
        assert res.converged.any() and not res.converged.all()
        assert not syndrome(code, res.estimate[res.converged]).any()

    def test_history(self, code):
        rng = np.random.default_rng(4)
        spec = ChannelSpec.awgn(snr_db=2.0)
        llr = llr_init(transmit(np.zeros((50, 64)), spec, rng, rate=0.5), spec)
        res = spa_decode(code, llr, max_iter=15, history=True)
        assert res.history.shape == (50, 16, 64)
        np.testing.assert_array_equal(res.history[:, -1], res.estimate)
        for cap in (1, 4, 9):
            short = spa_decode(code, llr, max_iter=cap)
            np.testing.assert_array_equal(res.history[:, cap], short.estimate)

    def test_errors(self, code):
        with pytest.raises(ValueError):
            spa_decode(code, np.zeros(64), max_iter=0)
        with pytest.raises(ValueError):
            spa_decode(code, np.zeros(63))

    def test_bec_equivalence_with_peeling(self, code):
        enc = make_encoder(code)
        rng = np.random.default_rng(5)
        for _ in range(60):
            cw = enc.encode(rng.integers(0, 2, enc.k))
            erased = rng.random(64) < 0.4
            llr = np.where(erased, 0.0, np.where(cw == 1, -100.0, 100.0))
            res = spa_decode(code, llr, max_iter=64)
            _, residual = bec_peel(code, np.flatnonzero(erased))
            decided = res.posterior != 0
            assert set(np.flatnonzero(~decided).tolist()) == residual
            assert (res.estimate[decided] == cw[decided]).all()
            assert bool(res.converged) == (not residual)


class TestPeel:
    def test_closed_ring(self, ring):
        rec, res = bec_peel(ring, {0, 1, 2, 3})
        assert res == {0, 1, 2, 3} and not rec
        assert bec_peel(ring, set()) == (set(), set())

    def test_exhaustive_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(60):
            g = random_graph(rng, 14, 9, 0.2)
            erased = set(np.flatnonzero(rng.random(14) < 0.5).tolist())
            rec, res = bec_peel(g, erased)
            assert res == unrecoverable(g, erased)
            assert rec | res == erased and not rec & res
            core = {v for v in res if g.var_degree(v)}
            if core:
                assert is_stopping_set(g, core)


def test_all_zero_symmetry(code):
    """FER with the all-zero word matches FER with random messages."""
    enc = make_encoder(code)
    spec = ChannelSpec.awgn(snr_db=2.0)
    fers = []
    for seed, zero in ((10, True), (11, False)):
        rng = np.random.default_rng(seed)
        n = 10_000
        msg = np.zeros((n, enc.k), dtype=np.uint8) if zero else rng.integers(0, 2, (n, enc.k))
        cw = enc.encode(msg)
        res = spa_decode(code, llr_init(transmit(cw, spec, rng, rate=0.5), spec))
        fers.append(((res.estimate != cw).any(axis=1).mean(), n))
    (p0, n0), (p1, n1) = fers
    se = np.sqrt(p0 * (1 - p0) / n0 + p1 * (1 - p1) / n1)
    assert 0.005 < p0 < 0.5
    assert abs(p0 - p1) <= 3 * se
