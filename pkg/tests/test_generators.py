from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbsearch.generators import (
    CodingSpec,
    NoisyOrSpec,
    bit_error_rate,
    gen_coding,
    gen_noisy_or,
    noisy_or_cpt,
    random_network,
)
from mbsearch.network import factor_value, serialize_evidence, serialize_network


class TestCoding:
    def test_smallest_code_copies_bit(self):
        inst = gen_coding(CodingSpec(1, 1, 0.3, seed=0))
        net = inst.network
        assert net.n == 2 and net.parents[1] == (0,)
        assert math.exp(factor_value(net.cpts[1], [1, 1])) == 1.0
        assert math.exp(factor_value(net.cpts[1], [0, 1])) == 0.0

    def test_table1_shape(self):
        inst = gen_coding(CodingSpec(50, 4, 0.22, seed=0))
        assert inst.network.n == 100
        assert all(len(ps) == 4 for ps in inst.network.parents[50:])
        assert all(ps == () for ps in inst.network.parents[:50])
        assert len(inst.network.likelihoods) == 100

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 30), st.floats(0.0, 1.0))
    def test_parity_holds(self, seed, K, sigma):
        P = 1 + seed % min(K, 4)
        inst = gen_coding(CodingSpec(K, P, sigma, seed=seed))
        for j, ps in enumerate(inst.parity_parents):
            assert len(set(ps)) == P
            assert sum(inst.codeword[p] for p in ps) % 2 == inst.codeword[K + j]
        assert inst.codeword[:K] == inst.true_input

    def test_unaries_normalized(self):
        inst = gen_coding(CodingSpec(10, 3, 0.5, seed=1))
        for f in inst.network.likelihoods:
            assert np.exp(f.log_values).sum() == pytest.approx(1.0, abs=1e-12)

    def test_unary_matches_gaussian(self):
        sigma = 0.7
        inst = gen_coding(CodingSpec(10, 3, sigma, seed=8))
        for f, y in zip(inst.network.likelihoods, inst.observed):
            dens = np.array([math.exp(-((y - b) ** 2) / (2 * sigma**2)) for b in (0, 1)])
            assert np.allclose(np.exp(f.log_values), dens / dens.sum(), atol=1e-12, rtol=0)

    def test_unary_favours_nearer_bit(self):
        inst = gen_coding(CodingSpec(10, 3, 0.5, seed=1))
        for f, y in zip(inst.network.likelihoods, inst.observed):
            if y != 0.5:
                assert (f.log_values[1] > f.log_values[0]) == (y > 0.5)

    def test_zero_sigma_is_hard_evidence(self):
        inst = gen_coding(CodingSpec(5, 2, 0.0, seed=3))
        for f, b in zip(inst.network.likelihoods, inst.codeword):
            assert f.log_values[b] == 0.0 and f.log_values[1 - b] == -math.inf

    def test_deterministic(self):
        a = gen_coding(CodingSpec(20, 4, 0.3, seed=5))
        b = gen_coding(CodingSpec(20, 4, 0.3, seed=5))
        assert serialize_network(a.network) == serialize_network(b.network)
        assert a.observed == b.observed

    def test_sim_seed_keeps_structure(self):
        a = gen_coding(CodingSpec(20, 4, 0.3, seed=5, sim_seed=1))
        b = gen_coding(CodingSpec(20, 4, 0.3, seed=5, sim_seed=2))
        assert a.parity_parents == b.parity_parents
        assert a.observed != b.observed

    def test_truth_text(self):
        inst = gen_coding(CodingSpec(4, 2, 0.3))
        assert inst.truth_text().split() == [str(b) for b in inst.true_input]

    @pytest.mark.parametrize("kw", [dict(K=2, P=3, sigma=0.1), dict(K=2, P=1, sigma=-1.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            CodingSpec(**kw)


class TestNoisyOr:
    def test_formula_two_active_parents(self):
        f = noisy_or_cpt((0, 1), 2, 0.2, 0.01)
        assert math.exp(factor_value(f, [1, 1, 0])) == pytest.approx(0.0004, abs=1e-15)
        assert math.exp(factor_value(f, [1, 1, 1])) == pytest.approx(0.9996, abs=1e-15)
        assert math.exp(factor_value(f, [0, 0, 0])) == pytest.approx(0.01, abs=1e-15)

    def test_no_children_is_uniform(self):
        net, e = gen_noisy_or(NoisyOrSpec(10, 0, 2, n_evidence=3, seed=1))
        assert all(ps == () for ps in net.parents)
        assert len(e) == 3

    def test_table5_shape(self):
        net, e = gen_noisy_or(NoisyOrSpec(128, 85, 4, seed=0))
        assert net.n == 128
        kids = [v for v in range(128) if net.parents[v]]
        assert len(kids) == 85
        assert all(len(net.parents[v]) == 4 and max(net.parents[v]) < v for v in kids)
        assert len(e) == 10 and len({v for v, _ in e.pairs}) == 10

    def test_rows_sum_to_one(self):
        net, _ = gen_noisy_or(NoisyOrSpec(40, 25, 3, seed=2))
        for f in net.cpts:
            rows = np.exp(f.log_values).reshape(-1, 2).sum(axis=1)
            assert np.all(np.abs(rows - 1.0) <= 1e-12)

    def test_deterministic(self):
        a = gen_noisy_or(NoisyOrSpec(30, 20, 3, seed=9))
        b = gen_noisy_or(NoisyOrSpec(30, 20, 3, seed=9))
        assert serialize_network(a[0]) == serialize_network(b[0])
        assert serialize_evidence(a[1]) == serialize_evidence(b[1])

    def test_too_few_candidates(self):
        with pytest.raises(ValueError):
            gen_noisy_or(NoisyOrSpec(5, 4, 3))

    @pytest.mark.parametrize(
        "kw", [dict(N=4, C=5, P=1), dict(N=4, C=1, P=4), dict(N=4, C=1, P=1, p_noise=1.5)]
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            NoisyOrSpec(**kw)


class TestBitErrorRate:
    def test_identical(self):
        assert bit_error_rate([0, 1, 1], [0, 1, 1]) == 0.0

    def test_all_flipped(self):
        assert bit_error_rate([1, 0, 0], [0, 1, 1]) == 1.0

    def test_one_in_fifty(self):
        truth = [0] * 50
        assert bit_error_rate([1] + [0] * 49, truth) == 0.02

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            bit_error_rate([0, 1], [0])


def test_random_network_deterministic():
    assert serialize_network(random_network(10, seed=4)) == serialize_network(random_network(10, seed=4))
