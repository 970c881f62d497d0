from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import chain_net, close, independent_net, two_var_net, walk_tree
from mbsearch.elimination import elim_mpe
from mbsearch.generators import random_network
from mbsearch.network import NEG_INF, BeliefNetwork, Evidence, Factor
from mbsearch.oracle import brute_force_mpe, exact_extension_value
from mbsearch.ordering import Ordering, min_degree_ordering, moralize
from mbsearch.search import SearchConfig, Status, bbmb, bfmb, preprocess, verify_optimal

SEARCHES = [bbmb, bfmb]


def _evidence(net, seed, k):
    rng = np.random.default_rng(seed + 7)
    vs = rng.choice(net.n, size=min(k, net.n), replace=False)
    return Evidence(tuple((int(v), int(rng.integers(net.domains[v]))) for v in vs))


@pytest.mark.parametrize("search", SEARCHES)
class TestBothSearches:
    def test_single_variable(self, search):
        net = independent_net(1, p1=0.3)
        r = search(net, None, None, SearchConfig(i_bound=1))
        assert r.status is Status.OPTIMAL
        assert r.best_assignment == (0,)
        assert r.best_log_prob == pytest.approx(math.log(0.7))
        assert r.nodes_expanded <= 2

    def test_two_var(self, search):
        r = search(two_var_net(), None, None, SearchConfig(i_bound=1))
        assert r.best_assignment == (1, 1)
        assert r.best_log_prob == pytest.approx(math.log(0.54), abs=1e-12)
        assert verify_optimal(r, two_var_net())

    def test_deterministic_chain(self, search):
        net = chain_net(8, deterministic=True)
        r = search(net, None, None, SearchConfig(i_bound=2))
        assert r.status is Status.OPTIMAL and r.best_log_prob == 0.0
        assert verify_optimal(r, net)

    def test_zero_budget_returns_mb(self, search):
        net = random_network(10, seed=2)
        d = min_degree_ordering(moralize(net))
        pre = preprocess(net, d, None, 2)
        r = search(net, d, None, SearchConfig(i_bound=2, time_bound=0.0), pre=pre)
        assert r.status is Status.TIMEOUT
        assert r.best_assignment == pre.buckets.mb_assignment
        assert r.best_log_prob == pre.buckets.lower_bound
        assert not verify_optimal(r, net)

    def test_oracle_equivalence(self, search):
        for seed in range(40):
            net = random_network(6 + seed % 6, seed=seed, zero_prob=0.1)
            e = _evidence(net, seed, seed % 3)
            i = 1 + seed % net.n
            r = search(net, None, e, SearchConfig(i_bound=i))
            assert r.status is Status.OPTIMAL
            assert verify_optimal(r, net, e)
            assert r.best_log_prob <= r.upper_bound + 1e-9
            for v, x in e.pairs:
                assert r.best_assignment[v] == x

    def test_trace_monotone(self, search):
        net = random_network(12, seed=21)
        r = search(net, None, None, SearchConfig(i_bound=2, trace_interval=1e-6))
        times = [t for t, _ in r.anytime_trace]
        values = [v for _, v in r.anytime_trace]
        assert times == sorted(times) and values == sorted(values)
        assert values[-1] == r.best_log_prob

    def test_deterministic(self, search):
        net = random_network(12, seed=8)
        cfg = SearchConfig(i_bound=3, seed=4)
        r1, r2 = search(net, None, None, cfg), search(net, None, None, cfg)
        assert (r1.status, r1.best_assignment, r1.best_log_prob, r1.nodes_expanded) == (
            r2.status, r2.best_assignment, r2.best_log_prob, r2.nodes_expanded,
        )

    def test_all_zero_evidence(self, search):
        # evidence with probability zero: B=1 is impossible under A's prior
        net = BeliefNetwork(
            (2, 2),
            ((), (0,)),
            (
                Factor.from_probabilities((0,), (2,), [1.0, 0.0]),
                Factor.from_probabilities((0, 1), (2, 2), [1.0, 0.0, 0.5, 0.5]),
            ),
        )
        r = search(net, None, Evidence(((1, 1),)), SearchConfig(i_bound=2))
        assert r.best_log_prob == NEG_INF
        assert r.best_assignment[1] == 1


class TestBbmb:
    def test_pruned_children_cannot_beat_incumbent(self):
        # every node with f <= L* has no completion better than L*
        for seed in range(10):
            net = random_network(8, seed=seed)
            d = min_degree_ordering(moralize(net))
            pre = preprocess(net, d, None, 2)
            r = bbmb(net, d, None, SearchConfig(i_bound=2), pre=pre)
            L = r.best_log_prob

            def visit(parent, v, child, a):
                if child.log_f <= L:
                    assert exact_extension_value(net, None, a) <= L + 1e-9

            walk_tree(pre.tables, visit)

    def test_anytime_never_below_mb(self):
        net = random_network(12, seed=5)
        r = bbmb(net, None, None, SearchConfig(i_bound=1))
        assert r.best_log_prob >= r.mb_lower_bound


class TestBfmb:
    def test_memory_cap_one(self):
        r = bfmb(two_var_net(), Ordering((0, 1)), None, SearchConfig(i_bound=1, memory_cap=1))
        assert r.status is Status.MEMORY_OUT
        assert r.best_log_prob == r.mb_lower_bound

    def test_seed_changes_only_ties(self):
        net = random_network(10, seed=3)
        exact = brute_force_mpe(net)[0]
        for seed in range(5):
            r = bfmb(net, None, None, SearchConfig(i_bound=2, seed=seed))
            assert close(r.best_log_prob, exact)

    def test_dominance_mostly(self):
        wins = 0
        total = 50
        for seed in range(total):
            net = random_network(9, seed=1000 + seed)
            d = min_degree_ordering(moralize(net))
            pre = preprocess(net, d, None, 2)
            cfg = SearchConfig(i_bound=2)
            wins += bfmb(net, d, None, cfg, pre).nodes_expanded <= bbmb(net, d, None, cfg, pre).nodes_expanded
        assert wins >= 0.8 * total


class TestConfig:
    @pytest.mark.parametrize(
        "kw", [dict(i_bound=0), dict(time_bound=-1), dict(memory_cap=0), dict(trace_interval=0)]
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SearchConfig(**kw)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 10), st.integers(1, 10))
def test_searches_agree_with_elimination(seed, n, i):
    net = random_network(n, seed=seed, zero_prob=0.2)
    e = _evidence(net, seed, seed % 3)
    d = min_degree_ordering(moralize(net))
    exact, _ = elim_mpe(net, d, e)
    pre = preprocess(net, d, e, min(i, n))
    cfg = SearchConfig(i_bound=min(i, n))
    for search in SEARCHES:
        r = search(net, d, e, cfg, pre)
        assert r.status is Status.OPTIMAL
        assert close(r.best_log_prob, exact)
