"""Seeded random instances: linear block codes, noisy-OR networks, random DAGs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .network import BeliefNetwork, Evidence, Factor


@dataclass(frozen=True)
class CodingSpec:
    """Rate-1/2 code: ``K`` information bits, ``K`` parity bits of ``P`` parents.

    ``seed`` fixes the code structure; ``sim_seed`` (defaulting to
    ``seed``) fixes the transmitted word and channel noise, so one
    structure can be simulated with several input vectors.
    """

    K: int
    P: int
    sigma: float
    seed: int = 0
    sim_seed: int | None = None

    def __post_init__(self):
        if not self.K >= self.P >= 1:
            raise ValueError("need K >= P >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True, eq=False)
class CodingInstance:
    network: BeliefNetwork
    true_input: tuple[int, ...]
    codeword: tuple[int, ...]
    observed: tuple[float, ...]
    parity_parents: tuple[tuple[int, ...], ...]

    @property
    def K(self) -> int:
        return len(self.true_input)

    def truth_text(self) -> str:
        return " ".join(map(str, self.true_input)) + "\n"


def _xor_cpt(parents: Sequence[int], child: int) -> Factor:
    k = len(parents)
    probs = np.zeros((2,) * k + (2,))
    for idx in np.ndindex(*(2,) * k):
        probs[idx + (sum(idx) % 2,)] = 1.0
    return Factor.from_probabilities(tuple(parents) + (child,), (2,) * (k + 1), probs.reshape(-1))


def _channel_factor(var: int, y: float, sigma: float) -> Factor:
    if sigma == 0:
        bit = int(round(y))
        return Factor.from_probabilities((var,), (2,), [1.0 - bit, float(bit)])
    # log-odds of bit 1 over bit 0; overflows to +-inf cleanly for tiny sigma
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        z = np.float64(2.0 * y - 1.0) / (2.0 * np.float64(sigma) ** 2)
    if np.isnan(z):
        z = 0.0
    return Factor((var,), (2,), np.array([-np.logaddexp(0.0, z), -np.logaddexp(0.0, -z)]))


def gen_coding(spec: CodingSpec) -> CodingInstance:
    """Coding network over ``2K`` bits with channel outputs absorbed as unaries.

    Variables ``0..K-1`` are information bits (uniform priors); ``K+j``
    is the j-th parity bit, a deterministic XOR of ``P`` distinct
    information bits.  Each bit gets a normalized Gaussian likelihood
    factor for its observed output ``y = bit + N(0, sigma^2)``.
    """
    K, P, sigma = spec.K, spec.P, spec.sigma
    structure = np.random.default_rng([spec.seed, 0])
    sim = np.random.default_rng([spec.seed if spec.sim_seed is None else spec.sim_seed, 1])

    parity_parents = tuple(
        tuple(sorted(int(u) for u in structure.choice(K, size=P, replace=False)))
        for _ in range(K)
    )
    u = sim.integers(0, 2, size=K)
    x = np.array([int(u[list(ps)].sum() % 2) for ps in parity_parents], dtype=np.int64)
    codeword = np.concatenate([u, x])
    y = codeword + sigma * sim.standard_normal(2 * K)

    uniform = Factor.from_probabilities
    cpts = [uniform((i,), (2,), [0.5, 0.5]) for i in range(K)]
    cpts += [_xor_cpt(ps, K + j) for j, ps in enumerate(parity_parents)]
    parents = [()] * K + list(parity_parents)
    likelihoods = [_channel_factor(b, float(y[b]), sigma) for b in range(2 * K)]
    net = BeliefNetwork((2,) * (2 * K), tuple(parents), tuple(cpts), tuple(likelihoods))
    return CodingInstance(
        network=net,
        true_input=tuple(int(b) for b in u),
        codeword=tuple(int(b) for b in codeword),
        observed=tuple(float(v) for v in y),
        parity_parents=parity_parents,
    )


@dataclass(frozen=True)
class NoisyOrSpec:
    N: int
    C: int
    P: int
    p_noise: float = 0.2
    p_leak: float = 0.01
    n_evidence: int = 10
    seed: int = 0
    K: int = 2

    def __post_init__(self):
        if self.K != 2:
            raise ValueError("noisy-OR variables are binary")
        if not 0 <= self.C <= self.N or not 0 <= self.P < max(self.N, 1):
            raise ValueError("need C <= N and P < N")
        if not (0 <= self.p_noise <= 1 and 0 <= self.p_leak <= 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if not 0 <= self.n_evidence <= self.N:
            raise ValueError("n_evidence must lie in [0, N]")


def noisy_or_cpt(parents: Sequence[int], child: int, p_noise: float, p_leak: float) -> Factor:
    """``P(child=0 | y) = p_leak * p_noise ** (number of active parents)``."""
    k = len(parents)
    rows = []
    for idx in np.ndindex(*(2,) * k):
        p0 = p_leak * p_noise ** sum(idx)
        rows.append((p0, 1.0 - p0))
    return Factor.from_probabilities(
        tuple(parents) + (child,), (2,) * (k + 1), np.array(rows).reshape(-1)
    )


def gen_noisy_or(spec: NoisyOrSpec) -> tuple[BeliefNetwork, Evidence]:
    """Random noisy-OR network with parents drawn from preceding indices."""
    N, C, P = spec.N, spec.C, spec.P
    rng = np.random.default_rng(spec.seed)
    candidates = np.arange(P, N)
    if C > candidates.size:
        raise ValueError(f"only {candidates.size} variables have {P} predecessors, need {C}")
    children = sorted(int(c) for c in rng.choice(candidates, size=C, replace=False))
    parents: list[tuple[int, ...]] = [()] * N
    cpts = [Factor.from_probabilities((i,), (2,), [0.5, 0.5]) for i in range(N)]
    for c in children:
        ps = tuple(sorted(int(p) for p in rng.choice(c, size=P, replace=False)))
        parents[c] = ps
        cpts[c] = noisy_or_cpt(ps, c, spec.p_noise, spec.p_leak)
    net = BeliefNetwork((2,) * N, tuple(parents), tuple(cpts))
    ev_vars = sorted(int(v) for v in rng.choice(N, size=spec.n_evidence, replace=False))
    ev_vals = rng.integers(0, 2, size=len(ev_vars))
    return net, Evidence(tuple(zip(ev_vars, (int(x) for x in ev_vals))))


def bit_error_rate(decoded: Sequence[int], truth: Sequence[int]) -> float:
    if len(decoded) != len(truth):
        raise ValueError(f"length mismatch: {len(decoded)} decoded vs {len(truth)} true bits")
    if not truth:
        return 0.0
    return sum(int(a) != int(b) for a, b in zip(decoded, truth)) / len(truth)


def random_network(
    n: int,
    max_domain: int = 3,
    max_parents: int = 3,
    seed: int = 0,
    min_domain: int = 2,
    zero_prob: float = 0.0,
) -> BeliefNetwork:
    """Random DAG with random CPTs; index order is shuffled against topology.

    ``zero_prob`` is the chance that a CPT entry is forced to zero (one
    entry per row always stays positive).
    """
    rng = np.random.default_rng(seed)
    domains = [int(d) for d in rng.integers(min_domain, max_domain + 1, size=n)]
    topo = [int(v) for v in rng.permutation(n)]
    parents: list[tuple[int, ...]] = [()] * n
    cpts: list[Factor | None] = [None] * n
    for k, v in enumerate(topo):
        m = int(rng.integers(0, min(max_parents, k) + 1))
        ps = tuple(int(p) for p in rng.choice(topo[:k], size=m, replace=False)) if m else ()
        parents[v] = ps
        scope = ps + (v,)
        cards = tuple(domains[u] for u in scope)
        rows = rng.random((math.prod(cards[:-1]), domains[v])) + 0.05
        if zero_prob > 0:
            mask = rng.random(rows.shape) < zero_prob
            keep = rng.integers(0, domains[v], size=rows.shape[0])
            mask[np.arange(rows.shape[0]), keep] = False
            rows[mask] = 0.0
        rows /= rows.sum(axis=1, keepdims=True)
        cpts[v] = Factor.from_probabilities(scope, cards, rows.reshape(-1))
    return BeliefNetwork(tuple(domains), tuple(parents), tuple(cpts))
