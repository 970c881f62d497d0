"""Bucket elimination for MPE and its mini-bucket approximation MB(i).

Buckets are indexed by *position* in the ordering: bucket ``p`` belongs to
variable ``ordering.order[p]``.  The backward pass runs from the last
position to the first; generated functions land in the bucket of their
latest scope variable, and scope-empty ones fold into a scalar bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import (
    NEG_INF,
    UNASSIGNED,
    BeliefNetwork,
    Evidence,
    Factor,
    combine,
    joint_log_probability,
    product_scope,
    restrict,
)
from .ordering import Ordering

DEFAULT_MEMORY_CAP = 1 << 24  # table entries per generated function


class MemoryLimitError(MemoryError):
    """A bucket would need a table larger than the configured cap."""

    def __init__(self, scope_size: int, entries: int, cap: int):
        self.scope_size = scope_size
        self.entries = entries
        super().__init__(
            f"function over {scope_size} variables needs {entries} entries "
            f"(cap {cap})"
        )


@dataclass(frozen=True, eq=False)
class GeneratedFunction:
    factor: Factor
    origin: int  # position of the bucket that produced it
    minibucket: int


@dataclass(eq=False)
class Bucket:
    variable: int
    position: int
    original_factors: list[Factor] = field(default_factory=list)
    generated_functions: list[GeneratedFunction] = field(default_factory=list)
    # functions produced by this bucket's mini-buckets (or evidence slices)
    outgoing: list[GeneratedFunction] = field(default_factory=list)
    minibuckets: list[list[Factor]] = field(default_factory=list)

    def functions(self) -> list[Factor]:
        return self.original_factors + [g.factor for g in self.generated_functions]


@dataclass(frozen=True, eq=False)
class AugmentedBuckets:
    network: BeliefNetwork
    ordering: Ordering
    evidence: Evidence
    buckets: tuple[Bucket, ...]
    i_bound: int
    constants: tuple[GeneratedFunction, ...]
    upper_bound: float
    mb_assignment: tuple[int, ...]
    lower_bound: float

    def all_generated(self) -> list[GeneratedFunction]:
        out = list(self.constants)
        for b in self.buckets:
            out.extend(b.generated_functions)
        return out


def place_factors(net: BeliefNetwork, d: Ordering, e: Evidence | None = None) -> list[Bucket]:
    """Put every network function in the bucket of its latest scope variable.

    Evidence is not applied here; the backward pass slices evidence
    buckets when it reaches them.
    """
    if e is not None:
        e.check(net.domains)
    pos = d.position
    buckets = [Bucket(variable=v, position=k) for k, v in enumerate(d.order)]
    for f in net.factors:
        if not f.scope:
            raise ValueError("network functions must have a nonempty scope")
        buckets[max(pos[v] for v in f.scope)].original_factors.append(f)
    return buckets


def partition_bucket(factors: Sequence[Factor], bucket_var: int, i: int) -> list[list[Factor]]:
    """Greedy first-fit i-partitioning, largest scopes first.

    A mini-bucket accepts a factor when the union of scopes stays within
    ``i`` variables.  Factors wider than ``i`` end up alone.
    """
    if i < 1:
        raise ValueError("i-bound must be >= 1")
    ranked = sorted(factors, key=lambda f: -len(f.scope))
    parts: list[list[Factor]] = []
    unions: list[set[int]] = []
    for f in ranked:
        fs = set(f.scope) | {bucket_var}
        for part, u in zip(parts, unions):
            if len(u | fs) <= i:
                part.append(f)
                u |= fs
                break
        else:
            parts.append([f])
            unions.append(fs)
    return parts


def _check_size(factors: Sequence[Factor], cap: int | None):
    if cap is None:
        return
    _, cards = product_scope(factors)
    entries = math.prod(cards)
    if entries > cap:
        raise MemoryLimitError(len(cards), entries, cap)


def _best_value(funcs: Sequence[Factor], var: int, card: int, a: Sequence[int]) -> int:
    total = np.zeros(card)
    for f in funcs:
        base = 0
        stride = 0
        for v, s in zip(f.scope, f.strides):
            if v == var:
                stride = s
            else:
                base += a[v] * s
        total += f.log_values[base + stride * np.arange(card)]
    return int(np.argmax(total))


def approx_mpe(
    net: BeliefNetwork,
    d: Ordering,
    e: Evidence | None = None,
    i: int = 2,
    memory_cap: int | None = DEFAULT_MEMORY_CAP,
) -> AugmentedBuckets:
    """Run MB(i): backward mini-bucket pass, then greedy forward assignment.

    ``i`` counts the variables of a mini-bucket including the bucket
    variable.  Returns the augmented buckets with the upper bound and the
    forward-pass assignment whose joint probability is the lower bound.
    """
    if i < 1:
        raise ValueError("i-bound must be >= 1")
    e = e or Evidence()
    ev = e.as_dict()
    buckets = place_factors(net, d, e)
    pos = d.position
    constants: list[GeneratedFunction] = []

    def emit(h: Factor, origin: int, mb: int):
        g = GeneratedFunction(h, origin, mb)
        buckets[origin].outgoing.append(g)
        if h.scope:
            buckets[max(pos[v] for v in h.scope)].generated_functions.append(g)
        else:
            constants.append(g)

    for p in range(net.n - 1, -1, -1):
        b = buckets[p]
        x = b.variable
        funcs = b.functions()
        if not funcs:
            continue
        if x in ev:
            b.minibuckets = [[f] for f in funcs]
            for j, f in enumerate(funcs):
                emit(restrict(f, x, ev[x]), p, j)
        else:
            b.minibuckets = partition_bucket(funcs, x, i)
            for j, part in enumerate(b.minibuckets):
                _check_size(part, memory_cap)
                emit(combine(part, x), p, j)

    upper = float(sum(g.factor.log_values[0] for g in constants))
    if math.isnan(upper):
        upper = NEG_INF

    a = [UNASSIGNED] * net.n
    for b in buckets:
        x = b.variable
        if x in ev:
            a[x] = ev[x]
        else:
            a[x] = _best_value(b.functions(), x, net.domains[x], a)
    lower = joint_log_probability(net, a, e)

    return AugmentedBuckets(
        network=net,
        ordering=d,
        evidence=e,
        buckets=tuple(buckets),
        i_bound=i,
        constants=tuple(constants),
        upper_bound=upper,
        mb_assignment=tuple(a),
        lower_bound=lower,
    )


def elim_mpe(
    net: BeliefNetwork,
    d: Ordering,
    e: Evidence | None = None,
    memory_cap: int | None = DEFAULT_MEMORY_CAP,
) -> tuple[float, tuple[int, ...]]:
    """Exact MPE by full bucket elimination (MB with one mini-bucket per bucket)."""
    ab = approx_mpe(net, d, e, i=max(net.n, 1), memory_cap=memory_cap)
    return ab.lower_bound, ab.mb_assignment
