"""Mini-bucket evaluation function ``f = g * H`` over ordered partial assignments.

``g`` accumulates the input functions of the instantiated buckets and
``H`` the generated functions that crossed from later buckets into
earlier ones.  Both are updated incrementally when the next variable in
the ordering is assigned, so scoring a child costs a handful of table
lookups.  Everything is in log-space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .elimination import AugmentedBuckets, GeneratedFunction
from .network import NEG_INF, Factor


class _Probe:
    """Fast lookup of a factor whose other scope variables are already assigned."""

    __slots__ = ("values", "others", "stride")

    def __init__(self, f: Factor, var: int | None):
        self.values = f.log_values.tolist()
        self.others = tuple((v, s) for v, s in zip(f.scope, f.strides) if v != var)
        self.stride = 0
        for v, s in zip(f.scope, f.strides):
            if v == var:
                self.stride = s


class NodeScore(NamedTuple):
    """Immutable ``(depth, log g, log H)``; a tuple so search nodes stay cheap."""

    depth: int
    log_g: float
    log_H: float

    @property
    def log_f(self) -> float:
        return self.log_g + self.log_H


ROOT = NodeScore(0, 0.0, 0.0)


@dataclass(frozen=True, eq=False)
class HeuristicTables:
    """Per-position function lists read by the incremental update.

    ``cpts_here[p]``: input functions placed in bucket ``p``.
    ``h_into[p]``: generated functions residing in bucket ``p``.
    ``h_outof[p]``: functions produced by bucket ``p``.
    """

    order: tuple[int, ...]
    domains: tuple[int, ...]
    evidence: dict
    cpts_here: tuple[tuple[Factor, ...], ...]
    h_into: tuple[tuple[GeneratedFunction, ...], ...]
    h_outof: tuple[tuple[GeneratedFunction, ...], ...]
    log_constants: float
    upper_bound: float
    _g_probes: tuple = ()
    _h_probes: tuple = ()
    _out_probes: tuple = ()

    @property
    def n(self) -> int:
        return len(self.order)

    def legal_values(self, depth: int) -> range | tuple[int]:
        x = self.order[depth]
        if x in self.evidence:
            return (self.evidence[x],)
        return range(self.domains[x])


def build_tables(ab: AugmentedBuckets) -> HeuristicTables:
    order = ab.ordering.order
    cpts_here = tuple(tuple(b.original_factors) for b in ab.buckets)
    h_into = tuple(tuple(b.generated_functions) for b in ab.buckets)
    h_outof = tuple(tuple(b.outgoing) for b in ab.buckets)
    g_probes = tuple(
        tuple(_Probe(f, order[p]) for f in fs) for p, fs in enumerate(cpts_here)
    )
    h_probes = tuple(
        tuple(_Probe(g.factor, order[p]) for g in gs) for p, gs in enumerate(h_into)
    )
    out_probes = tuple(
        tuple(_Probe(g.factor, None) for g in gs if g.factor.scope)
        for gs in h_outof
    )
    # scope-empty outgoing functions are constants: fold them per position
    out_const = [0.0] * len(order)
    for p, gs in enumerate(h_outof):
        for g in gs:
            if not g.factor.scope:
                out_const[p] += float(g.factor.log_values[0])
    log_constants = float(sum(float(g.factor.log_values[0]) for g in ab.constants))
    t = HeuristicTables(
        order=tuple(order),
        domains=ab.network.domains,
        evidence=ab.evidence.as_dict(),
        cpts_here=cpts_here,
        h_into=h_into,
        h_outof=h_outof,
        log_constants=log_constants,
        upper_bound=ab.upper_bound,
        _g_probes=g_probes,
        _h_probes=h_probes,
        _out_probes=tuple(zip(out_probes, out_const)),
    )
    return t


def child_scores(
    t: HeuristicTables, s: NodeScore, a: Sequence[int], values: Iterable[int] | None = None
) -> list[tuple[int, NodeScore]]:
    """Scores of assigning each of ``values`` to the next variable.

    ``a`` must assign the first ``s.depth`` variables of the ordering.
    """
    p = s.depth
    if values is None:
        values = t.legal_values(p)
    last = p + 1 == t.n
    base_H = t.log_constants if p == 0 else s.log_H

    probes, const = t._out_probes[p]
    dead = const == NEG_INF
    out = const
    if not dead:
        for pr in probes:
            idx = 0
            for u, st in pr.others:
                idx += a[u] * st
            val = pr.values[idx]
            if val == NEG_INF:
                dead = True
                break
            out += val

    g_terms = []
    for pr in t._g_probes[p]:
        idx = 0
        for u, st in pr.others:
            idx += a[u] * st
        g_terms.append((pr.values, idx, pr.stride))
    h_terms = []
    for pr in t._h_probes[p]:
        idx = 0
        for u, st in pr.others:
            idx += a[u] * st
        h_terms.append((pr.values, idx, pr.stride))
    children = []
    for v in values:
        log_g = s.log_g
        for vals, b, st in g_terms:
            log_g += vals[b + st * v]
        if dead:
            log_H = NEG_INF
        else:
            log_H = base_H
            for vals, b, st in h_terms:
                log_H += vals[b + st * v]
            if log_H != NEG_INF:
                log_H -= out
                if last:
                    log_H = 0.0
        children.append((v, NodeScore(p + 1, log_g, log_H)))
    return children


def extend_score(t: HeuristicTables, s: NodeScore, v: int, a: Sequence[int]) -> NodeScore:
    """Score of ``(x^p, v)`` from the score of ``x^p``."""
    return child_scores(t, s, a, (v,))[0][1]


def batch_score(t: HeuristicTables, a: Sequence[int], depth: int) -> NodeScore:
    """Evaluate ``g`` and ``H`` from scratch over the first ``depth`` buckets."""
    if depth == 0:
        return ROOT
    from .network import factor_value

    log_g = 0.0
    for p in range(depth):
        for f in t.cpts_here[p]:
            log_g += factor_value(f, a)
    log_H = 0.0
    if depth < t.n:
        for p in range(depth):
            for g in t.h_into[p]:
                if g.origin >= depth:
                    log_H += factor_value(g.factor, a)
        for p in range(depth, t.n):
            for g in t.h_outof[p]:
                if not g.factor.scope:
                    log_H += float(g.factor.log_values[0])
    return NodeScore(depth, log_g, log_H)
