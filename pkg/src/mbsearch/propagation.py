"""Loopy sum-product belief propagation over binary factor graphs.

Synchronous flooding schedule in log-space: every factor-to-variable
message is recomputed from the previous variable-to-factor messages, then
every variable-to-factor message from the new factor messages.  Each
message is normalized so its log-sum-exp is zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import NEG_INF, BeliefNetwork, Evidence, restrict

LOG_HALF = np.log(0.5)


@dataclass(frozen=True, eq=False)
class FactorGraph:
    """Bipartite graph of binary variables and (evidence-sliced) factors.

    ``factor_scopes[f]`` lists network variable indices; ``tables[f]`` is
    the log table with shape ``(2,) * len(scope)``.
    """

    n: int
    evidence: dict
    variables: tuple[int, ...]
    factor_scopes: tuple[tuple[int, ...], ...]
    tables: tuple[np.ndarray, ...]
    var_edges: tuple[tuple[tuple[int, int], ...], ...]  # per network variable

    @property
    def edge_count(self) -> int:
        return sum(len(s) for s in self.factor_scopes)

    def has_cycle(self) -> bool:
        # a connected bipartite graph is a tree iff edges = nodes - 1
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for f, scope in enumerate(self.factor_scopes):
            for v in scope:
                a, b = find(("f", f)), find(("v", v))
                if a == b:
                    return True
                parent[a] = b
        return False


@dataclass
class IbpResult:
    bit_decisions: tuple[int, ...]
    beliefs: np.ndarray  # (n, 2) normalized log beliefs
    iterations_run: int
    converged: bool
    max_message_norm_error: float = 0.0


def build_factor_graph(net: BeliefNetwork, e: Evidence | None = None) -> FactorGraph:
    if any(d != 2 for d in net.domains):
        raise ValueError("belief propagation here handles binary variables only")
    ev = e.as_dict() if e else {}
    scopes, tables = [], []
    for f in net.factors:
        g = f
        for v in f.scope:
            if v in ev:
                g = restrict(g, v, ev[v])
        if not g.scope:
            continue
        scopes.append(g.scope)
        tables.append(np.array(g.table, dtype=np.float64))
    edges = [[] for _ in range(net.n)]
    for fi, scope in enumerate(scopes):
        for pos, v in enumerate(scope):
            edges[v].append((fi, pos))
    variables = tuple(v for v in range(net.n) if v not in ev)
    return FactorGraph(
        n=net.n,
        evidence=ev,
        variables=variables,
        factor_scopes=tuple(scopes),
        tables=tuple(tables),
        var_edges=tuple(tuple(es) for es in edges),
    )


def _normalize(m: np.ndarray) -> np.ndarray:
    z = np.logaddexp(m[0], m[1])
    if z == NEG_INF:
        raise ValueError("all-zero message: evidence has probability zero")
    return m - z


def _delta(old: np.ndarray, new: np.ndarray) -> float:
    fo, fn = np.isfinite(old), np.isfinite(new)
    if np.any(fo != fn):
        return np.inf
    return float(np.abs(old[fo] - new[fo]).max(initial=0.0))


def _logsumexp(t: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    mx = t.max(axis=axes, keepdims=True)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        return (np.log(np.exp(t - mx).sum(axis=axes, keepdims=True)) + mx).reshape(-1)


def ibp(fg: FactorGraph, max_iterations: int = 30, tolerance: float = 1e-8) -> IbpResult:
    nf = len(fg.factor_scopes)
    # messages indexed [factor][position]
    to_var = [[np.full(2, LOG_HALF) for _ in s] for s in fg.factor_scopes]
    to_fac = [[np.full(2, LOG_HALF) for _ in s] for s in fg.factor_scopes]

    converged = False
    it = 0
    norm_err = 0.0
    for it in range(1, max_iterations + 1):
        delta = 0.0
        new_to_var = []
        for f in range(nf):
            table = fg.tables[f]
            k = table.ndim
            incoming = to_fac[f]
            msgs = []
            for j in range(k):
                total = table
                for i in range(k):
                    if i != j:
                        shape = [1] * k
                        shape[i] = 2
                        total = total + incoming[i].reshape(shape)
                axes = tuple(i for i in range(k) if i != j)
                m = _normalize(_logsumexp(total, axes) if axes else total)
                delta = max(delta, _delta(to_var[f][j], m))
                msgs.append(m)
            new_to_var.append(msgs)
        to_var = new_to_var

        for v in fg.variables:
            es = fg.var_edges[v]
            for a, (f, j) in enumerate(es):
                m = np.zeros(2)
                for b, (g, i) in enumerate(es):
                    if a != b:
                        m = m + to_var[g][i]
                m = _normalize(m)
                delta = max(delta, _delta(to_fac[f][j], m))
                to_fac[f][j] = m
        norm_err = max(
            norm_err,
            max(
                (
                    abs(float(np.logaddexp(m[0], m[1])))
                    for ms in to_var + to_fac
                    for m in ms
                ),
                default=0.0,
            ),
        )
        if delta < tolerance:
            converged = True
            break

    beliefs = np.zeros((fg.n, 2))
    decisions = [0] * fg.n
    for v in range(fg.n):
        if v in fg.evidence:
            x = fg.evidence[v]
            beliefs[v] = [0.0 if x == 0 else NEG_INF, 0.0 if x == 1 else NEG_INF]
            decisions[v] = x
            continue
        b = np.zeros(2)
        for f, j in fg.var_edges[v]:
            b = b + to_var[f][j]
        beliefs[v] = _normalize(b) if fg.var_edges[v] else np.full(2, LOG_HALF)
        decisions[v] = 1 if beliefs[v][1] > beliefs[v][0] else 0
    return IbpResult(tuple(decisions), beliefs, it, converged, norm_err)
