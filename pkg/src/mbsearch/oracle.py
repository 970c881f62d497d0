"""Brute-force enumeration over completions; the reference for small instances.

Deliberately avoids the factor algebra used by elimination: every
completion is materialized as a row of an assignment matrix and each
factor is read by direct flat-index arithmetic.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .network import NEG_INF, UNASSIGNED, BeliefNetwork, Evidence

DEFAULT_GUARD = 1 << 21


class CompletionSpaceError(ValueError):
    """Too many completions to enumerate."""


def _fixed(net: BeliefNetwork, e: Evidence | None, partial) -> dict[int, int]:
    fixed: dict[int, int] = {}
    if partial is not None:
        items = partial.items() if isinstance(partial, Mapping) else enumerate(partial)
        for v, x in items:
            if x != UNASSIGNED:
                fixed[int(v)] = int(x)
    for v, x in (e.pairs if e else ()):
        if fixed.get(v, x) != x:
            raise ValueError(f"partial assignment contradicts evidence on variable {v}")
        fixed[v] = x
    return fixed


def enumerate_completions(
    net: BeliefNetwork,
    e: Evidence | None = None,
    partial: Mapping[int, int] | Sequence[int] | None = None,
    guard: int = DEFAULT_GUARD,
) -> tuple[np.ndarray, np.ndarray]:
    """All completions consistent with evidence and ``partial``.

    Returns ``(assignments, log_joint)`` with one row per completion.
    """
    fixed = _fixed(net, e, partial)
    free = [v for v in range(net.n) if v not in fixed]
    count = math.prod(net.domains[v] for v in free)
    if count > guard:
        raise CompletionSpaceError(f"{count} completions exceed guard {guard}")
    rows = np.empty((count, net.n), dtype=np.int64)
    for v, x in fixed.items():
        rows[:, v] = x
    if free:
        grid = np.indices([net.domains[v] for v in free]).reshape(len(free), -1)
        rows[:, free] = grid.T
    logp = np.zeros(count)
    for f in net.factors:
        idx = rows[:, list(f.scope)] @ np.asarray(f.strides, dtype=np.int64)
        logp = logp + f.log_values[idx]
    return rows, logp


def exact_extension_value(
    net: BeliefNetwork,
    e: Evidence | None,
    partial: Mapping[int, int] | Sequence[int] | None,
    guard: int = DEFAULT_GUARD,
) -> float:
    """Log-probability of the most probable completion of ``partial``."""
    _, logp = enumerate_completions(net, e, partial, guard)
    return float(logp.max()) if logp.size else NEG_INF


def brute_force_mpe(
    net: BeliefNetwork, e: Evidence | None = None, guard: int = DEFAULT_GUARD
) -> tuple[float, tuple[int, ...]]:
    rows, logp = enumerate_completions(net, e, None, guard)
    k = int(np.argmax(logp))
    return float(logp[k]), tuple(int(x) for x in rows[k])
