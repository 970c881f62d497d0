from __future__ import annotations

import math

import numpy as np
import pytest

from mbsearch.network import BeliefNetwork, Factor

A, B, C, D, E = range(5)


def cpt(scope, cards, probs) -> Factor:
    return Factor.from_probabilities(tuple(scope), tuple(cards), np.asarray(probs, dtype=float))


def two_var_net() -> BeliefNetwork:
    """P(A=1)=0.6, P(B=1|A=1)=0.9, P(B=1|A=0)=0.2."""
    return BeliefNetwork(
        (2, 2),
        ((), (0,)),
        (cpt((0,), (2,), [0.4, 0.6]), cpt((0, 1), (2, 2), [0.8, 0.2, 0.1, 0.9])),
    )


def fig1_net() -> BeliefNetwork:
    """A->B, A->C, A->D, B->D, B->E, C->E over binary A..E (indices 0..4)."""
    parents = ((), (A,), (A,), (B, A), (C, B))
    cpts = (
        cpt((A,), (2,), [0.3, 0.7]),
        cpt((A, B), (2, 2), [0.6, 0.4, 0.2, 0.8]),
        cpt((A, C), (2, 2), [0.5, 0.5, 0.9, 0.1]),
        cpt((B, A, D), (2, 2, 2), [0.7, 0.3, 0.4, 0.6, 0.1, 0.9, 0.55, 0.45]),
        cpt((C, B, E), (2, 2, 2), [0.25, 0.75, 0.6, 0.4, 0.8, 0.2, 0.35, 0.65]),
    )
    return BeliefNetwork((2,) * 5, parents, cpts)


def chain_net(n: int, deterministic: bool = False) -> BeliefNetwork:
    parents = ((),) + tuple((k - 1,) for k in range(1, n))
    if deterministic:
        cpts = [cpt((0,), (2,), [0.0, 1.0])]
        cpts += [cpt((k - 1, k), (2, 2), [0.0, 1.0, 1.0, 0.0]) for k in range(1, n)]
    else:
        cpts = [cpt((0,), (2,), [0.45, 0.55])]
        cpts += [cpt((k - 1, k), (2, 2), [0.7, 0.3, 0.35, 0.65]) for k in range(1, n)]
    return BeliefNetwork((2,) * n, parents, tuple(cpts))


def independent_net(n: int, p1: float = 0.5) -> BeliefNetwork:
    return BeliefNetwork(
        (2,) * n, ((),) * n, tuple(cpt((i,), (2,), [1 - p1, p1]) for i in range(n))
    )


@pytest.fixture
def fig1():
    return fig1_net()


@pytest.fixture
def two_var():
    return two_var_net()


def close(a: float, b: float, tol: float = 1e-9) -> bool:
    if a == b:
        return True
    return math.isfinite(a) and math.isfinite(b) and abs(a - b) <= tol


def walk_tree(tables, visit, limit=None):
    """Depth-first walk of the full expansion tree of ``tables``.

    Calls ``visit(parent_score, value, child_score, assignment)`` for every
    edge, with ``assignment`` holding the child's prefix.  Returns the
    number of edges seen.
    """
    from mbsearch.heuristic import ROOT, child_scores
    from mbsearch.network import UNASSIGNED

    a = [UNASSIGNED] * tables.n
    seen = 0

    def go(score):
        nonlocal seen
        p = score.depth
        if p == tables.n:
            return
        x = tables.order[p]
        for v, child in child_scores(tables, score, a):
            a[x] = v
            visit(score, v, child, a)
            seen += 1
            if limit is not None and seen >= limit:
                a[x] = UNASSIGNED
                return
            go(child)
            a[x] = UNASSIGNED

    go(ROOT)
    return seen


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
