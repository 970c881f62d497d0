"""Depth-first branch-and-bound (BBMB) and best-first (BFMB) MPE search.

Both consume the mini-bucket heuristic: MB(i) runs first, then search
instantiates variables along the ordering.  Time bounds cover
preprocessing plus search.
"""

from __future__ import annotations

import enum
import gc
import heapq
import random
import time
from dataclasses import dataclass, field

from .elimination import DEFAULT_MEMORY_CAP, AugmentedBuckets, approx_mpe
from .heuristic import ROOT, HeuristicTables, NodeScore, build_tables, child_scores
from .network import NEG_INF, UNASSIGNED, BeliefNetwork, Evidence
from .oracle import brute_force_mpe
from .ordering import Ordering, min_degree_ordering, moralize


class Status(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    TIMEOUT = "TIMEOUT"
    MEMORY_OUT = "MEMORY_OUT"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SearchConfig:
    i_bound: int = 2
    time_bound: float = 30.0
    memory_cap: int = 1_000_000  # open-list nodes (BFMB)
    trace_interval: float = 0.05
    seed: int = 0
    table_cap: int | None = DEFAULT_MEMORY_CAP  # entries per MB function

    def __post_init__(self):
        if self.i_bound < 1:
            raise ValueError("i_bound must be >= 1")
        if self.time_bound < 0 or self.memory_cap < 1 or self.trace_interval <= 0:
            raise ValueError("time_bound, memory_cap and trace_interval must be positive")


@dataclass
class SearchResult:
    status: Status
    best_assignment: tuple[int, ...]
    best_log_prob: float
    upper_bound: float
    nodes_expanded: int
    preprocess_seconds: float
    search_seconds: float
    anytime_trace: list[tuple[float, float]] = field(default_factory=list)
    mb_lower_bound: float = NEG_INF

    @property
    def total_seconds(self) -> float:
        return self.preprocess_seconds + self.search_seconds


@dataclass(frozen=True, eq=False)
class Preprocessed:
    """MB(i) output shared by both search algorithms."""

    buckets: AugmentedBuckets
    tables: HeuristicTables
    seconds: float


def preprocess(
    net: BeliefNetwork,
    d: Ordering | None,
    e: Evidence | None,
    i: int,
    table_cap: int | None = DEFAULT_MEMORY_CAP,
) -> Preprocessed:
    t0 = time.perf_counter()
    if d is None:
        d = min_degree_ordering(moralize(net))
    ab = approx_mpe(net, d, e, i, memory_cap=table_cap)
    tables = build_tables(ab)
    return Preprocessed(ab, tables, time.perf_counter() - t0)


class _Trace:
    def __init__(self, start: float, interval: float, value: float, first: float = 0.0):
        self.start = start
        self.interval = interval
        self.points = [(first, value)]
        self.next_sample = first + interval

    def tick(self, now: float, value: float, force: bool = False):
        elapsed = now - self.start
        if force or elapsed >= self.next_sample:
            if value >= self.points[-1][1] and elapsed >= self.points[-1][0]:
                self.points.append((elapsed, value))
            self.next_sample = elapsed + self.interval


def bbmb(
    net: BeliefNetwork,
    d: Ordering | None,
    e: Evidence | None,
    cfg: SearchConfig,
    pre: Preprocessed | None = None,
) -> SearchResult:
    """Branch-and-bound with mini-bucket heuristics.

    Expands children in descending ``f`` (ties to the lowest value),
    prunes every child with ``f <= L`` and returns the best complete
    assignment found; anytime when interrupted.
    """
    pre = pre or preprocess(net, d, e, cfg.i_bound, cfg.table_cap)
    ab, t = pre.buckets, pre.tables
    search_start = time.perf_counter()
    start = search_start - pre.seconds  # virtual start: preprocessing counts
    deadline = start + cfg.time_bound
    n, order = t.n, t.order

    mb_value = ab.lower_bound
    L = NEG_INF
    best = None
    trace = _Trace(start, cfg.trace_interval, mb_value, pre.seconds)
    nodes = 0
    status = Status.OPTIMAL

    def expand(score: NodeScore, a) -> list:
        kids = [
            (c.log_f, -v, v, c)
            for v, c in child_scores(t, score, a)
            if c.log_f > L
        ]
        kids.sort()
        return kids  # best child last

    a = [UNASSIGNED] * n
    if n == 0:
        best = ()
        L = 0.0
        stack = []
    elif time.perf_counter() >= deadline:
        status = Status.TIMEOUT
        stack = []
    else:
        nodes += 1
        stack = [expand(ROOT, a)]

    gc_was_enabled = gc.isenabled()
    gc.disable()  # see bfmb
    try:
        while stack:
            k = len(stack) - 1
            frame = stack[-1]
            if not frame or frame[-1][0] <= L:
                stack.pop()
                if k > 0:
                    a[order[k - 1]] = UNASSIGNED
                continue
            f, _, v, score = frame.pop()
            x = order[k]
            if k + 1 == n:
                L = f
                a[x] = v
                best = tuple(a)
                a[x] = UNASSIGNED
                trace.tick(time.perf_counter(), max(L, mb_value), force=True)
                continue
            now = time.perf_counter()
            if now >= deadline:
                status = Status.TIMEOUT
                break
            trace.tick(now, max(L, mb_value))
            a[x] = v
            nodes += 1
            stack.append(expand(score, a))
    finally:
        if gc_was_enabled:
            gc.enable()

    end = time.perf_counter()
    if best is None or mb_value > L:
        best, L = ab.mb_assignment, mb_value
    trace.tick(end, L, force=True)
    return SearchResult(
        status=status,
        best_assignment=tuple(best),
        best_log_prob=L,
        upper_bound=ab.upper_bound,
        nodes_expanded=nodes,
        preprocess_seconds=pre.seconds,
        search_seconds=end - search_start,
        anytime_trace=trace.points,
        mb_lower_bound=mb_value,
    )


class _Node:
    __slots__ = ("depth", "value", "parent", "score")

    def __init__(self, depth, value, parent, score):
        self.depth = depth
        self.value = value
        self.parent = parent
        self.score = score


def _move_to(node: _Node, path: list, a: list[int], order) -> None:
    """Make ``a`` hold ``node``'s prefix, rewriting only where it leaves ``path``.

    ``path[k]`` is the node at depth ``k`` whose values ``a`` currently
    holds.  Entries deeper than ``node`` go stale, which is harmless since
    scoring reads only the prefix.
    """
    depth = node.depth
    del path[depth + 1 :]
    while len(path) <= depth:
        path.append(None)
    while path[node.depth] is not node:
        path[node.depth] = node
        a[order[node.depth - 1]] = node.value
        node = node.parent


def bfmb(
    net: BeliefNetwork,
    d: Ordering | None,
    e: Evidence | None,
    cfg: SearchConfig,
    pre: Preprocessed | None = None,
) -> SearchResult:
    """Best-first (A*) search with mini-bucket heuristics.

    The open list is ordered by ``f``; ties go to deeper nodes, then to a
    seeded random key.  Returns OPTIMAL when a complete assignment is
    selected; on timeout or open-list overflow it falls back to the MB
    assignment.
    """
    pre = pre or preprocess(net, d, e, cfg.i_bound, cfg.table_cap)
    ab, t = pre.buckets, pre.tables
    search_start = time.perf_counter()
    start = search_start - pre.seconds  # virtual start: preprocessing counts
    deadline = start + cfg.time_bound
    n, order = t.n, t.order
    rng = random.Random(cfg.seed)

    mb_value = ab.lower_bound
    trace = _Trace(start, cfg.trace_interval, mb_value, pre.seconds)
    nodes = 0
    status = Status.OPTIMAL
    best = None
    value = mb_value

    counter = 0
    root = _Node(0, None, None, ROOT)
    open_list = [(0.0, 0, 0.0, 0, root)]
    path = [root]
    a = [UNASSIGNED] * n
    draw = rng.random
    push = heapq.heappush
    if n == 0:
        open_list = []
        best, value = (), 0.0
    elif time.perf_counter() >= deadline:
        status = Status.TIMEOUT
        open_list = []

    # millions of small heap entries make cyclic GC passes the bottleneck;
    # nothing here forms reference cycles
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        while open_list:
            node = heapq.heappop(open_list)[-1]
            _move_to(node, path, a, order)
            if node.depth == n:
                best = tuple(a)
                value = node.score.log_f
                break
            now = time.perf_counter()
            if now >= deadline:
                status = Status.TIMEOUT
                break
            trace.tick(now, mb_value)
            nodes += 1
            depth = node.depth + 1
            for v, c in child_scores(t, node.score, a):
                f = c.log_f
                if f == NEG_INF:
                    continue
                counter += 1
                push(open_list, (-f, -depth, draw(), counter, _Node(depth, v, node, c)))
            if len(open_list) > cfg.memory_cap:
                status = Status.MEMORY_OUT
                break
    finally:
        if gc_was_enabled:
            gc.enable()

    end = time.perf_counter()
    if status is not Status.OPTIMAL or best is None or value < mb_value:
        best, value = ab.mb_assignment, mb_value
    trace.tick(end, value, force=True)
    return SearchResult(
        status=status,
        best_assignment=tuple(best),
        best_log_prob=value,
        upper_bound=ab.upper_bound,
        nodes_expanded=nodes,
        preprocess_seconds=pre.seconds,
        search_seconds=end - search_start,
        anytime_trace=trace.points,
        mb_lower_bound=mb_value,
    )


def verify_optimal(
    result: SearchResult, net: BeliefNetwork, e: Evidence | None = None, tol: float = 1e-9
) -> bool:
    """Compare an OPTIMAL result with brute-force enumeration."""
    if result.status is not Status.OPTIMAL:
        return False
    exact, _ = brute_force_mpe(net, e)
    if exact == NEG_INF:
        return result.best_log_prob == NEG_INF
    return abs(result.best_log_prob - exact) <= tol
