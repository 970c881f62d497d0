"""Discrete belief networks, log-space factors and the BAYES text format.

Factors hold a flat table of natural-log probabilities indexed in
mixed-radix order with the *last* scope variable varying fastest (plain
C order once reshaped to the scope cardinalities).  Probability zero is
stored as ``NEG_INF``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NEG_INF = -math.inf
UNASSIGNED = -1

NORMALIZATION_TOL = 1e-9
PARSE_NORMALIZATION_TOL = 1e-6


class NetworkError(ValueError):
    """A network, factor or evidence set violates its invariants."""


class ParseError(NetworkError):
    """Malformed BAYES or evidence text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _log(p):
    with np.errstate(divide="ignore"):
        return np.log(p)


@dataclass(frozen=True, eq=False)
class Factor:
    """A function over an ordered scope of variables, stored in log-space.

    ``cards`` holds the domain size of each scope variable so a factor can
    be evaluated without its network.
    """

    scope: tuple[int, ...]
    cards: tuple[int, ...]
    log_values: np.ndarray
    strides: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        scope = tuple(int(v) for v in self.scope)
        cards = tuple(int(c) for c in self.cards)
        if len(scope) != len(cards):
            raise NetworkError("factor scope and cardinalities differ in length")
        if len(set(scope)) != len(scope):
            raise NetworkError(f"factor scope {scope} repeats a variable")
        values = np.asarray(self.log_values, dtype=np.float64).reshape(-1)
        size = math.prod(cards)
        if values.size != size:
            raise NetworkError(
                f"factor over {scope} needs {size} entries, got {values.size}"
            )
        if np.any(np.isnan(values)) or np.any(values > 1e-12):
            raise NetworkError(f"factor over {scope} has entries above log 1")
        values = np.minimum(values, 0.0)
        values.flags.writeable = False
        strides = []
        step = 1
        for c in reversed(cards):
            strides.append(step)
            step *= c
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "cards", cards)
        object.__setattr__(self, "log_values", values)
        object.__setattr__(self, "strides", tuple(reversed(strides)))

    @classmethod
    def from_probabilities(cls, scope, cards, probs) -> Factor:
        return cls(tuple(scope), tuple(cards), _log(np.asarray(probs, dtype=np.float64)))

    @classmethod
    def constant(cls, log_value: float = 0.0) -> Factor:
        return cls((), (), np.array([log_value]))

    @property
    def size(self) -> int:
        return self.log_values.size

    @property
    def table(self) -> np.ndarray:
        """Values reshaped to ``cards`` (a 0-d array for constants)."""
        return self.log_values.reshape(self.cards)

    def index(self, values: Sequence[int]) -> int:
        """Flat index of the scope configuration ``values`` (scope order)."""
        return sum(v * s for v, s in zip(values, self.strides))

    def __repr__(self):
        return f"Factor(scope={self.scope}, cards={self.cards})"


@dataclass(frozen=True)
class Evidence:
    """Observed (variable, value) pairs."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple((int(v), int(x)) for v, x in self.pairs)
        seen = [v for v, _ in pairs]
        if len(set(seen)) != len(seen):
            raise NetworkError("evidence repeats a variable")
        object.__setattr__(self, "pairs", pairs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def check(self, domains: Sequence[int]) -> None:
        for v, x in self.pairs:
            if not 0 <= v < len(domains):
                raise NetworkError(f"evidence variable {v} out of range")
            if not 0 <= x < domains[v]:
                raise NetworkError(
                    f"evidence value {x} outside domain of variable {v}"
                )


@dataclass(frozen=True, eq=False)
class BeliefNetwork:
    """A Bayesian network with one CPT per variable.

    ``cpts[i]`` has scope ``parents[i] + (i,)``.  ``likelihoods`` holds
    optional unary soft-evidence factors (channel observations of coding
    networks); they multiply into the joint like CPTs but need not be
    normalized.
    """

    domains: tuple[int, ...]
    parents: tuple[tuple[int, ...], ...]
    cpts: tuple[Factor, ...]
    likelihoods: tuple[Factor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "domains", tuple(int(d) for d in self.domains))
        object.__setattr__(
            self, "parents", tuple(tuple(int(p) for p in ps) for ps in self.parents)
        )
        object.__setattr__(self, "cpts", tuple(self.cpts))
        object.__setattr__(self, "likelihoods", tuple(self.likelihoods))
        self._validate()

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def factors(self) -> tuple[Factor, ...]:
        """Every function whose product is the joint: CPTs then likelihoods."""
        return self.cpts + self.likelihoods

    def _validate(self):
        n = self.n
        if any(d < 1 for d in self.domains):
            raise NetworkError("domain sizes must be at least 1")
        if len(self.parents) != n or len(self.cpts) != n:
            raise NetworkError("need one parent list and one CPT per variable")
        for i, (ps, cpt) in enumerate(zip(self.parents, self.cpts)):
            for p in ps:
                if not 0 <= p < n or p == i:
                    raise NetworkError(f"variable {i}: parent {p} out of range")
            if cpt.scope != ps + (i,):
                raise NetworkError(
                    f"variable {i}: CPT scope {cpt.scope} != parents + child"
                )
            if cpt.cards != tuple(self.domains[v] for v in cpt.scope):
                raise NetworkError(f"variable {i}: CPT cardinalities mismatch")
            rows = np.exp(cpt.log_values.reshape(-1, self.domains[i])).sum(axis=1)
            bad = np.flatnonzero(np.abs(rows - 1.0) > NORMALIZATION_TOL)
            if bad.size:
                raise NetworkError(
                    f"variable {i}: CPT row {int(bad[0])} sums to {rows[bad[0]]:.12g}"
                )
        for f in self.likelihoods:
            if len(f.scope) != 1 or not 0 <= f.scope[0] < n:
                raise NetworkError("likelihood factors must be unary over a network variable")
            if f.cards != (self.domains[f.scope[0]],):
                raise NetworkError("likelihood cardinality mismatch")
        if topological_order(self.parents) is None:
            raise NetworkError("parent structure is cyclic")


def topological_order(parents: Sequence[Sequence[int]]) -> list[int] | None:
    """Kahn's algorithm; ``None`` when the parent graph has a cycle."""
    n = len(parents)
    children = [[] for _ in range(n)]
    indeg = [len(ps) for ps in parents]
    for i, ps in enumerate(parents):
        for p in ps:
            children[p].append(i)
    ready = [i for i in range(n) if indeg[i] == 0]
    order = []
    while ready:
        v = ready.pop()
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return order if len(order) == n else None


# --------------------------------------------------------------------------
# evaluation


def factor_value(f: Factor, a: Sequence[int]) -> float:
    """Table entry of ``f`` at the projection of the full-length assignment ``a``."""
    idx = 0
    for v, s in zip(f.scope, f.strides):
        x = a[v]
        if x == UNASSIGNED:
            raise NetworkError(f"variable {v} in factor scope is unassigned")
        idx += x * s
    return float(f.log_values[idx])


def joint_log_probability(
    net: BeliefNetwork, a: Sequence[int], e: Evidence | None = None
) -> float:
    if len(a) != net.n or any(x == UNASSIGNED for x in a):
        raise NetworkError("assignment must be complete")
    for v, x in (e.pairs if e else ()):
        if a[v] != x:
            raise NetworkError(f"assignment sets variable {v}={a[v]}, evidence says {x}")
    for v, x in enumerate(a):
        if not 0 <= x < net.domains[v]:
            raise NetworkError(f"value {x} outside domain of variable {v}")
    total = 0.0
    for f in net.factors:
        total += factor_value(f, a)
    return total


# --------------------------------------------------------------------------
# factor algebra


def _aligned(f: Factor, scope: Sequence[int]) -> np.ndarray:
    """View of ``f`` broadcastable over the sorted ``scope``."""
    if not f.scope:
        return f.log_values.reshape((1,) * len(scope))
    perm = sorted(range(len(f.scope)), key=lambda k: f.scope[k])
    t = f.table.transpose(perm)
    pos = {v: k for k, v in enumerate(scope)}
    shape = [1] * len(scope)
    for k in perm:
        shape[pos[f.scope[k]]] = f.cards[k]
    return t.reshape(shape)


def product_scope(factors: Iterable[Factor]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    cards: dict[int, int] = {}
    for f in factors:
        cards.update(zip(f.scope, f.cards))
    scope = tuple(sorted(cards))
    return scope, tuple(cards[v] for v in scope)


def multiply(factors: Sequence[Factor]) -> Factor:
    """Log-space product over the sorted union scope."""
    scope, cards = product_scope(factors)
    total = np.zeros(cards)
    for f in factors:
        total = total + _aligned(f, scope)
    return Factor(scope, cards, np.broadcast_to(total, cards).reshape(-1))


def combine(factors: Sequence[Factor], eliminate: int, mode: str = "max") -> Factor:
    """Multiply ``factors`` and maximize out ``eliminate``.

    The result scope is the sorted union minus ``eliminate``.  An empty
    factor list yields the constant ``log 1``.
    """
    if mode != "max":
        raise ValueError(f"unsupported combination mode {mode!r}")
    if not factors:
        return Factor.constant(0.0)
    prod = multiply(factors)
    if eliminate not in prod.scope:
        return prod
    axis = prod.scope.index(eliminate)
    reduced = prod.table.max(axis=axis)
    scope = prod.scope[:axis] + prod.scope[axis + 1 :]
    cards = prod.cards[:axis] + prod.cards[axis + 1 :]
    return Factor(scope, cards, np.asarray(reduced).reshape(-1))


def restrict(f: Factor, var: int, value: int) -> Factor:
    """Slice ``f`` at ``var = value``, keeping the remaining scope order."""
    if var not in f.scope:
        return f
    axis = f.scope.index(var)
    t = np.take(f.table, value, axis=axis)
    return Factor(
        f.scope[:axis] + f.scope[axis + 1 :],
        f.cards[:axis] + f.cards[axis + 1 :],
        np.asarray(t).reshape(-1),
    )


# --------------------------------------------------------------------------
# BAYES text format


def _tokens(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.split():
            yield tok, lineno


class _Reader:
    def __init__(self, text: str):
        self._toks = list(_tokens(text))
        self._pos = 0

    @property
    def line(self) -> int | None:
        if self._pos < len(self._toks):
            return self._toks[self._pos][1]
        return self._toks[-1][1] if self._toks else None

    def done(self) -> bool:
        return self._pos >= len(self._toks)

    def peek(self) -> str | None:
        return None if self.done() else self._toks[self._pos][0]

    def next(self, what: str) -> str:
        if self.done():
            raise ParseError(f"unexpected end of input, expected {what}", self.line)
        tok = self._toks[self._pos][0]
        self._pos += 1
        return tok

    def int(self, what: str) -> int:
        line = self.line
        tok = self.next(what)
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"expected integer {what}, got {tok!r}", line) from None

    def float(self, what: str) -> float:
        line = self.line
        tok = self.next(what)
        try:
            x = float(tok)
        except ValueError:
            raise ParseError(f"expected number {what}, got {tok!r}", line) from None
        if not 0.0 <= x <= 1.0 + PARSE_NORMALIZATION_TOL:
            raise ParseError(f"probability {tok} outside [0, 1]", line)
        return x


def parse_network(text: str) -> BeliefNetwork:
    """Parse the BAYES format.

    Layout: ``BAYES``, n, n domain sizes, n scope blocks ``k v1 .. vk``
    (``vk`` is the child), then n linear-space tables in declaration
    order with the child varying fastest.  An optional trailer
    ``LIKELIHOOD m`` followed by ``m`` blocks ``v p_0 .. p_{d-1}`` carries
    unary soft-evidence factors.
    """
    r = _Reader(text)
    line = r.line
    head = r.next("header")
    if head != "BAYES":
        raise ParseError(f"bad header {head!r}, expected BAYES", line)
    line = r.line
    n = r.int("variable count")
    if n < 0:
        raise ParseError("negative variable count", line)
    domains = []
    for i in range(n):
        line = r.line
        d = r.int(f"domain size of variable {i}")
        if d < 1:
            raise ParseError(f"domain size of variable {i} must be >= 1", line)
        domains.append(d)

    blocks: list[tuple[tuple[int, ...], int, int]] = []
    seen: set[int] = set()
    for b in range(n):
        line = r.line
        k = r.int(f"scope size of block {b}")
        if k < 1:
            raise ParseError(f"scope block {b} must name at least the child", line)
        vs = []
        for _ in range(k):
            vline = r.line
            v = r.int(f"variable index in scope block {b}")
            if not 0 <= v < n:
                raise ParseError(f"variable index {v} out of range [0, {n})", vline)
            vs.append(v)
        if len(set(vs)) != k:
            raise ParseError(f"scope block {b} repeats a variable", line)
        child = vs[-1]
        if child in seen:
            raise ParseError(f"variable {child} has two CPTs", line)
        seen.add(child)
        blocks.append((tuple(vs[:-1]), child, line))

    parents: list[tuple[int, ...]] = [()] * n
    cpts: list[Factor | None] = [None] * n
    for ps, child, _ in blocks:
        parents[child] = ps
    if topological_order(parents) is None:
        raise ParseError("parent structure is cyclic", blocks[0][2] if blocks else None)

    for ps, child, _ in blocks:
        scope = ps + (child,)
        cards = tuple(domains[v] for v in scope)
        line = r.line
        probs = np.array(
            [r.float(f"table entry for variable {child}") for _ in range(math.prod(cards))]
        )
        rows = probs.reshape(-1, domains[child])
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > PARSE_NORMALIZATION_TOL)
        if bad.size:
            raise ParseError(
                f"CPT of variable {child} not normalized: row {int(bad[0])} "
                f"sums to {sums[bad[0]]:.9g}",
                line,
            )
        rows = rows / sums[:, None]
        cpts[child] = Factor.from_probabilities(scope, cards, rows.reshape(-1))

    likelihoods = []
    if not r.done():
        line = r.line
        tag = r.next("LIKELIHOOD section")
        if tag != "LIKELIHOOD":
            raise ParseError(f"unexpected trailing token {tag!r}", line)
        m = r.int("likelihood count")
        for _ in range(m):
            line = r.line
            v = r.int("likelihood variable")
            if not 0 <= v < n:
                raise ParseError(f"variable index {v} out of range [0, {n})", line)
            probs = [r.float(f"likelihood entry for variable {v}") for _ in range(domains[v])]
            likelihoods.append(Factor.from_probabilities((v,), (domains[v],), probs))
        if not r.done():
            raise ParseError(f"unexpected trailing token {r.peek()!r}", r.line)
    return BeliefNetwork(tuple(domains), tuple(parents), tuple(cpts), tuple(likelihoods))


def _fmt(x: float) -> str:
    return "0" if x == 0.0 else ("1" if x == 1.0 else repr(float(x)))


def serialize_network(net: BeliefNetwork) -> str:
    lines = ["BAYES", str(net.n), " ".join(map(str, net.domains))]
    for i in range(net.n):
        scope = net.parents[i] + (i,)
        lines.append(" ".join(map(str, (len(scope),) + scope)))
    for cpt in net.cpts:
        rows = np.exp(cpt.log_values).reshape(-1, cpt.cards[-1])
        lines.extend(" ".join(_fmt(x) for x in row) for row in rows)
    if net.likelihoods:
        lines.append(f"LIKELIHOOD {len(net.likelihoods)}")
        for f in net.likelihoods:
            vals = " ".join(_fmt(x) for x in np.exp(f.log_values))
            lines.append(f"{f.scope[0]} {vals}")
    return "\n".join(lines) + "\n"


def parse_evidence(text: str, net: BeliefNetwork | None = None) -> Evidence:
    """Evidence file: a count followed by that many ``variable value`` pairs."""
    r = _Reader(text)
    if r.done():
        return Evidence()
    line = r.line
    m = r.int("evidence count")
    if m < 0:
        raise ParseError("negative evidence count", line)
    pairs = []
    for _ in range(m):
        line = r.line
        pairs.append((r.int("evidence variable"), r.int("evidence value")))
        if net is not None:
            v, x = pairs[-1]
            if not 0 <= v < net.n:
                raise ParseError(f"evidence variable {v} out of range", line)
            if not 0 <= x < net.domains[v]:
                raise ParseError(f"evidence value {x} outside domain of variable {v}", line)
    if not r.done():
        raise ParseError(f"unexpected trailing token {r.peek()!r}", r.line)
    try:
        return Evidence(tuple(pairs))
    except NetworkError as exc:
        raise ParseError(str(exc), line) from None


def serialize_evidence(e: Evidence) -> str:
    lines = [str(len(e.pairs))] + [f"{v} {x}" for v, x in e.pairs]
    return "\n".join(lines) + "\n"
