"""Benchmark harness: run MB / BBMB / BFMB / IBP / Elim-MPE over instance suites.

Instances are generated from seeds, every (algorithm, i) cell runs on
every instance, and the report carries per-run rows, accuracy-bin counts
and solved-fraction curves ``F(t)``.  Only timing columns vary between
repeated runs of the same configuration.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .elimination import DEFAULT_MEMORY_CAP, MemoryLimitError, elim_mpe
from .generators import (
    CodingSpec,
    NoisyOrSpec,
    bit_error_rate,
    gen_coding,
    gen_noisy_or,
    random_network,
)
from .network import NEG_INF, BeliefNetwork, Evidence, joint_log_probability, parse_evidence, parse_network
from .ordering import min_degree_ordering, moralize
from .propagation import build_factor_graph, ibp
from .search import SearchConfig, bbmb, bfmb, preprocess

ALGORITHMS = ("mb", "bbmb", "bfmb", "ibp", "elim-mpe")
CLASSES = ("coding", "noisy-or", "random", "file")
EXACT_ORACLE = "exact"
BFMB_PROOF = "bfmb-proof"
BINS = ((0.95, "opt>=0.95"), (0.5, "opt>=0.5"), (0.2, "opt>=0.2"), (0.01, "opt>=0.01"), (-1.0, "opt<0.01"))
CURVE_POINTS = 25
ORACLE_TABLE_CAP = 1 << 22

RUN_HEADER = (
    "instance_id", "algorithm", "i_bound", "status", "log_value", "log_upper",
    "opt_ratio", "preprocess_s", "search_s", "nodes", "ber",
)
BIN_HEADER = ("algorithm", "i_bound", "bin", "count", "mean_total_s")
CURVE_HEADER = ("algorithm", "i_bound", "t_seconds", "fraction_solved")
TIMING_COLUMNS = {"preprocess_s", "search_s", "mean_total_s", "fraction_solved"}


class BenchConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    problem: str = "coding"
    algorithms: tuple[str, ...] = ("bbmb", "bfmb")
    i_bounds: tuple[int, ...] = (2,)
    time_bound: float = 30.0
    samples: int = 10
    seed: int = 0
    reference: str = BFMB_PROOF
    workers: int = 1
    memory_cap: int = 1_000_000
    table_cap: int = DEFAULT_MEMORY_CAP
    # coding
    k: int = 50
    parents: int = 4
    sigma: float = 0.22
    sims_per_structure: int = 10
    # noisy-or / random
    n: int = 128
    c: int = 85
    p_noise: float = 0.2
    p_leak: float = 0.01
    n_evidence: int = 10
    max_domain: int = 3
    # file
    files: tuple[tuple[str, str | None], ...] = ()

    def validate(self) -> None:
        if self.problem not in CLASSES:
            raise BenchConfigError(f"unknown problem class {self.problem!r}")
        if not self.algorithms:
            raise BenchConfigError("algorithm list is empty")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise BenchConfigError(f"unknown algorithm(s) {', '.join(bad)}")
        needs_i = any(a in ("mb", "bbmb", "bfmb") for a in self.algorithms)
        if needs_i and (not self.i_bounds or min(self.i_bounds) < 1):
            raise BenchConfigError("i-bound list must be nonempty and positive")
        if self.samples < 1 and self.problem != "file":
            raise BenchConfigError("samples must be positive")
        if self.problem == "file" and not self.files:
            raise BenchConfigError("file class needs at least one network file")
        if self.time_bound <= 0 or self.workers < 1 or self.memory_cap < 1:
            raise BenchConfigError("time bound, workers and memory cap must be positive")
        if self.reference not in (EXACT_ORACLE, BFMB_PROOF):
            raise BenchConfigError(f"unknown reference policy {self.reference!r}")

    @property
    def instance_count(self) -> int:
        return len(self.files) if self.problem == "file" else self.samples

    def cells(self) -> list[tuple[str, int | None]]:
        out = []
        for alg in self.algorithms:
            if alg in ("mb", "bbmb", "bfmb"):
                out.extend((alg, i) for i in sorted(self.i_bounds))
            else:
                out.append((alg, None))
        return out


@dataclass
class Instance:
    net: BeliefNetwork
    evidence: Evidence
    truth: tuple[int, ...] | None = None  # information bits, coding only


@dataclass
class RunRow:
    instance_id: int
    algorithm: str
    i_bound: int | None
    status: str
    log_value: float
    log_upper: float | None
    preprocess_s: float
    search_s: float
    nodes: int | None
    ber: float | None
    opt_ratio: float | None = None

    @property
    def total_s(self) -> float:
        return self.preprocess_s + self.search_s


@dataclass
class BenchReport:
    config: BenchConfig
    runs: list[RunRow] = field(default_factory=list)
    references: dict[int, float | None] = field(default_factory=dict)
    bins: list[tuple] = field(default_factory=list)
    curves: list[tuple] = field(default_factory=list)

    def cell(self, algorithm: str, i_bound: int | None) -> list[RunRow]:
        return [r for r in self.runs if r.algorithm == algorithm and r.i_bound == i_bound]


def make_instance(cfg: BenchConfig, index: int) -> Instance:
    if cfg.problem == "coding":
        spec = CodingSpec(
            cfg.k,
            cfg.parents,
            cfg.sigma,
            seed=cfg.seed + index // cfg.sims_per_structure,
            sim_seed=cfg.seed * 1_000_003 + index,
        )
        inst = gen_coding(spec)
        return Instance(inst.network, Evidence(), inst.true_input)
    if cfg.problem == "noisy-or":
        net, ev = gen_noisy_or(
            NoisyOrSpec(cfg.n, cfg.c, cfg.parents, cfg.p_noise, cfg.p_leak, cfg.n_evidence,
                        seed=cfg.seed + index)
        )
        return Instance(net, ev)
    if cfg.problem == "random":
        net = random_network(cfg.n, cfg.max_domain, cfg.parents, seed=cfg.seed + index)
        return Instance(net, Evidence())
    path, ev_path = cfg.files[index]
    try:
        net = parse_network(Path(path).read_text())
        ev = parse_evidence(Path(ev_path).read_text(), net) if ev_path else Evidence()
    except OSError as exc:
        raise OSError(f"{exc.filename or path}: {exc.strerror}") from exc
    return Instance(net, ev)


def _search_row(index, alg, i, res, truth) -> RunRow:
    return RunRow(
        instance_id=index,
        algorithm=alg,
        i_bound=i,
        status=str(res.status),
        log_value=res.best_log_prob,
        log_upper=res.upper_bound,
        preprocess_s=res.preprocess_seconds,
        search_s=res.search_seconds,
        nodes=res.nodes_expanded,
        ber=bit_error_rate(res.best_assignment[: len(truth)], truth) if truth else None,
    )


def run_instance(cfg: BenchConfig, index: int) -> list[RunRow]:
    """All cells of one instance, sequentially."""
    inst = make_instance(cfg, index)
    net, ev, truth = inst.net, inst.evidence, inst.truth
    d = min_degree_ordering(moralize(net))
    rows = []
    pre_cache = {}
    for alg, i in cfg.cells():
        if alg in ("mb", "bbmb", "bfmb"):
            if i not in pre_cache:
                try:
                    pre_cache[i] = preprocess(net, d, ev, i, cfg.table_cap)
                except MemoryLimitError:
                    pre_cache[i] = None
            pre = pre_cache[i]
            if pre is None:
                rows.append(RunRow(index, alg, i, "MEMORY_OUT", NEG_INF, None, 0.0, 0.0, 0, None))
                continue
            scfg = SearchConfig(i_bound=i, time_bound=cfg.time_bound,
                                memory_cap=cfg.memory_cap, seed=cfg.seed + index)
            if alg == "mb":
                ab = pre.buckets
                proved = ab.lower_bound >= ab.upper_bound - 1e-9
                a = ab.mb_assignment
                rows.append(RunRow(
                    index, alg, i, "OPTIMAL" if proved else "BOUNDED", ab.lower_bound,
                    ab.upper_bound, pre.seconds, 0.0, 0,
                    bit_error_rate(a[: len(truth)], truth) if truth else None,
                ))
            else:
                res = (bbmb if alg == "bbmb" else bfmb)(net, d, ev, scfg, pre=pre)
                rows.append(_search_row(index, alg, i, res, truth))
        elif alg == "ibp":
            if any(k != 2 for k in net.domains):
                rows.append(RunRow(index, alg, None, "UNSUPPORTED", NEG_INF, None, 0.0, 0.0, None, None))
                continue
            t0 = time.perf_counter()
            r = ibp(build_factor_graph(net, ev))
            elapsed = time.perf_counter() - t0
            a = r.bit_decisions
            rows.append(RunRow(
                index, alg, None, "CONVERGED" if r.converged else "ITERATION_LIMIT",
                joint_log_probability(net, a, ev), None, 0.0, elapsed, None,
                bit_error_rate(a[: len(truth)], truth) if truth else None,
            ))
        else:
            t0 = time.perf_counter()
            try:
                value, a = elim_mpe(net, d, ev, memory_cap=cfg.table_cap)
                status = "OPTIMAL"
            except MemoryLimitError:
                value, a, status = NEG_INF, None, "MEMORY_OUT"
            elapsed = time.perf_counter() - t0
            rows.append(RunRow(
                index, alg, None, status, value, value if a else None, elapsed, 0.0, 0,
                bit_error_rate(a[: len(truth)], truth) if (truth and a) else None,
            ))
    return rows


def _reference(cfg: BenchConfig, index: int, rows: list[RunRow]) -> float | None:
    if cfg.reference == EXACT_ORACLE:
        exact = [r.log_value for r in rows if r.algorithm == "elim-mpe" and r.status == "OPTIMAL"]
        if exact:
            return exact[0]
        inst = make_instance(cfg, index)
        d = min_degree_ordering(moralize(inst.net))
        try:
            return elim_mpe(inst.net, d, inst.evidence, memory_cap=ORACLE_TABLE_CAP)[0]
        except MemoryLimitError:
            return None
    proved = [r.log_value for r in rows if r.status == "OPTIMAL"]
    return max(proved) if proved else None


def _opt_ratio(value: float, ref: float) -> float:
    if ref == NEG_INF:
        return 1.0
    return math.exp(min(value - ref, 700.0)) if value != NEG_INF else 0.0


def _bin(opt: float) -> str:
    for lo, label in BINS:
        if opt >= lo:
            return label
    return BINS[-1][1]


def curve_grid(time_bound: float) -> list[float]:
    lo = time_bound / 1000.0
    grid = [lo * (time_bound / lo) ** (k / (CURVE_POINTS - 1)) for k in range(CURVE_POINTS)]
    grid[-1] = time_bound
    return grid


def run_suite(cfg: BenchConfig) -> BenchReport:
    cfg.validate()
    count = cfg.instance_count
    if cfg.workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            per_instance = list(pool.map(run_instance, [cfg] * count, range(count)))
    else:
        per_instance = [run_instance(cfg, k) for k in range(count)]

    report = BenchReport(cfg)
    for index, rows in enumerate(per_instance):
        ref = _reference(cfg, index, rows)
        report.references[index] = ref
        for r in rows:
            if ref is not None and r.status != "UNSUPPORTED":
                r.opt_ratio = _opt_ratio(r.log_value, ref)
        report.runs.extend(rows)

    grid = curve_grid(cfg.time_bound)
    for alg, i in cfg.cells():
        rows = report.cell(alg, i)
        known = [r for r in rows if r.opt_ratio is not None]
        for _, label in BINS:
            members = [r for r in known if _bin(r.opt_ratio) == label]
            mean = sum(r.total_s for r in members) / len(members) if members else None
            report.bins.append((alg, i, label, len(members), mean))
        solved = sorted(min(r.total_s, cfg.time_bound) for r in rows if r.status == "OPTIMAL")
        for t in grid:
            frac = sum(1 for s in solved if s <= t) / len(rows) if rows else 0.0
            report.curves.append((alg, i, t, frac))
    return report


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ("-inf" if x < 0 else "inf")
    return str(x)


def report_tables(report: BenchReport) -> dict[str, tuple[tuple, list[tuple]]]:
    runs = [
        (r.instance_id, r.algorithm, r.i_bound, r.status, r.log_value, r.log_upper,
         r.opt_ratio, r.preprocess_s, r.search_s, r.nodes, r.ber)
        for r in report.runs
    ]
    return {
        "runs.csv": (RUN_HEADER, runs),
        "bins.csv": (BIN_HEADER, report.bins),
        "curves.csv": (CURVE_HEADER, report.curves),
    }


def emit_csv(report: BenchReport, out_dir: str | os.PathLike) -> list[Path]:
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, (header, rows) in report_tables(report).items():
            path = out / name
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for row in rows:
                    w.writerow([_fmt(x) for x in row])
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report to {exc.filename or out}: {exc.strerror}") from exc
    return written


def non_timing_view(path: str | os.PathLike) -> list[list[str]]:
    """CSV rows with timing columns blanked, for determinism comparisons."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return rows
    keep = [k for k, name in enumerate(rows[0]) if name not in TIMING_COLUMNS]
    return [[row[k] for k in keep] for row in rows]
