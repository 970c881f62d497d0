"""Command-line front end: ``gen``, ``solve``, ``bench`` and ``verify``.

Exit codes: 0 success, 1 invalid arguments or input, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .elimination import MemoryLimitError, approx_mpe, elim_mpe
from .generators import (
    CodingSpec,
    NoisyOrSpec,
    bit_error_rate,
    gen_coding,
    gen_noisy_or,
    random_network,
)
from .network import (
    Evidence,
    NetworkError,
    joint_log_probability,
    parse_evidence,
    parse_network,
    serialize_evidence,
    serialize_network,
)
from .oracle import CompletionSpaceError, brute_force_mpe
from .ordering import induced_width, min_degree_ordering, moralize
from .propagation import build_factor_graph, ibp
from .search import SearchConfig, bbmb, bfmb, preprocess

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for I/O here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        out = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _add_instance_flags(p: argparse.ArgumentParser, classes=("coding", "noisy-or", "random")) -> None:
    p.add_argument("--class", dest="problem", choices=classes, default="coding")
    p.add_argument("--k", type=int, default=50, help="information bits (coding)")
    p.add_argument("--sigma", type=float, default=0.22, help="channel noise (coding)")
    p.add_argument("--parents", type=int, default=4, help="parents per parity/child node")
    p.add_argument("--n", type=int, default=128, help="variables (noisy-or, random)")
    p.add_argument("--c", type=int, default=85, help="child nodes (noisy-or)")
    p.add_argument("--p-noise", type=float, default=0.2)
    p.add_argument("--p-leak", type=float, default=0.01)
    p.add_argument("--evidence-count", type=int, default=10, help="evidence variables (noisy-or)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mbsearch", description="Mini-bucket heuristics for MPE search.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a generated instance to files")
    _add_instance_flags(g)
    g.add_argument("--out-dir", default=".")
    g.add_argument("--name", default="instance")

    s = sub.add_parser("solve", help="solve one instance with one algorithm")
    s.add_argument("network")
    s.add_argument("--evidence")
    s.add_argument("--truth", help="truth file of information bits, for BER")
    s.add_argument("--alg", default="bfmb", choices=bench.ALGORITHMS)
    s.add_argument("--i", type=int, default=2)
    s.add_argument("--time-bound", type=float, default=30.0)
    s.add_argument("--memory-cap", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="run a suite and write runs/bins/curves CSV files")
    _add_instance_flags(b, bench.CLASSES)
    b.add_argument("--files", nargs="*", default=(), help="NET[:EVIDENCE] pairs for --class file")
    b.add_argument("--alg", type=_str_list, default=("bbmb", "bfmb"))
    b.add_argument("--i", type=_int_list, default=(2,))
    b.add_argument("--time-bound", type=float, default=30.0)
    b.add_argument("--samples", type=int, default=10)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--memory-cap", type=int, default=1_000_000)
    b.add_argument("--reference", choices=(bench.BFMB_PROOF, bench.EXACT_ORACLE), default=bench.BFMB_PROOF)
    b.add_argument("--out-dir", default="bench-out")

    v = sub.add_parser("verify", help="check MB bounds and search against enumeration")
    v.add_argument("network")
    v.add_argument("--evidence")
    v.add_argument("--i", type=_int_list, default=None)
    v.add_argument("--time-bound", type=float, default=30.0)
    return parser


def _read(path: str) -> str:
    return Path(path).read_text()


def _load(network: str, evidence: str | None):
    net = parse_network(_read(network))
    ev = parse_evidence(_read(evidence), net) if evidence else Evidence()
    return net, ev


def cmd_gen(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    truth = None
    if args.problem == "coding":
        inst = gen_coding(CodingSpec(args.k, args.parents, args.sigma, seed=args.seed))
        net, ev, truth = inst.network, Evidence(), inst.truth_text()
    elif args.problem == "noisy-or":
        net, ev = gen_noisy_or(
            NoisyOrSpec(args.n, args.c, args.parents, args.p_noise, args.p_leak,
                        args.evidence_count, seed=args.seed)
        )
    else:
        net, ev = random_network(args.n, max_parents=args.parents, seed=args.seed), Evidence()
    paths = [out / f"{args.name}.bayes", out / f"{args.name}.evid"]
    paths[0].write_text(serialize_network(net))
    paths[1].write_text(serialize_evidence(ev))
    if truth is not None:
        paths.append(out / f"{args.name}.truth")
        paths[2].write_text(truth)
    for p in paths:
        print(p)
    return EXIT_OK


def _print_solution(status, value, upper, assignment, extra=()):
    print(f"status: {status}")
    print(f"log_value: {value!r}")
    print(f"log_upper: {'' if upper is None else repr(upper)}")
    print("assignment: " + ("" if assignment is None else " ".join(map(str, assignment))))
    for line in extra:
        print(line)


def cmd_solve(args) -> int:
    net, ev = _load(args.network, args.evidence)
    truth = None
    if args.truth:
        truth = tuple(int(x) for x in _read(args.truth).split())
    d = min_degree_ordering(moralize(net))
    if args.alg == "elim-mpe":
        value, a = elim_mpe(net, d, ev)
        status, upper, extra = "OPTIMAL", value, []
    elif args.alg == "mb":
        ab = approx_mpe(net, d, ev, args.i)
        value, a, upper = ab.lower_bound, ab.mb_assignment, ab.upper_bound
        status = "OPTIMAL" if value >= upper - 1e-9 else "BOUNDED"
        extra = []
    elif args.alg == "ibp":
        r = ibp(build_factor_graph(net, ev))
        a = r.bit_decisions
        value, upper = joint_log_probability(net, a, ev), None
        status = "CONVERGED" if r.converged else "ITERATION_LIMIT"
        extra = [f"iterations: {r.iterations_run}"]
    else:
        cfg = SearchConfig(i_bound=args.i, time_bound=args.time_bound,
                           memory_cap=args.memory_cap, seed=args.seed)
        res = (bbmb if args.alg == "bbmb" else bfmb)(net, d, ev, cfg)
        status, value, upper, a = res.status, res.best_log_prob, res.upper_bound, res.best_assignment
        extra = [
            f"nodes: {res.nodes_expanded}",
            f"preprocess_s: {res.preprocess_seconds:.6f}",
            f"search_s: {res.search_seconds:.6f}",
        ]
    if truth is not None:
        extra.append(f"ber: {bit_error_rate(a[: len(truth)], truth)!r}")
    _print_solution(status, value, upper, a, extra)
    return EXIT_OK


def _parse_files(specs) -> tuple[tuple[str, str | None], ...]:
    out = []
    for s in specs:
        net, _, ev = s.partition(":")
        out.append((net, ev or None))
    return tuple(out)


def cmd_bench(args) -> int:
    cfg = bench.BenchConfig(
        problem=args.problem,
        algorithms=args.alg,
        i_bounds=args.i,
        time_bound=args.time_bound,
        samples=args.samples,
        seed=args.seed,
        reference=args.reference,
        workers=args.workers,
        memory_cap=args.memory_cap,
        k=args.k,
        parents=args.parents,
        sigma=args.sigma,
        n=args.n,
        c=args.c,
        p_noise=args.p_noise,
        p_leak=args.p_leak,
        n_evidence=args.evidence_count,
        files=_parse_files(args.files),
    )
    report = bench.run_suite(cfg)
    for p in bench.emit_csv(report, args.out_dir):
        print(p)
    return EXIT_OK


def cmd_verify(args) -> int:
    net, ev = _load(args.network, args.evidence)
    exact, _ = brute_force_mpe(net, ev)
    d = min_degree_ordering(moralize(net))
    w = induced_width(moralize(net), d)
    ok = True
    for i in args.i or range(1, net.n + 1):
        ab = approx_mpe(net, d, ev, i)
        sandwich = ab.lower_bound <= exact + 1e-9 and exact <= ab.upper_bound + 1e-9
        cfg = SearchConfig(i_bound=i, time_bound=args.time_bound)
        pre = preprocess(net, d, ev, i)
        found = [bbmb(net, d, ev, cfg, pre), bfmb(net, d, ev, cfg, pre)]
        match = all(str(r.status) == "OPTIMAL" and abs(r.best_log_prob - exact) <= 1e-9 for r in found)
        ok &= sandwich and match
        print(f"i={i} lower={ab.lower_bound!r} exact={exact!r} upper={ab.upper_bound!r} "
              f"bounds={'ok' if sandwich else 'FAIL'} search={'ok' if match else 'FAIL'}")
    print(f"induced_width: {w}")
    print("verify: " + ("ok" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_INVALID


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        where = f"{exc.filename}: " if getattr(exc, "filename", None) else ""
        print(f"mbsearch: I/O error: {where}{exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except (NetworkError, ValueError, MemoryLimitError, CompletionSpaceError) as exc:
        print(f"mbsearch: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
