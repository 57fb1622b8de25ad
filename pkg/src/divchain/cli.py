"""Command-line front end.

Example
-------
divchain generate --terms 10
divchain verify --terms 100000
divchain stats --terms 100000 --which growth --format json
divchain gamma --prime 3
divchain schedule --kmax 12
divchain baseline --terms 12

Exit codes: 0 success, 1 usage or domain error, 2 chain-builder failure
(the message names the prime), 3 64-bit overflow, 4 validation failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import analysis
from .arith import sieve_primes
from .errors import ChainError, DomainError, GammaBuildError, NatOverflowError, ScheduleError
from .gamma import DEFAULT_NODE_BUDGET, STRATEGIES, GammaStore, check_contract
from .oracle import recheck_values
from .permutation import FStream, StreamState, resolve_schedule

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GAMMA = 2
EXIT_OVERFLOW = 3
EXIT_INVALID = 4

CACHE_ENV = "DIVCHAIN_CACHE_DIR"
FORMATS = ("lines", "json", "csv")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="lines")
    common.add_argument("--out", type=Path, help="write to this file instead of stdout")
    common.add_argument("--cache-dir", type=Path, default=os.environ.get(CACHE_ENV) or None,
                        help=f"directory for built chains (default: ${CACHE_ENV}, else memory only)")
    common.add_argument("--node-budget", type=_positive, default=DEFAULT_NODE_BUDGET)
    common.add_argument("--strategy", choices=STRATEGIES, default="blocks")
    common.add_argument("--jobs", type=_positive, default=1, help="parallel chain builds")

    parser = _Parser(prog="divchain", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", parents=[common], help="stream f(1..N)")
    p.add_argument("--terms", type=_positive, required=True)
    p.add_argument("--checkpoint", type=Path, help="resume from / save stream state here")

    p = sub.add_parser("verify", parents=[common], help="re-validate a prefix of f")
    p.add_argument("--terms", type=_positive, required=True)
    p.add_argument("--input", type=Path, help="verify values from this file instead of regenerating")
    p.add_argument("--checkpoint", type=Path, help="replay and compare a saved stream state")

    p = sub.add_parser("stats", parents=[common], help="growth, lcm or coverage report")
    p.add_argument("--terms", type=_positive, required=True)
    p.add_argument("--which", choices=("growth", "lcm", "coverage"), required=True)
    p.add_argument("--nlogn", action="store_true", help="lcm only: emit lcm/(n ln n) series")

    p = sub.add_parser("gamma", parents=[common], help="build and certify G(p)")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--prime", type=_positive)
    grp.add_argument("--upto", type=_positive)

    p = sub.add_parser("schedule", parents=[common], help="insertion decisions (k, q_k)")
    p.add_argument("--kmax", type=_positive, required=True)

    p = sub.add_parser("baseline", parents=[common], help="the naive quadratic chain-permutation")
    p.add_argument("--terms", type=_positive, required=True)
    return parser


def _store(args) -> GammaStore:
    return GammaStore(cache_dir=args.cache_dir, strategy=args.strategy, node_budget=args.node_budget)


@contextlib.contextmanager
def _output(args, append: bool = False):
    if args.out is None:
        yield sys.stdout
    else:
        with open(args.out, "a" if append else "w", newline="") as fh:
            yield fh


def _write_values(out: TextIO, fmt: str, values: Sequence[int], header: bool = True) -> None:
    if fmt == "json":
        out.write(json.dumps([str(v) for v in values]) + "\n")
    else:
        if fmt == "csv" and header:
            out.write("value\n")
        for v in values:
            out.write(f"{v}\n")


def _read_values(path: Path) -> list[int]:
    text = path.read_text().strip()
    if not text:
        return []
    if text.startswith("["):
        return [int(v) for v in json.loads(text)]
    values = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line == "value":
            continue
        if line.startswith("{"):
            values.append(int(json.loads(line)["f"]))
        else:
            values.append(int(line))
    return values


# -- subcommands ----------------------------------------------------------------


def cmd_generate(args) -> int:
    store = _store(args)
    resuming = args.checkpoint is not None and args.checkpoint.exists()
    state = StreamState.load(args.checkpoint) if resuming else StreamState()
    stream = FStream(state, store, prefetch_jobs=args.jobs)
    with _output(args, append=resuming) as out:
        if args.format == "csv" and not resuming:
            out.write("value\n")
        while state.position < args.terms:
            term = stream.next_term()
            out.write(term.to_json() + "\n" if args.format == "json" else f"{term.value}\n")
    if args.checkpoint is not None:
        state.save(args.checkpoint)
    return EXIT_OK


def cmd_verify(args) -> int:
    store = _store(args)
    if args.checkpoint is not None:
        saved = StreamState.load(args.checkpoint)
        fresh = FStream(store=store)
        for _ in range(saved.position):
            fresh.next_term()
        ref = fresh.state
        for name in ("position", "last_value", "current_prime"):
            if getattr(ref, name) != getattr(saved, name):
                print(f"INVALID checkpoint field {name}: {getattr(saved, name)} != {getattr(ref, name)}")
                return EXIT_INVALID
        if list(ref.buffer) != list(saved.buffer) or ref.schedule.insertions != saved.schedule.insertions:
            print("INVALID checkpoint buffer or schedule differs from replay")
            return EXIT_INVALID
        values = fresh.take(args.terms)
        values = [saved.last_value] + values if saved.position else values
    elif args.input is not None:
        values = _read_values(args.input)[: args.terms]
    else:
        values = FStream(store=store).take(args.terms)
    report = recheck_values(values)
    if not report:
        print(f"INVALID index={report.index} ({report.reason})")
        return EXIT_INVALID
    cov = analysis.coverage_of(values)
    with _output(args) as out:
        if args.format == "json":
            out.write(json.dumps({"valid": True, "terms": str(len(values)), "min_missing": str(cov.min_missing)}) + "\n")
        else:
            out.write(f"valid terms={len(values)} min_missing={cov.min_missing}\n")
    return EXIT_OK


def _emit_stats(out: TextIO, fmt: str, stats, series) -> None:
    if fmt == "json":
        out.write(analysis.to_json(stats) + "\n")
    elif fmt == "csv":
        out.write(analysis.rows_to_csv(["n", "ratio"], series))
    else:
        for key, value in stats.to_dict().items():
            out.write(f"{key}={value}\n")


def cmd_stats(args) -> int:
    values = FStream(store=_store(args), prefetch_jobs=args.jobs).take(args.terms)
    with _output(args) as out:
        if args.which == "growth":
            _emit_stats(out, args.format, analysis.growth_report(args.terms, values),
                        analysis.growth_ratio_series(values))
        elif args.which == "lcm":
            stats = analysis.lcm_report(args.terms, values)
            if args.nlogn:
                series = analysis.lcm_nlogn_series(values)
            else:
                lcms = analysis.lcm_values(values)
                series = [(n, lcms[n - 1] / analysis.n_log2(n)) for n in range(2, len(lcms) + 1)]
            _emit_stats(out, args.format, stats, series)
        else:
            cov = analysis.coverage_report(args.terms, values)
            if args.format == "csv":
                out.write(analysis.rows_to_csv(["horizon", "min_missing", "present_up_to"],
                                               [(cov.horizon, cov.min_missing, cov.present_up_to)]))
            else:
                _emit_stats(out, args.format, cov, None)
    return EXIT_OK


def cmd_gamma(args) -> int:
    store = _store(args)
    with _output(args) as out:
        if args.prime is not None:
            gamma = store.get(args.prime)
            failed = check_contract(gamma.p, gamma.chain)
            status = "P1P2P3P4 OK" if not failed else "FAILED " + ",".join(failed)
            if args.format == "json":
                out.write(json.dumps({"p": str(gamma.p), "chain": [str(v) for v in gamma.chain],
                                      "check": status}) + "\n")
            else:
                _write_values(out, args.format, gamma.chain)
                if args.format == "lines":
                    out.write(status + "\n")
                else:
                    print(status, file=sys.stderr)
            return EXIT_OK if not failed else EXIT_INVALID
        store.prefetch(sieve_primes(args.upto) if args.upto >= 2 else [], args.jobs)
        rows = analysis.length_bound_report(max(args.upto, 3), store)
        rows = [r for r in rows if r.p <= args.upto]
        if args.format == "json":
            out.write(analysis.to_json([vars(r) for r in rows]) + "\n")
        elif args.format == "csv":
            out.write(analysis.rows_to_csv(["p", "length", "ratio", "running_min"],
                                           [(r.p, r.length, r.ratio, "" if r.running_min is None else r.running_min)
                                            for r in rows]))
        else:
            for r in rows:
                out.write(f"{r.p} {r.length} {r.ratio:.6f} {'' if r.running_min is None else f'{r.running_min:.6f}'}".rstrip() + "\n")
    return EXIT_OK


def cmd_schedule(args) -> int:
    schedule = resolve_schedule(args.kmax, _store(args))
    with _output(args) as out:
        if args.format == "json":
            out.write(json.dumps([{"k": str(k), "q": str(q)} for k, q in schedule.insertions]) + "\n")
        elif args.format == "csv":
            out.write(analysis.rows_to_csv(["k", "q"], schedule.insertions))
        else:
            for k, q in schedule.insertions:
                out.write(f"{k} {q}\n")
    return EXIT_OK


def cmd_baseline(args) -> int:
    res = analysis.baseline_naive(args.terms)
    with _output(args) as out:
        if args.format == "json":
            out.write(json.dumps({"values": [str(v) for v in res.values],
                                  "window": [str(w) for w in res.window],
                                  "window_max": repr(res.window_max),
                                  "argmax_n": str(res.argmax_n)}) + "\n")
        else:
            _write_values(out, args.format, res.values)
    if args.format != "json":
        print(f"window_max f(n)/n^2 over [{res.window[0]}, {res.window[1]}] = {res.window_max:.6f}",
              file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "verify": cmd_verify,
    "stats": cmd_stats,
    "gamma": cmd_gamma,
    "schedule": cmd_schedule,
    "baseline": cmd_baseline,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except GammaBuildError as exc:
        print(f"error: chain builder failed at prime {exc.p}: {exc}", file=sys.stderr)
        return EXIT_GAMMA
    except NatOverflowError as exc:
        print(f"error: overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except ChainError as exc:
        print(f"INVALID index={exc.violation.index} ({exc.violation.kind})", file=sys.stderr)
        return EXIT_INVALID
    except (DomainError, ScheduleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
