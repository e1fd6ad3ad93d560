"""Command line front end.

    rbr verify FILE [--error S] [--max-rounds N] [--witness PATH] [--jobs N]
    rbr oracle FILE --error S --max-rounds K --mode abstract|saturation
    rbr gen FAMILY [PARAM] [-o FILE]
    rbr simulate FILE --processes N --steps S --seed X [--trace]
    rbr check-witness FILE WITNESS [--error S]

Exit codes: 0 SAFE / CONFIRMED, 10 UNSAFE / REFUTED / covered,
11 INCONCLUSIVE, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

from .abstract import bounded_abstract_reach, format_coverable, round_saturation_reach
from .budget import BudgetExceeded
from .concrete import random_execution
from .generators import FAMILIES, gen_qbf, generate
from .protocol import ProtocolError, desugar, parse_protocol, print_protocol
from .qbf import QbfError, parse_qdimacs
from .verifier import MalformedWitness, format_witness, parse_witness, replay_witness, verify

EXIT_SAFE = 0
EXIT_USAGE = 2
EXIT_UNSAFE = 10
EXIT_INCONCLUSIVE = 11


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    verdict: str
    witness_path: str = None
    seconds: float = 0.0
    nodes: int = 0


def _load(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return parse_protocol(text)


def _error_state(p, name):
    name = name or p.error
    if name is None:
        raise UsageError("no error state: pass --error or declare one")
    if name not in p.states:
        raise UsageError(f"unknown state {name!r}")
    return name


def cmd_verify(args, out):
    p = _load(args.file)
    err = _error_state(p, args.error)
    started = time.perf_counter()
    try:
        v = verify(p, err, max_rounds=args.max_rounds, jobs=args.jobs)
    except BudgetExceeded as e:
        print(f"INCONCLUSIVE {e}", file=out)
        return EXIT_INCONCLUSIVE
    report = RunReport(v.status, args.witness, time.perf_counter() - started, v.nodes)
    print(str(v), file=out)
    if v.status == "UNSAFE" and args.witness:
        with open(args.witness, "w") as fh:
            fh.write(format_witness(v))
    print(f"nodes={report.nodes} time={report.seconds:.3f}s", file=sys.stderr)
    return {"SAFE": EXIT_SAFE, "UNSAFE": EXIT_UNSAFE}.get(v.status, EXIT_INCONCLUSIVE)


def cmd_oracle(args, out):
    p = _load(args.file)
    err = _error_state(p, args.error)
    K = args.max_rounds
    if args.mode == "saturation":
        try:
            rounds = round_saturation_reach(p, K)
        except ProtocolError as e:
            raise UsageError(str(e)) from None
        hit = None
        for info in rounds:
            print(str(info), file=out)
            if hit is None and err in info.states:
                hit = info.round
    else:
        try:
            locs = bounded_abstract_reach(p, K)
        except BudgetExceeded as e:
            print(f"INCONCLUSIVE {e}", file=out)
            return EXIT_INCONCLUSIVE
        if locs:
            print(format_coverable(locs), file=out)
        rounds = [l.round for l in locs if l.state == err]
        hit = min(rounds) if rounds else None
    if hit is None:
        print(f"{err} not covered within {K} rounds", file=out)
        return EXIT_INCONCLUSIVE
    print(f"{err} covered at round {hit}", file=out)
    return EXIT_UNSAFE


def cmd_gen(args, out):
    if args.family == "qbf":
        if args.param is None:
            raise UsageError("qbf needs a QDIMACS file")
        try:
            with open(args.param) as fh:
                phi = parse_qdimacs(fh.read())
        except OSError as e:
            raise UsageError(f"cannot read {args.param}: {e.strerror}") from None
        p = gen_qbf(phi)
    else:
        p = generate(args.family, args.param)
    text = print_protocol(p)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def cmd_simulate(args, out):
    p = desugar(_load(args.file))
    if args.processes < 1:
        raise UsageError("--processes must be at least 1")
    run = random_execution(p, args.processes, args.steps, args.seed, args.round_cap)
    if args.trace:
        out.write(run.dump())
    final = run.final(p)
    print(f"final: {final}", file=out)
    return 0


def cmd_check_witness(args, out):
    p = _load(args.file)
    err = _error_state(p, args.error)
    try:
        with open(args.witness) as fh:
            _, family = parse_witness(fh.read())
    except OSError as e:
        raise UsageError(f"cannot read {args.witness}: {e.strerror}") from None
    result = replay_witness(p, err, family)
    print(result, file=out)
    return 0 if result == "CONFIRMED" else EXIT_UNSAFE


def build_parser():
    ap = argparse.ArgumentParser(prog="rbr", description="Round-based register protocol verifier")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="decide whether the error state is coverable")
    v.add_argument("file")
    v.add_argument("--error")
    v.add_argument("--max-rounds", type=int)
    v.add_argument("--witness")
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(run=cmd_verify)

    o = sub.add_parser("oracle", help="bounded brute-force coverability")
    o.add_argument("file")
    o.add_argument("--error")
    o.add_argument("--max-rounds", type=int, required=True)
    o.add_argument("--mode", choices=("abstract", "saturation"), default="abstract")
    o.set_defaults(run=cmd_oracle)

    g = sub.add_parser("gen", help="write a protocol of a known family")
    g.add_argument("family", choices=sorted(FAMILIES) + ["qbf"])
    g.add_argument("param", nargs="?")
    g.add_argument("-o", "--output")
    g.set_defaults(run=cmd_gen)

    s = sub.add_parser("simulate", help="random concrete execution")
    s.add_argument("file")
    s.add_argument("--processes", type=int, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--round-cap", type=int)
    s.add_argument("--trace", action="store_true")
    s.set_defaults(run=cmd_simulate)

    c = sub.add_parser("check-witness", help="replay a witness file")
    c.add_argument("file")
    c.add_argument("witness")
    c.add_argument("--error")
    c.set_defaults(run=cmd_check_witness)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0
    try:
        return args.run(args, out)
    except (UsageError, ProtocolError, QbfError, MalformedWitness, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
