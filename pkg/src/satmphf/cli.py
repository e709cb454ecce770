"""Command-line frontend: build, inspect, query and benchmark MPHFs."""

from __future__ import annotations

import argparse
import math
import struct
import sys
import time
from typing import Sequence

import numpy as np

from . import bench, container
from .encoding import emit_dimacs
from .errors import (BuildFailed, CorruptStructure, DuplicateKey, InvalidArgument, MalformedFile,
                     ModelVerificationError, SolverCrash, SolveTimeout, UnsatExhausted)
from .hashing import bits_for, derive_literal_table
from .matching_mphf import (DEFAULT_BLOCK_SIZE, build_matching_mphf, build_sharded,
                            bits_per_key, verify_bijection)
from .sat_mphf import ENCODINGS, build_sat_mphf
from .solver import SolverConfig

EXIT_OK, EXIT_USAGE, EXIT_BUILD, EXIT_IO, EXIT_SOLVER = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def load_keys(path, format: str = "text") -> list[bytes]:
    """Keys in file order.  Text: LF-separated UTF-8 lines.  Binary: u32-LE length + bytes records."""
    with open(path, "rb") as fh:
        data = fh.read()
    keys: list[bytes] = []
    if format == "text":
        if not data:
            return []
        if data.endswith(b"\n"):
            data = data[:-1]
        for line in data.split(b"\n"):
            if not line:
                raise MalformedFile(f"{path}: empty line {len(keys) + 1}")
            try:
                line.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise MalformedFile(f"{path}: line {len(keys) + 1} is not UTF-8") from exc
            keys.append(line)
    elif format == "binary":
        at = 0
        while at < len(data):
            if at + 4 > len(data):
                raise MalformedFile(f"{path}: truncated length prefix of record {len(keys) + 1}")
            (size,) = struct.unpack_from("<I", data, at)
            at += 4
            if at + size > len(data):
                raise MalformedFile(f"{path}: record {len(keys) + 1} runs past end of file")
            keys.append(data[at:at + size])
            at += size
    else:
        raise InvalidArgument(f"unknown key format {format!r}")
    seen: set[bytes] = set()
    for line, key in enumerate(keys, 1):
        if key in seen:
            raise DuplicateKey(key, line)
        seen.add(key)
    return keys


def _write(text: str, out) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _bits(args, n: int) -> int:
    if args.bits is not None:
        return args.bits
    if args.bpk is not None:
        return max(bits_for(n), math.ceil(args.bpk * n))
    return max(bits_for(n), math.ceil(n / math.log(2)))


def _solver(args) -> SolverConfig:
    if args.solver == "external" and not args.solver_cmd:
        raise UsageError("--solver external needs --solver-cmd")
    return SolverConfig(args.solver, args.solver_cmd, args.time_limit)


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def cmd_sat_encode(args) -> int:
    keys = load_keys(args.keys, args.key_format)
    table = derive_literal_table(keys, _bits(args, len(keys)), args.seed)
    _write(emit_dimacs(ENCODINGS[args.encoding](table)), args.out)
    return EXIT_OK


def _need_out(args) -> None:
    if not args.out:
        raise UsageError("--out FILE is required for builds")


def cmd_sat_build(args) -> int:
    _need_out(args)
    keys = load_keys(args.keys, args.key_format)
    m = _bits(args, len(keys))
    h = build_sat_mphf(keys, m, args.seed, args.encoding, _solver(args), args.max_reseeds)
    container.save(h, args.out)
    print(f"sat mphf: n={h.n} m={h.m} bits/key={h.m / h.n:.4f} seed={h.seed}")
    return EXIT_OK


def cmd_match_build(args) -> int:
    _need_out(args)
    keys = load_keys(args.keys, args.key_format)
    t0 = time.perf_counter()
    if args.block_size is not None or len(keys) > DEFAULT_BLOCK_SIZE:
        h = build_sharded(keys, args.block_size or DEFAULT_BLOCK_SIZE, args.seed, args.max_reseeds)
    else:
        h = build_matching_mphf(keys, args.seed, args.max_reseeds)
    container.save(h, args.out)
    print(f"{container.kind_name(h)} mphf: n={h.n} bits/key={bits_per_key(h):.4f} "
          f"seconds={time.perf_counter() - t0:.3f}")
    return EXIT_OK


def cmd_query(args) -> int:
    h = container.load(args.mphf)
    keys = load_keys(args.keys, args.key_format)
    lines = [f"{k.decode('utf-8', 'backslashreplace')}\t{h.query(k)}" for k in keys]
    _write("".join(line + "\n" for line in lines), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    h = container.load(args.mphf)
    keys = load_keys(args.keys, args.key_format)
    if verify_bijection(h, keys):
        print("bijection: ok")
        return EXIT_OK
    print("bijection: FAILED")
    return EXIT_BUILD


def cmd_info(args) -> int:
    h = container.load(args.mphf)
    print(f"kind: {container.kind_name(h)}")
    print(f"n: {h.n}")
    print(f"payload_bits: {container.payload_bits(h)}")
    print(f"bits_per_key: {container.payload_bits(h) / h.n:.4f}")
    if container.kind_name(h) == "sat":
        print(f"m: {h.m}\nk: {h.k}\nencoding: {h.encoding}")
    elif container.kind_name(h) == "sharded":
        print(f"blocks: {len(h.blocks)}")
    else:
        print(f"k: {h.k}\nfilter_slots: {h.filter.s}")
    return EXIT_OK


def cmd_bench_phase(args) -> int:
    rows = bench.phase_experiment(_ints(args.n), _floats(args.bpk_grid), args.trials,
                                  _solver(args), args.time_limit, args.encoding, args.seed)
    _write(bench.phase_csv(rows), args.out)
    return EXIT_OK


def cmd_bench_weight(args) -> int:
    res = bench.weight_experiment(_ints(args.n), args.trials, args.seed)
    rows = [(n, args.trials, f"{w:.6f}") for n, w in res.items()]
    _write(bench.to_csv(bench.WEIGHT_HEADER, rows), args.out)
    return EXIT_OK


def cmd_bench_scaling(args) -> int:
    res = bench.hungarian_scaling(_ints(args.n), args.trials, args.seed)
    rows = [(n, args.trials, f"{t:.6f}") for n, t in res.items()]
    _write(bench.to_csv(bench.SCALING_HEADER, rows), args.out)
    return EXIT_OK


def cmd_bench_query(args) -> int:
    rows = []
    for n in _ints(args.n):
        keys = bench.random_keys(np.random.default_rng([args.seed, n]), n)
        h = build_sharded(keys, args.block_size or DEFAULT_BLOCK_SIZE, args.seed)
        ns = bench.query_throughput(h, keys, args.queries, args.seed)
        rows.append((n, args.queries, f"{ns:.1f}"))
    _write(bench.to_csv(bench.QUERY_HEADER, rows), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="satmphf", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def keyed(sp, required=True):
        sp.add_argument("--keys", required=required, help="key file")
        sp.add_argument("--key-format", choices=("text", "binary"), default="text")

    def sizing(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--bpk", type=float, help="storage bits per key")
        g.add_argument("--bits", type=int, help="storage bits m")

    def solving(sp):
        sp.add_argument("--solver", choices=("builtin", "oracle", "external"), default="builtin")
        sp.add_argument("--solver-cmd", help='external solver command; "{cnf}" marks the file')
        sp.add_argument("--time-limit", type=float, help="seconds per solve")

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output file (default: stdout)")

    sp = sub.add_parser("sat-encode", help="write the CNF for a key file as DIMACS")
    keyed(sp); sizing(sp); common(sp)
    sp.add_argument("--encoding", choices=tuple(ENCODINGS), default="cubic")
    sp.set_defaults(run=cmd_sat_encode)

    sp = sub.add_parser("sat-build", help="build a SAT-based MPHF")
    keyed(sp); sizing(sp); solving(sp); common(sp)
    sp.add_argument("--encoding", choices=tuple(ENCODINGS), default="cubic")
    sp.add_argument("--max-reseeds", type=int, default=16)
    sp.set_defaults(run=cmd_sat_build)

    sp = sub.add_parser("match-build", help="build a matching + XORSAT-filter MPHF")
    keyed(sp); common(sp)
    sp.add_argument("--block-size", type=int, help="shard into blocks of about this many keys")
    sp.add_argument("--max-reseeds", type=int, default=16)
    sp.set_defaults(run=cmd_match_build)

    for name, fn, text in (("query", cmd_query, "print the index of every key"),
                           ("verify", cmd_verify, "check the keys map onto 1..n")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("mphf", help="container file")
        keyed(sp)
        sp.add_argument("--out")
        sp.set_defaults(run=fn)

    sp = sub.add_parser("info", help="describe a container file")
    sp.add_argument("mphf")
    sp.set_defaults(run=cmd_info)

    sp = sub.add_parser("bench-phase", help="SAT fraction vs bits per key (CSV)")
    solving(sp); common(sp)
    sp.add_argument("--n", default="10,16,20", help="comma-separated key counts")
    sp.add_argument("--bpk-grid", default="1.0,1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9,2.0")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--encoding", choices=tuple(ENCODINGS), default="cubic")
    sp.set_defaults(run=cmd_bench_phase, time_limit=10.0)

    sp = sub.add_parser("bench-weight", help="mean minimum matching weight per key (CSV)")
    common(sp)
    sp.add_argument("--n", default="1024,2048,4096")
    sp.add_argument("--trials", type=int, default=5)
    sp.set_defaults(run=cmd_bench_weight)

    sp = sub.add_parser("bench-scaling", help="matching runtime per n (CSV)")
    common(sp)
    sp.add_argument("--n", default="2048,4096,8192")
    sp.add_argument("--trials", type=int, default=3)
    sp.set_defaults(run=cmd_bench_scaling)

    sp = sub.add_parser("bench-query", help="query nanoseconds on a sharded build (CSV)")
    common(sp)
    sp.add_argument("--n", default="32768")
    sp.add_argument("--queries", type=int, default=100000)
    sp.add_argument("--block-size", type=int)
    sp.set_defaults(run=cmd_bench_query)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidArgument, ValueError) as exc:
        if isinstance(exc, (DuplicateKey, MalformedFile)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, CorruptStructure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SolverCrash, ModelVerificationError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (BuildFailed, UnsatExhausted, SolveTimeout) as exc:
        print(f"build failed: {exc}", file=sys.stderr)
        return EXIT_BUILD


if __name__ == "__main__":
    sys.exit(main())
