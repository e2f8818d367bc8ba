"""Command-line interface.

Exit status: 0 success, 2 usage error, 3 validation error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import gf254
from .gf254 import BN254, from_hex, to_hex
from .merkle import (
    batched_level_cost,
    build_tree,
    format_proof,
    parse_proof,
    prove_inclusion,
    read_leaves,
    verify_inclusion,
)
from .mimc import DEFAULT_SEED, derive_constants, encrypt, hash_bytes, load_constants
from .pipesim import (
    CPU_LATENCY_US,
    DEVICE_CLOCKS_MHZ,
    VARIANTS,
    CipherRequest,
    format_table,
    preset,
    simulate_cipher,
    speedup_vs_cpu,
)

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _seed_bytes(seed: str) -> bytes:
    return DEFAULT_SEED if seed == "default" else seed.encode()


def _constants(args):
    if args.constants_file:
        return load_constants(args.constants_file)
    return derive_constants(_seed_bytes(args.constants_seed))


def _emit(args, record: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)


def _read_input(args) -> bytes:
    sources = [s for s in ("hex", "file", "text") if getattr(args, s) is not None]
    if len(sources) > 1:
        raise UsageError("give exactly one input source (--hex, --file, --text or stdin)")
    if args.hex is not None:
        s = args.hex[2:] if args.hex.lower().startswith("0x") else args.hex
        try:
            return bytes.fromhex(s)
        except ValueError:
            raise UsageError(f"--hex is not valid hex: {args.hex!r}") from None
    if args.file is not None:
        return Path(args.file).read_bytes()
    if args.text is not None:
        return args.text.encode()
    return sys.stdin.buffer.read()


# ---------------------------------------------------------------------------
# subcommands


def cmd_hash(args) -> int:
    message = _read_input(args)
    digest = hash_bytes(message, _constants(args), BN254, gf254.get_backend(args.backend))
    _emit(args, {"digest": to_hex(digest), "bytes": len(message), "backend": args.backend}, to_hex(digest))
    return EXIT_OK


def cmd_encrypt(args) -> int:
    x = from_hex(args.x)
    k = from_hex(args.k)
    y = encrypt(x, k, _constants(args), BN254, gf254.get_backend(args.backend), final_key=not args.no_final_key)
    _emit(args, {"ciphertext": to_hex(y), "backend": args.backend}, to_hex(y))
    return EXIT_OK


def cmd_constants(args) -> int:
    if args.validate:
        rc = load_constants(args.validate)
        _emit(args, {"valid": True, "count": len(rc), "source": rc.seed_id}, f"ok: {len(rc)} constants")
        return EXIT_OK
    rc = derive_constants(_seed_bytes(args.seed))
    if args.out:
        Path(args.out).write_text(rc.to_text())
    if args.count:
        _emit(args, {"count": len(rc), "seed": rc.seed_id}, str(len(rc)))
    elif args.format == "json":
        for i, c in enumerate(rc):
            print(json.dumps({"index": i, "constant": to_hex(c)}))
    elif not args.out:
        sys.stdout.write(rc.to_text())
    return EXIT_OK


def _random_batch(n: int, seed: int):
    rng = random.Random(seed)
    return [CipherRequest(rng.randrange(BN254.p), rng.randrange(BN254.p)) for _ in range(n)]


def _run_simulation(variant, batch_size, mhz, chunk_width, rng_seed, constants):
    cfg = preset(variant)
    if chunk_width:
        cfg = cfg.with_chunk_width(chunk_width)
    n = cfg.batch if batch_size is None else batch_size
    if n < 1:
        raise UsageError("--batch must be at least 1")
    batch = _random_batch(n, rng_seed)
    outputs, report, trace = simulate_cipher(cfg, batch, constants, BN254, mhz)
    verified = all(
        out == encrypt(req.x, req.k, constants, BN254, gf254.mul_mod_naive) for out, req in zip(outputs, batch)
    )
    return cfg, report, trace, verified


def _report_record(report, verified=None):
    rec = report.to_record()
    rec["speedup_vs_cpu"] = round(speedup_vs_cpu(report, CPU_LATENCY_US), 4)
    if verified is not None:
        rec["verified"] = verified
    return rec


def cmd_simulate(args) -> int:
    constants = _constants(args)
    variants = VARIANTS if args.all else [args.variant]
    if args.all and (args.batch is not None or args.mhz is not None):
        raise UsageError("--all uses preset batch sizes and clocks")
    reports = []
    for v in variants:
        cfg, report, trace, verified = _run_simulation(v, args.batch, args.mhz, args.chunk_width, args.rng_seed, constants)
        reports.append(report)
        if args.format == "json":
            print(json.dumps(_report_record(report, verified), sort_keys=True))
        if not verified:
            print(f"error: {v} simulator output disagrees with the functional cipher", file=sys.stderr)
            return EXIT_VALIDATION
        if args.trace:
            with open(args.trace, "w", newline="") as fh:
                trace.write_csv(fh)
        if args.plot:
            from .plotting import plot_occupancy

            plot_occupancy(trace, args.plot, max_cycles=args.plot_cycles)
    if args.format != "json":
        print(format_table(reports))
    return EXIT_OK


def _time_backend(name, iterations, constants, threads):
    mul = gf254.get_backend(name)
    rng = random.Random(1234)
    inputs = [(rng.randrange(BN254.p), rng.randrange(BN254.p)) for _ in range(iterations)]

    def one(pair):
        return encrypt(pair[0], pair[1], constants, BN254, mul)

    t0 = time.perf_counter()
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            outputs = list(ex.map(one, inputs))
    else:
        outputs = [one(pair) for pair in inputs]
    elapsed = time.perf_counter() - t0
    return outputs, elapsed / iterations * 1e6


def cmd_bench(args) -> int:
    if args.iterations < 1:
        raise UsageError("--iterations must be at least 1")
    constants = _constants(args)
    results = {}
    reference = None
    for name in args.backends:
        outputs, us = _time_backend(name, args.iterations, constants, args.threads)
        if reference is None:
            reference = outputs
        elif outputs != reference:
            print(f"error: backend {name} disagrees with {args.backends[0]}", file=sys.stderr)
            return EXIT_VALIDATION
        results[name] = us
        _emit(args, {"kind": "software", "backend": name, "iterations": args.iterations, "latency_us": round(us, 3)},
              f"software  {name:<8} {us:>12.1f} us/encrypt  ({args.iterations} iterations)")

    cfg = preset("AMZ-1")
    cycles = cfg.expected_cycles(BN254.r)
    for device, mhz in DEVICE_CLOCKS_MHZ.items():
        from .pipesim import timing_report

        rep = timing_report(cfg, cycles, cfg.batch, mhz)
        sp = speedup_vs_cpu(rep, CPU_LATENCY_US)
        _emit(
            args,
            {"kind": "simulated", "variant": cfg.variant, "device": device, "mhz": mhz,
             "latency_us": round(rep.amortized_latency_us, 6), "cpu_latency_us": CPU_LATENCY_US,
             "speedup": round(sp, 4)},
            f"simulated {cfg.variant} on {device:<18} {mhz:>7.2f} MHz {rep.amortized_latency_us:>8.3f} us  "
            f"speedup {sp:.2f}x vs CPU {CPU_LATENCY_US} us",
        )
    return EXIT_OK


def cmd_report(args) -> int:
    """Simulate every design; write CSV/JSON-lines tables and figures."""
    from .plotting import plot_design_comparison, plot_device_latency, plot_occupancy

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    constants = _constants(args)
    reports = []
    traces = {}
    for v in VARIANTS:
        _, report, trace, verified = _run_simulation(v, None, None, None, args.rng_seed, constants)
        if not verified:
            print(f"error: {v} simulator output disagrees with the functional cipher", file=sys.stderr)
            return EXIT_VALIDATION
        reports.append(report)
        traces[v] = trace

    records = [_report_record(r, True) for r in reports]
    fields = list(records[0])
    with open(out / "designs.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(records)
    (out / "designs.jsonl").write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records))

    amz1 = reports[VARIANTS.index("AMZ-1")]
    device_rows = []
    for device, mhz in DEVICE_CLOCKS_MHZ.items():
        lat = amz1.total_cycles / (amz1.batch_size * mhz)
        device_rows.append((device, mhz, lat))
    with open(out / "devices.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["device", "mhz", "latency_us", "speedup_vs_cpu"])
        w.writerow(["cpu", "", CPU_LATENCY_US, 1.0])
        for device, mhz, lat in device_rows:
            w.writerow([device, mhz, round(lat, 6), round(CPU_LATENCY_US / lat, 4)])

    plot_design_comparison(reports, out / "designs.png")
    plot_device_latency(device_rows, CPU_LATENCY_US, out / "devices.png")
    plot_occupancy(traces["AMZ-1"], out / "occupancy_AMZ-1.png", max_cycles=args.plot_cycles)
    plot_occupancy(traces["AMZ-2"], out / "occupancy_AMZ-2.png", max_cycles=args.plot_cycles)

    if args.format == "json":
        for r in records:
            print(json.dumps(r, sort_keys=True))
    else:
        print(format_table(reports))
        print(f"wrote tables and figures to {out}")
    return EXIT_OK


def cmd_merkle_root(args) -> int:
    leaves = read_leaves(args.leaves)
    constants = _constants(args)
    tree = build_tree(leaves, constants, BN254, gf254.get_backend(args.backend))
    record = {"root": to_hex(tree.root), "leaves": len(leaves), "depth": tree.depth}
    text = to_hex(tree.root)
    if args.cost:
        rep = batched_level_cost(tree, preset(args.cost), constants)
        record.update(variant=rep.variant, cycles=rep.total_cycles, hashes=rep.batch_size)
        text += f"\n{rep.variant}: {rep.total_cycles} cycles for {rep.batch_size} node hashes"
    _emit(args, record, text)
    return EXIT_OK


def cmd_merkle_prove(args) -> int:
    leaves = read_leaves(args.leaves)
    tree = build_tree(leaves, _constants(args), BN254, gf254.get_backend(args.backend))
    if not 0 <= args.index < len(leaves):
        raise UsageError(f"--index must be in [0, {len(leaves)})")
    path = prove_inclusion(tree, args.index)
    if args.format == "json":
        print(json.dumps({"index": args.index, "path": [to_hex(n) for n in path], "root": to_hex(tree.root)}))
    else:
        sys.stdout.write(format_proof(args.index, path))
    return EXIT_OK


def cmd_merkle_verify(args) -> int:
    index, path = parse_proof(Path(args.proof).read_text())
    ok = verify_inclusion(
        from_hex(args.root), from_hex(args.leaf), index, path, _constants(args), BN254, gf254.get_backend(args.backend)
    )
    _emit(args, {"valid": ok, "index": index}, "valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser


def _global_options(defaults: bool) -> argparse.ArgumentParser:
    sup = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--backend", choices=sorted(gf254.BACKENDS), default=sup("barrett"),
                   help="modular multiplication back end (default: barrett)")
    p.add_argument("--constants-seed", default=sup("default"),
                   help="seed for derived round constants ('default' = built-in seed)")
    p.add_argument("--constants-file", default=sup(None), help="load round constants from a file instead")
    p.add_argument("--format", choices=("text", "json"), default=sup("text"),
                   help="text or json-lines output")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimc-accel", description=__doc__.splitlines()[0],
                                     parents=[_global_options(True)])
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_options(False)]

    p = sub.add_parser("hash", parents=common, help="MiMC Miyaguchi-Preneel hash of a message")
    p.add_argument("--hex", help="message as hex bytes")
    p.add_argument("--file", help="read message from a file")
    p.add_argument("--text", help="message as UTF-8 text")
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("encrypt", parents=common, help="MiMC-p/p encryption of one block")
    p.add_argument("x", help="plaintext field element (hex)")
    p.add_argument("k", help="key field element (hex)")
    p.add_argument("--no-final-key", action="store_true", help="omit the key addition after the last round")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("constants", parents=common, help="derive, print or validate round constants")
    p.add_argument("--seed", default="default")
    p.add_argument("--count", action="store_true", help="print only the number of constants")
    p.add_argument("--validate", metavar="FILE", help="check a constants file")
    p.add_argument("--out", metavar="FILE", help="write the derived constants to a file")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("simulate", parents=common, help="cycle-accurate simulation of a design")
    p.add_argument("--variant", default="AMZ-1", help=f"one of {', '.join(VARIANTS)}")
    p.add_argument("--all", action="store_true", help="simulate every preset")
    p.add_argument("--batch", type=int, help="number of requests (default: full accept window)")
    p.add_argument("--mhz", type=float, help="clock frequency (default: the preset's)")
    p.add_argument("--chunk-width", type=int, choices=gf254.SUPPORTED_CHUNK_WIDTHS)
    p.add_argument("--rng-seed", type=int, default=0, help="seed for the random request batch")
    p.add_argument("--trace", metavar="CSV", help="dump the stage trace")
    p.add_argument("--plot", metavar="PNG", help="render unit occupancy")
    p.add_argument("--plot-cycles", type=int, default=120)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", parents=common, help="software timing next to simulated hardware latency")
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--backends", nargs="+", choices=sorted(gf254.BACKENDS), default=["naive", "barrett", "peasant"])
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", parents=common, help="simulate all designs; write tables and figures")
    p.add_argument("--out-dir", default="report")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--plot-cycles", type=int, default=120)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("merkle-root", parents=common, help="Merkle root of hex leaves, one per line")
    p.add_argument("--leaves", required=True)
    p.add_argument("--cost", metavar="VARIANT", help="also report batched cycle cost on a design")
    p.set_defaults(func=cmd_merkle_root)

    p = sub.add_parser("merkle-prove", parents=common, help="inclusion proof for one leaf")
    p.add_argument("--leaves", required=True)
    p.add_argument("--index", type=int, required=True)
    p.set_defaults(func=cmd_merkle_prove)

    p = sub.add_parser("merkle-verify", parents=common, help="check an inclusion proof")
    p.add_argument("--root", required=True)
    p.add_argument("--leaf", required=True)
    p.add_argument("--proof", required=True, help="proof file: index, then path nodes bottom-up")
    p.set_defaults(func=cmd_merkle_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.constants_file and args.constants_seed != "default":
        parser.error("--constants-seed and --constants-file are mutually exclusive")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, IndexError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
