"""Acceptance criteria 1-8, one summary line each.

Each test records a ``[PASS]``/``[FAIL]`` line that conftest prints in the
terminal summary. Tolerances are the stated ones; nothing is relaxed here.
"""

import dataclasses
import math
import random
import time
from contextlib import contextmanager

import pytest

import conftest
import oracles
from mimc_accel.gf254 import (
    BN254,
    FieldParams,
    mul_mod_barrett,
    mul_mod_naive,
    mul_mod_peasant,
    mul_wide_chunked,
    round_count,
)
from mimc_accel.merkle import build_tree, prove_inclusion, verify_inclusion
from mimc_accel.mimc import encrypt
from mimc_accel.pipesim import (
    CPU_LATENCY_US,
    VARIANTS,
    CipherRequest,
    DesignConfig,
    preset,
    run_multiplier_pipeline,
    simulate_cipher,
    speedup_vs_cpu,
    timing_report,
)

P = BN254.p


@contextmanager
def criterion(n, label):
    try:
        yield
    except BaseException as exc:
        conftest.ACCEPTANCE_LINES.append(f"[FAIL] criterion {n}: {label} ({type(exc).__name__}: {exc})")
        print(conftest.ACCEPTANCE_LINES[-1])
        raise
    conftest.ACCEPTANCE_LINES.append(f"[PASS] criterion {n}: {label}")
    print(conftest.ACCEPTANCE_LINES[-1])


def random_batch(n, rng):
    return [CipherRequest(rng.randrange(P), rng.randrange(P)) for _ in range(n)]


# published cycles, clock (MHz), amortized latency (us), throughput (ops/s)
PUBLISHED = {
    "AMZ-1": (4823, 128.27, 2.892, 345_781),
    "AMZ-1a": (1547, 43.47, 8.896, 112_410),
    "AMZ-1b": (4189, 44.89, 93.316, 10_716),
    "AMZ-2": (3640, 125.75, 2.226, 449_236),
    "AMZ-2a": (1183, 39.97, 7.399, 135_153),
    "AMZ-2b": (3370, 44.07, 76.469, 13_077),
    "AMZ-3": (72028, 151.45, 475.589, 2_102),
}
DEVICE_LATENCY = {58.82: 6.307, 128.27: 2.892, 156.25: 2.374}


def test_criterion_1_cycle_counts(constants):
    with criterion(1, "cycle counts exact for all seven presets, < 1 s each"):
        rng = random.Random(1)
        for v in VARIANTS:
            cfg = preset(v)
            t0 = time.perf_counter()
            _, report, _ = simulate_cipher(cfg, random_batch(cfg.batch, rng), constants)
            elapsed = time.perf_counter() - t0
            assert report.total_cycles == PUBLISHED[v][0], (v, report.total_cycles)
            assert report.batch_size == cfg.batch
            assert elapsed < 1.0, (v, elapsed)
            if cfg.pipelined:
                assert report.total_cycles == BN254.r * (cfg.exp_depth * cfg.modmul_latency + 1)


def test_criterion_2_timing():
    with criterion(2, "amortized latency within 0.002 us, throughput within 0.15%"):
        for v, (cycles, mhz, latency, throughput) in PUBLISHED.items():
            cfg = preset(v)
            rep = timing_report(cfg, cycles, cfg.batch, mhz)
            assert abs(rep.amortized_latency_us - latency) <= 0.002, (v, rep.amortized_latency_us)
            assert abs(rep.throughput_ops_per_s / throughput - 1) <= 0.0015, (v, rep.throughput_ops_per_s)
        amz1 = preset("AMZ-1")
        for mhz, latency in DEVICE_LATENCY.items():
            rep = timing_report(amz1, 4823, 13, mhz)
            assert abs(rep.amortized_latency_us - latency) <= 0.002, (mhz, rep.amortized_latency_us)


def test_criterion_3_speedup():
    with criterion(3, "speedup >= 13 at 156.25 MHz, 5x at 58.82 MHz within 2%"):
        assert speedup_vs_cpu(2.374, 31.093) >= 13.0
        amz1 = preset("AMZ-1")
        fast = timing_report(amz1, 4823, 13, 156.25)
        assert speedup_vs_cpu(fast, CPU_LATENCY_US) >= 13.0
        slow = timing_report(amz1, 4823, 13, 58.82)
        s = speedup_vs_cpu(slow, CPU_LATENCY_US)
        assert abs(s / 5.0 - 1) <= 0.02, s


def test_criterion_4_oracle_equivalence():
    with criterion(4, "barrett == peasant == naive on 1e5 random + 25 boundary pairs and all of GF(251), < 60 s"):
        t0 = time.perf_counter()
        rng = random.Random(4)
        edge = [0, 1, 2, P - 2, P - 1]
        pairs = [(a, b) for a in edge for b in edge]
        pairs += [(rng.randrange(P), rng.randrange(P)) for _ in range(100_000)]
        mismatches = 0
        for a, b in pairs:
            want = mul_mod_naive(a, b)
            if mul_mod_barrett(a, b) != want or mul_mod_peasant(a, b) != want or want != a * b % P:
                mismatches += 1
        small = FieldParams.from_prime(251)
        for a in range(251):
            for b in range(251):
                want = a * b % 251
                if (
                    mul_mod_naive(a, b, small) != want
                    or mul_mod_barrett(a, b, small) != want
                    or mul_mod_peasant(a, b, small) != want
                ):
                    mismatches += 1
        elapsed = time.perf_counter() - t0
        assert mismatches == 0
        assert elapsed < 60, elapsed


def test_criterion_5_multiplier():
    with criterion(5, "chunked products exact on 1e5 pairs at W=27 and W=16; results at cycles 3,4,5"):
        rng = random.Random(5)
        for width in (27, 16):
            for _ in range(100_000):
                x, y = rng.getrandbits(255), rng.getrandbits(255)
                assert mul_wide_chunked(x, y, width) == x * y
        pairs = [(rng.getrandbits(254), rng.getrandbits(254)) for _ in range(3)]
        res = run_multiplier_pipeline(pairs)
        assert [r.done_cycle for r in res] == [3, 4, 5]
        assert [r.product for r in res] == [x * y for x, y in pairs]


def test_criterion_6_mimc_structure(constants, zeros):
    with criterion(6, "r = 91; zero-constant fixed points; simulator bit-matches encrypt on 13 requests per variant"):
        assert round_count(P, 7) == 91 == BN254.r
        assert 7 ** 90 < P <= 7 ** 91
        assert math.ceil(math.log(P) / math.log(7)) == 91
        assert encrypt(0, 0, zeros) == 0
        assert encrypt(1, 0, zeros) == 1
        rng = random.Random(6)
        requests = random_batch(13, rng)
        expected = [oracles.mimc(r.x, r.k, list(constants)) for r in requests]
        for v in VARIANTS:
            cfg = preset(v)
            outputs = []
            for start in range(0, 13, cfg.batch):
                outputs += simulate_cipher(cfg, requests[start:start + cfg.batch], constants).outputs
            assert outputs == expected, v


def test_criterion_7_excluded_measurements():
    with criterion(7, "resource, power and synthesis figures excluded; clock is an input"):
        banned = {"alms", "luts", "ffs", "bram", "dsps", "power", "power_w", "fmax"}
        fields = {f.name.lower() for f in dataclasses.fields(DesignConfig)}
        assert not fields & banned
        for v in VARIANTS:
            cfg = preset(v)
            assert not {k.lower() for k in cfg.to_record()} & banned
            rec = timing_report(cfg, 4823, cfg.batch).to_record()
            assert not {k.lower() for k in rec} & banned
        cfg = preset("AMZ-1")
        base = timing_report(cfg, 4823, 13, 100.0).amortized_latency_us
        for mhz in (1.0, 50.0, 200.0, 1234.5):
            assert timing_report(cfg, 4823, 13, mhz).amortized_latency_us == pytest.approx(base * 100.0 / mhz)
        assert cfg.with_clock(10.0).clock_mhz == 10.0


def test_criterion_8_merkle(constants):
    with criterion(8, "16-leaf root matches oracle; all proofs verify; every single-node corruption fails"):
        rng = random.Random(8)
        leaves = [rng.randrange(P) for _ in range(16)]
        tree = build_tree(leaves, constants)
        assert tree.root == oracles.merkle_root(leaves, list(constants))
        for i, leaf in enumerate(leaves):
            path = prove_inclusion(tree, i)
            assert len(path) == 4
            assert verify_inclusion(tree.root, leaf, i, path, constants)
            # corrupt the leaf, each path node, and the root in turn
            assert not verify_inclusion(tree.root, (leaf + 1) % P, i, path, constants)
            for j in range(len(path)):
                bad = list(path)
                bad[j] = (bad[j] + 1) % P
                assert not verify_inclusion(tree.root, leaf, i, bad, constants)
            assert not verify_inclusion((tree.root + 1) % P, leaf, i, path, constants)
        # corrupting any stored node changes the recomputed root
        for lvl, level in enumerate(tree.levels[:-1]):
            for j in range(len(level)):
                nodes = list(level)
                nodes[j] = (nodes[j] + 1) % P
                while len(nodes) > 1:
                    nodes = [oracles.mimc_mp([nodes[k], nodes[k + 1]], list(constants)) for k in range(0, len(nodes), 2)]
                assert nodes[0] != tree.root, (lvl, j)
