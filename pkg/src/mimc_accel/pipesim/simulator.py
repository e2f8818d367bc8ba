"""Cycle-stepped simulation of whole MiMC cipher and hash batches.

Every request runs as a generator that yields, once per clock cycle, the
hardware units it occupies. The engine admits request ``j`` at cycle ``j``
(inside the accept window), steps all live requests in lockstep and records
each occupancy in a :class:`StageTrace`, which refuses two requests on the
same unit in the same cycle.

``total_cycles`` in the report is the batch initiation interval: the cycle span
of one request, after which its slot can take a new request. For pipelined
designs the other requests finish ``batch - 1`` cycles later; that drain is
kept in ``StageTrace.makespan``.
"""

from __future__ import annotations

import csv
import io
from functools import lru_cache
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from ..gf254 import BN254, FieldElement, FieldParams, NotCanonicalError, add_mod
from ..mimc import pad_message
from .config import DesignConfig
from .datapath import modmul_program
from .report import CycleReport, timing_report

# Exponentiation schedules: each phase lists (unit, left, right, dest).
CHAIN4 = (
    ((0, "x", "x", "t1"),),
    ((0, "t1", "t1", "t2"),),
    ((0, "t2", "t1", "t3"),),
    ((0, "t3", "x", "y"),),
)
CHAIN3 = (
    ((0, "x", "x", "t1"),),
    ((0, "t1", "t1", "t2"), (1, "t1", "x", "t3")),
    ((0, "t2", "t3", "y"),),
)
CHAINS = {4: CHAIN4, 3: CHAIN3}


class BatchOverflowError(ValueError):
    pass


class HazardError(RuntimeError):
    pass


@dataclass(frozen=True)
class CipherRequest:
    x: int
    k: int

    def validate(self, params: FieldParams) -> None:
        for name in ("x", "k"):
            v = getattr(self, name)
            if not 0 <= v < params.p:
                raise NotCanonicalError(f"request {name} = {v:#x} is not canonical")


@dataclass
class StageTrace:
    """Per-cycle unit occupancy: rows of ``(cycle, unit, request, round)``.

    Round -1 marks global load/output cycles.
    """

    rows: list = field(default_factory=list)
    makespan: int = 0
    _busy: dict = field(default_factory=dict, repr=False)

    def occupy(self, cycle: int, unit: str, request: int, round_index: int) -> None:
        key = (cycle, unit)
        other = self._busy.get(key)
        if other is not None:
            raise HazardError(
                f"structural hazard: unit {unit} holds requests {other} and {request} in cycle {cycle}"
            )
        self._busy[key] = request
        self.rows.append((cycle, unit, request, round_index))

    def is_hazard_free(self) -> bool:
        seen = set()
        for cycle, unit, _, _ in self.rows:
            if (cycle, unit) in seen:
                return False
            seen.add((cycle, unit))
        return True

    def units(self) -> list[str]:
        return sorted({row[1] for row in self.rows})

    def occupancy(self, cycle: int) -> dict[str, int]:
        return {u: r for (c, u), r in self._busy.items() if c == cycle}

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cycle", "unit", "request", "round"])
        w.writerows(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


class CipherSimulation(NamedTuple):
    outputs: list
    report: CycleReport
    trace: StageTrace


class HashSimulation(NamedTuple):
    digests: list
    report: CycleReport


@lru_cache(maxsize=None)
def _unit_name(unit: int, step: int, block: str) -> str:
    return f"modmul{unit}.s{step:03d}.{block}"


def _cipher_program(x, k, constants, config: DesignConfig, params: FieldParams):
    chain = CHAINS[config.exp_depth]
    load_cycles = max(config.global_overhead - 1, 0)
    for _ in range(load_cycles):
        yield (("io.load", -1),)

    s = x
    for i, c in enumerate(constants):
        s = add_mod(add_mod(s, k, params), c, params)
        yield (("round.adder", i),)
        for _ in range(config.round_overhead - 1):
            yield (("round.control", i),)

        regs = {"x": s}
        for phase in chain:
            ops = [
                (unit, dst, modmul_program(config, regs[a], regs[b], params))
                for unit, a, b, dst in phase
            ]
            step = 0
            while ops:
                occ = []
                alive = []
                for unit, dst, gen in ops:
                    try:
                        blocks = next(gen)
                    except StopIteration as stop:
                        regs[dst] = stop.value
                        continue
                    occ.extend((_unit_name(unit, step, blk), i) for blk in blocks)
                    alive.append((unit, dst, gen))
                if occ:
                    yield tuple(occ)
                ops = alive
                step += 1
        s = regs["y"]

    # final key addition: own output cycle when there is a global overhead,
    # otherwise folded into the last exp.transfer stage
    s = add_mod(s, k, params)
    if config.global_overhead:
        yield (("io.output", -1),)
    return s


def _run(programs, trace: StageTrace):
    """Step generator programs cycle by cycle; programs[j] starts at cycle j."""
    outputs = [None] * len(programs)
    finish = [0] * len(programs)
    active = []
    cycle = 0
    nxt = 0
    while nxt < len(programs) or active:
        if nxt < len(programs):
            active.append((nxt, programs[nxt]))
            nxt += 1
        still = []
        for req, gen in active:
            try:
                occ = next(gen)
            except StopIteration as stop:
                outputs[req] = stop.value
                finish[req] = cycle
                continue
            for unit, rnd in occ:
                trace.occupy(cycle, unit, req, rnd)
            still.append((req, gen))
        active = still
        cycle += 1
    return outputs, finish


def simulate_cipher(
    config: DesignConfig,
    batch: Sequence[CipherRequest],
    constants: Sequence[int],
    params: FieldParams = BN254,
    clock_mhz: float | None = None,
) -> CipherSimulation:
    if not batch:
        raise ValueError("batch must contain at least one request")
    if len(batch) > config.batch:
        raise BatchOverflowError(
            f"batch of {len(batch)} exceeds {config.variant} accept window of {config.batch} requests"
        )
    if len(constants) != params.r:
        raise ValueError(f"expected {params.r} round constants, got {len(constants)}")
    for req in batch:
        req.validate(params)

    trace = StageTrace()
    programs = [_cipher_program(req.x, req.k, constants, config, params) for req in batch]
    outputs, finish = _run(programs, trace)

    spans = {finish[j] - j for j in range(len(batch))}
    if len(spans) != 1:
        raise RuntimeError(f"requests in one frame took different times: {sorted(spans)}")
    trace.makespan = max(finish)
    report = timing_report(config, spans.pop(), len(batch), clock_mhz)
    return CipherSimulation([FieldElement(v, params) for v in outputs], report, trace)


def simulate_hash_blocks(
    config: DesignConfig,
    block_lists: Sequence[Sequence[int]],
    constants: Sequence[int],
    params: FieldParams = BN254,
    clock_mhz: float | None = None,
) -> HashSimulation:
    """Miyaguchi-Preneel over pre-embedded blocks, lockstep across messages.

    One cipher frame per hash round; messages that ran out of blocks idle.
    """
    if not block_lists:
        raise ValueError("need at least one message")
    if len(block_lists) > config.batch:
        raise BatchOverflowError(
            f"{len(block_lists)} messages exceed {config.variant} accept window of {config.batch}"
        )
    if any(not blocks for blocks in block_lists):
        raise ValueError("every message needs at least one block")
    chaining = [0] * len(block_lists)
    total = 0
    for h in range(max(len(b) for b in block_lists)):
        live = [m for m, blocks in enumerate(block_lists) if h < len(blocks)]
        reqs = [CipherRequest(block_lists[m][h], chaining[m]) for m in live]
        outputs, frame, _ = simulate_cipher(config, reqs, constants, params, clock_mhz)
        total += frame.total_cycles
        for m, e in zip(live, outputs):
            x = block_lists[m][h]
            chaining[m] = add_mod(add_mod(e, chaining[m], params), x, params)
    report = timing_report(config, total, len(block_lists), clock_mhz)
    return HashSimulation([FieldElement(y, params) for y in chaining], report)


def simulate_hash(
    config: DesignConfig,
    messages: Sequence[bytes],
    constants: Sequence[int],
    params: FieldParams = BN254,
    clock_mhz: float | None = None,
) -> HashSimulation:
    if len(messages) > config.batch:
        raise BatchOverflowError(
            f"{len(messages)} messages exceed {config.variant} accept window of {config.batch}"
        )
    return simulate_hash_blocks(config, [pad_message(m) for m in messages], constants, params, clock_mhz)
