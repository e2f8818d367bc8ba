"""Cycle-level programs for the integer and modular multipliers.

Each program is a generator: every ``yield`` is one clock cycle and yields the
names of the hardware blocks busy in that cycle. The computed value is the
generator's return value, so programs compose with ``yield from``. The
arithmetic is done inside the program at the cycle where the hardware would
produce it; nothing is precomputed.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..gf254 import (
    DEFAULT_CHUNK_WIDTH,
    FieldParams,
    OPERAND_LIMIT,
    HALF_SPLIT,
    addition_tree,
    mul_wide_chunked,
    split_chunks,
    split_halves,
)

MULTIPLIER_LATENCY = 3


def intmul_3stage(x: int, y: int, width: int = DEFAULT_CHUNK_WIDTH, tag: str = ""):
    """Three-stage pipelined wide multiplier.

    stage 1: partial products x0 * y_i
    stage 2: partial products x1 * y_i, and the x0 addition tree, side by side
    stage 3: x1 addition tree, then combine
    """
    if not (0 <= x < OPERAND_LIMIT and 0 <= y < OPERAND_LIMIT):
        raise ValueError("multiplier operands must be < 2^255")
    chunks = split_chunks(y, width)
    x0, x1 = split_halves(x)

    lo = [x0 * c for c in chunks]
    yield (tag + "partial_lo",)

    hi = [x1 * c for c in chunks]
    lo_sum = addition_tree([v << (width * i) for i, v in enumerate(lo)])[-1][0]
    yield (tag + "partial_hi", tag + "tree_lo")

    hi_sum = addition_tree([v << (width * i) for i, v in enumerate(hi)])[-1][0]
    product = lo_sum + (hi_sum << HALF_SPLIT)
    yield (tag + "tree_hi+combine",)
    return product


def _wrap_sub_and_correct(w: int, u: int, params: FieldParams) -> int:
    mask = (1 << (params.n + 1)) - 1
    y = ((w & mask) - (u & mask)) & mask
    if y >= params.p:
        y -= params.p
    if y >= params.p:
        y -= params.p
    return y


def barrett_chunked_program(a: int, b: int, params: FieldParams, width: int = DEFAULT_CHUNK_WIDTH):
    """13 cycles: three (3-stage multiply + transfer) blocks, then the exp transfer."""
    n = params.n
    w = yield from intmul_3stage(a, b, width, "w.")
    yield ("w.transfer",)
    t = yield from intmul_3stage(w >> (n - 1), params.z, width, "t.")
    yield ("t.transfer",)
    u = yield from intmul_3stage(t >> (n + 1), params.p, width, "u.")
    y = _wrap_sub_and_correct(w, u, params)
    yield ("u.transfer+reduce",)
    yield ("exp.transfer",)
    return y


def barrett_flat_program(a: int, b: int, params: FieldParams, cycles_per_mul: int = 1, exp_transfer: bool = True):
    """Barrett with single-block wide products of ``cycles_per_mul`` cycles each."""
    n = params.n
    w = a * b
    for _ in range(cycles_per_mul):
        yield ("w.mul",)
    t = (w >> (n - 1)) * params.z
    for _ in range(cycles_per_mul):
        yield ("t.mul",)
    u = (t >> (n + 1)) * params.p
    y = _wrap_sub_and_correct(w, u, params)
    for _ in range(cycles_per_mul):
        yield ("u.mul+reduce",)
    if exp_transfer:
        yield ("exp.transfer",)
    return y


def peasant_program(a: int, b: int, params: FieldParams):
    """One shift-and-add iteration per cycle, ``params.n`` cycles."""
    p = params.p
    x1, x2, y = a, b, 0
    for _ in range(params.n):
        if x2 & 1:
            y += x1
        if y >= p:
            y -= p
        u = x1 << 1
        x1 = u - p if u >= p else u
        x2 >>= 1
        yield ("peasant.iter",)
    return y


def modmul_program(config, a: int, b: int, params: FieldParams):
    alg = config.mul_algorithm
    if alg == "barrett-chunked":
        return barrett_chunked_program(a, b, params, config.chunk_width)
    if alg == "barrett-flat":
        return barrett_flat_program(
            a, b, params, cycles_per_mul=config.intmul_stages, exp_transfer=config.pipelined
        )
    if alg == "peasant":
        return peasant_program(a, b, params)
    raise ValueError(f"unknown multiplier algorithm {alg!r}")


def program_length(config, params: FieldParams) -> int:
    gen = modmul_program(config, 1, 1, params)
    cycles = 0
    for _ in gen:
        cycles += 1
    return cycles


# ---------------------------------------------------------------------------
# standalone integer multiplier


def multiplier_stage_model(x: int, y: int, width: int = DEFAULT_CHUNK_WIDTH):
    """Return ``(product, stage_assignment)`` for one wide multiplication.

    ``stage_assignment`` maps each event name to its pipeline stage (1, 2 or 3):
    ``partial_lo[i]``, ``partial_hi[i]``, ``tree_lo[level][j]``,
    ``tree_hi[level][j]`` and ``combine``.
    """
    chunks = split_chunks(y, width)
    x0, x1 = split_halves(x)
    stages: dict[str, int] = {}
    for i in range(len(chunks)):
        stages[f"partial_lo[{i}]"] = 1
    for i in range(len(chunks)):
        stages[f"partial_hi[{i}]"] = 2
    for name, half, stage in (("tree_lo", x0, 2), ("tree_hi", x1, 3)):
        levels = addition_tree([(half * c) << (width * i) for i, c in enumerate(chunks)])
        for lvl in range(1, len(levels)):
            for j in range(len(levels[lvl])):
                stages[f"{name}[{lvl}][{j}]"] = stage
    stages["combine"] = 3
    product = _drain(intmul_3stage(x, y, width))
    assert product == mul_wide_chunked(x, y, width)
    return product, stages


def _drain(gen):
    while True:
        try:
            next(gen)
        except StopIteration as stop:
            return stop.value


@dataclass(frozen=True)
class MultiplierResult:
    index: int
    issue_cycle: int
    done_cycle: int
    product: int


def run_multiplier_pipeline(pairs, width: int = DEFAULT_CHUNK_WIDTH, gaps=None) -> list[MultiplierResult]:
    """Feed operand pairs into one 3-stage multiplier, one per cycle by default.

    Cycles are numbered from 1; a pair issued in cycle c is done at the end of
    cycle c + 2. ``gaps[i]`` idle cycles are inserted before pair ``i``.
    Raises ``RuntimeError`` if two pairs ever occupy the same block.
    """
    issue = []
    c = 1
    for i in range(len(pairs)):
        c += (gaps[i] if gaps else 0)
        issue.append(c)
        c += 1
    in_flight = []
    results = []
    pending = list(enumerate(pairs))
    cycle = 0
    while pending or in_flight:
        cycle += 1
        if pending and issue[pending[0][0]] == cycle:
            i, (x, y) = pending.pop(0)
            in_flight.append((i, cycle, intmul_3stage(x, y, width)))
        busy = set()
        still = []
        for i, start, gen in in_flight:
            blocks = next(gen)
            for blk in blocks:
                if blk in busy:
                    raise RuntimeError(f"structural hazard on {blk} at cycle {cycle}")
                busy.add(blk)
            if blocks[-1] == "tree_hi+combine":
                results.append(MultiplierResult(i, start, cycle, _drain(gen)))
            else:
                still.append((i, start, gen))
        in_flight = still
    return sorted(results, key=lambda r: r.index)
