"""MiMC-p/p block cipher and Miyaguchi-Preneel hash over a prime field."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from Crypto.Hash import keccak

from .gf254 import (
    BN254,
    FieldElement,
    FieldParams,
    MulBackend,
    NotCanonicalError,
    add_mod,
    mul_mod_barrett,
    pow7_chain4,
)

DEFAULT_SEED = b"AMAZE_MiMC_BN254"
IV = 0
CHUNK_BYTES = 31


class ConstantsFileError(ValueError):
    """Raised by :func:`load_constants`; ``line`` is 1-based, or None for whole-file errors."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RoundConstants:
    constants: tuple[int, ...]
    seed_id: str

    def __post_init__(self):
        if not self.constants or self.constants[0] != 0:
            raise ValueError("round constant c_0 must be 0")

    def __len__(self):
        return len(self.constants)

    def __getitem__(self, i):
        return self.constants[i]

    def __iter__(self):
        return iter(self.constants)

    def validate(self, params: FieldParams) -> None:
        if len(self.constants) != params.r:
            raise ValueError(f"expected {params.r} constants, got {len(self.constants)}")
        for i, c in enumerate(self.constants):
            if not 0 <= c < params.p:
                raise NotCanonicalError(f"constant {i} is not canonical")

    def to_text(self) -> str:
        return "".join(format(c, "064x") + "\n" for c in self.constants)


def keccak256(data: bytes) -> bytes:
    h = keccak.new(digest_bits=256)
    h.update(data)
    return h.digest()


def derive_constants(seed: bytes | str = DEFAULT_SEED, params: FieldParams = BN254) -> RoundConstants:
    """c_0 = 0, c_i = keccak256^i(seed) mod p for i >= 1.

    Each hash is applied to the previous 32-byte digest, not to the reduced value.
    """
    if isinstance(seed, str):
        seed = seed.encode()
    out = [0]
    h = seed
    for _ in range(1, params.r):
        h = keccak256(h)
        out.append(int.from_bytes(h, "big") % params.p)
    return RoundConstants(tuple(out), f"keccak256-iter:{seed.decode(errors='replace')}")


def zero_constants(params: FieldParams = BN254) -> RoundConstants:
    return RoundConstants((0,) * params.r, "zero")


def parse_constants(lines: Iterable[str], params: FieldParams = BN254, source: str = "<text>") -> RoundConstants:
    values = []
    for lineno, raw in enumerate(lines, start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        if s.lower().startswith("0x"):
            s = s[2:]
        try:
            v = int(s, 16)
        except ValueError:
            raise ConstantsFileError(f"malformed hex {raw.strip()!r}", lineno) from None
        if len(s) > 64 or v >= params.p:
            raise ConstantsFileError("value is not canonical (must be < p)", lineno)
        if not values and v != 0:
            raise ConstantsFileError("first constant c_0 must be 0", lineno)
        values.append(v)
    if len(values) != params.r:
        raise ConstantsFileError(f"expected {params.r} constants, found {len(values)}")
    return RoundConstants(tuple(values), f"file:{source}")


def load_constants(path, params: FieldParams = BN254) -> RoundConstants:
    path = Path(path)
    with path.open() as fh:
        return parse_constants(fh, params, source=str(path))


def encrypt(
    x: int,
    k: int,
    constants: Sequence[int],
    params: FieldParams = BN254,
    mul: MulBackend = mul_mod_barrett,
    final_key: bool = True,
    pow7=pow7_chain4,
) -> int:
    if len(constants) != params.r:
        raise ValueError(f"expected {params.r} round constants, got {len(constants)}")
    if params.d != 7:
        return encrypt_generic(x, k, constants, params, mul, final_key)
    s = x
    for c in constants:
        s = pow7(add_mod(add_mod(s, k, params), c, params), mul, params)
    return add_mod(s, k, params) if final_key else s


def power(x: int, e: int, mul: MulBackend, params: FieldParams) -> int:
    """Left-to-right square-and-multiply through a pluggable backend."""
    acc = 1 % params.p
    for bit in bin(e)[2:]:
        acc = mul(acc, acc, params)
        if bit == "1":
            acc = mul(acc, x, params)
    return acc


def encrypt_generic(x, k, constants, params, mul=mul_mod_barrett, final_key=True) -> int:
    """Same cipher for an arbitrary exponent ``params.d`` (small-field experiments)."""
    s = x
    for c in constants:
        s = power(add_mod(add_mod(s, k, params), c, params), params.d, mul, params)
    return add_mod(s, k, params) if final_key else s


def compress(chaining: int, block: int, constants, params=BN254, mul=mul_mod_barrett) -> int:
    """One Miyaguchi-Preneel step: E_chaining(block) + chaining + block."""
    e = encrypt(block, chaining, constants, params, mul)
    return add_mod(add_mod(e, chaining, params), block, params)


class HashState:
    """Incremental Miyaguchi-Preneel chaining over field-element blocks."""

    def __init__(self, constants, params: FieldParams = BN254, mul: MulBackend = mul_mod_barrett):
        self.constants = constants
        self.params = params
        self.mul = mul
        self.chaining = IV
        self.blocks_absorbed = 0

    def absorb(self, block: int) -> "HashState":
        if not 0 <= block < self.params.p:
            raise NotCanonicalError(f"block {block:#x} is not canonical")
        self.chaining = compress(self.chaining, block, self.constants, self.params, self.mul)
        self.blocks_absorbed += 1
        return self

    def digest(self) -> FieldElement:
        if not self.blocks_absorbed:
            raise ValueError("no blocks absorbed")
        return FieldElement(self.chaining, self.params)


def hash_blocks(blocks: Sequence[int], constants, params: FieldParams = BN254, mul: MulBackend = mul_mod_barrett) -> FieldElement:
    if not blocks:
        raise ValueError("cannot hash an empty block list")
    state = HashState(constants, params, mul)
    for b in blocks:
        state.absorb(b)
    return state.digest()


def pad_message(message: bytes) -> list[FieldElement]:
    """31-byte chunks, a 0x01 delimiter padded with zeros, then a bit-length block.

    2^248 < p so every chunk embeds canonically with no reduction.
    """
    if len(message) >= 1 << 64:
        raise ValueError("message too long")
    padded = message + b"\x01"
    padded += b"\x00" * (-len(padded) % CHUNK_BYTES)
    blocks = [
        FieldElement(int.from_bytes(padded[i:i + CHUNK_BYTES], "big"))
        for i in range(0, len(padded), CHUNK_BYTES)
    ]
    blocks.append(FieldElement(8 * len(message)))
    return blocks


def hash_bytes(message: bytes, constants, params: FieldParams = BN254, mul: MulBackend = mul_mod_barrett) -> FieldElement:
    return hash_blocks(pad_message(message), constants, params, mul)
