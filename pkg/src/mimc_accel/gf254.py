"""Fixed-width prime-field arithmetic for the BN254 scalar field.

Three interchangeable modular multipliers are provided:

* ``mul_mod_naive``   -- schoolbook product followed by a remainder; the oracle.
* ``mul_mod_peasant`` -- bit-serial shift-and-add, fixed ``n`` iterations.
* ``mul_mod_barrett`` -- Barrett reduction whose three wide products run through
  the chunked partial-product / addition-tree multiplier.

Every backend has the signature ``mul(a, b, params) -> int`` so that the cipher,
the exponentiation chains and the pipeline simulator can swap them freely.
Values are plain Python ints; :class:`FieldElement` is an ``int`` subclass that
enforces canonical form at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import random
from math import gcd
from typing import Callable, Sequence

BN254_P = 21888242871839275222246405745257275088548364400416034343698204186575808495617

WORD_BITS = 64
FIELD_WORDS = 4   # 4 x 64 >= 254
WIDE_WORDS = 8    # 8 x 64 >= 2n + 2 = 510

OPERAND_LIMIT = 1 << 255
HALF_SPLIT = 127
DEFAULT_CHUNK_WIDTH = 27
SUPPORTED_CHUNK_WIDTHS = (16, 27)

MulBackend = Callable[[int, int, "FieldParams"], int]


class NotCanonicalError(ValueError):
    """A value lies outside ``[0, p)``."""


# ---------------------------------------------------------------------------
# parameters


def ceil_log2(m: int) -> int:
    """Exact ``ceil(log2(m))`` for ``m >= 1``."""
    if m < 1:
        raise ValueError("ceil_log2 needs m >= 1")
    return (m - 1).bit_length()


def derive_barrett_constant(p: int) -> tuple[int, int]:
    """Return ``(n, z)`` with ``n = ceil(log2(p - 1))`` and ``z = floor(2**(2n) / p)``."""
    if p < 3:
        raise ValueError(f"modulus must be >= 3, got {p}")
    n = ceil_log2(p - 1)
    return n, (1 << (2 * n)) // p


def round_count(p: int, d: int) -> int:
    """``ceil(log2(p) / log2(d))`` evaluated exactly as the least r with d**r >= p."""
    if d < 2:
        raise ValueError("exponent must be >= 2")
    r, acc = 0, 1
    while acc < p:
        acc *= d
        r += 1
    return r


@dataclass(frozen=True)
class FieldParams:
    """Algebraic configuration: modulus, bit width, Barrett constant, exponent, rounds.

    Build with :meth:`from_prime`; the constructor re-checks every invariant so a
    hand-assembled instance with an inconsistent ``z`` or ``r`` is rejected.
    """

    p: int
    n: int
    z: int
    d: int
    r: int

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0:
            raise ValueError(f"modulus must be an odd prime >= 3, got {self.p}")
        n, z = derive_barrett_constant(self.p)
        if self.n != n:
            raise ValueError(f"n must equal ceil(log2(p-1)) = {n}, got {self.n}")
        if self.p >> self.n:
            # p - 1 is a power of two: n bits cannot hold every residue
            raise ValueError(f"p = {self.p} does not fit in n = {self.n} bits")
        if self.z != z:
            raise ValueError(f"z must equal floor(2^(2n)/p) = {z}, got {self.z}")
        if gcd(self.d, self.p - 1) != 1:
            raise ValueError(f"gcd(d, p-1) must be 1 (d = {self.d})")
        if self.r != round_count(self.p, self.d):
            raise ValueError(f"r must equal {round_count(self.p, self.d)}, got {self.r}")

    @classmethod
    def from_prime(cls, p: int, d: int = 7) -> "FieldParams":
        n, z = derive_barrett_constant(p)
        return cls(p=p, n=n, z=z, d=d, r=round_count(p, d))

    def element(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    def diagnostic(self) -> dict[str, str]:
        out = {}
        for name in ("p", "n", "z", "d", "r"):
            v = getattr(self, name)
            out[name] = str(v)
            out[name + "_hex"] = hex(v)
        return out

    def describe(self) -> str:
        return "\n".join(
            f"{name:>2} = {getattr(self, name)} ({hex(getattr(self, name))})"
            for name in ("p", "n", "z", "d", "r")
        )


BN254 = FieldParams.from_prime(BN254_P, d=7)
assert BN254.n == 254 and gcd(7, BN254.p - 1) == 1 and BN254.r == 91


# ---------------------------------------------------------------------------
# element type and encodings


class FieldElement(int):
    """Canonical residue ``0 <= value < p``.

    An ``int`` subclass, so it can be passed straight to every arithmetic
    routine. Arithmetic on it yields plain ints; re-wrap to re-validate.
    """

    __slots__ = ()

    def __new__(cls, value: int, params: FieldParams = BN254):
        value = int(value)
        if not 0 <= value < params.p:
            raise NotCanonicalError(f"value {value:#x} is not canonical (must be < p)")
        return super().__new__(cls, value)

    @property
    def limbs(self) -> tuple[int, ...]:
        return to_limbs(self, FIELD_WORDS)

    @classmethod
    def from_limbs(cls, limbs: Sequence[int], params: FieldParams = BN254) -> "FieldElement":
        return cls(from_limbs(limbs), params)

    def hex(self) -> str:
        return to_hex(self)

    def to_bytes32(self) -> bytes:
        return int(self).to_bytes(32, "big")

    def __repr__(self):
        return f"FieldElement(0x{to_hex(self)})"


def to_limbs(value: int, words: int = FIELD_WORDS) -> tuple[int, ...]:
    """Little-endian 64-bit word view of ``value``."""
    if value < 0 or value >> (WORD_BITS * words):
        raise ValueError(f"value does not fit in {words} words")
    mask = (1 << WORD_BITS) - 1
    return tuple((value >> (WORD_BITS * i)) & mask for i in range(words))


def from_limbs(limbs: Sequence[int]) -> int:
    out = 0
    for i, w in enumerate(limbs):
        if not 0 <= w < (1 << WORD_BITS):
            raise ValueError(f"limb {i} out of range")
        out |= w << (WORD_BITS * i)
    return out


def to_hex(value: int) -> str:
    """64-character lowercase zero-padded big-endian hex, no prefix."""
    return format(int(value), "064x")


def from_hex(text: str, params: FieldParams = BN254) -> FieldElement:
    s = text.strip().lower()
    if s.startswith("0x"):
        s = s[2:]
    if not s or len(s) > 64 or any(c not in "0123456789abcdef" for c in s):
        raise ValueError(f"malformed hex field element: {text!r}")
    return FieldElement(int(s, 16), params)


def from_bytes32(data: bytes, params: FieldParams = BN254) -> FieldElement:
    if len(data) != 32:
        raise ValueError(f"expected 32 bytes, got {len(data)}")
    return FieldElement(int.from_bytes(data, "big"), params)


# ---------------------------------------------------------------------------
# add / sub


def add_mod(a: int, b: int, params: FieldParams = BN254) -> int:
    s = a + b
    return s - params.p if s >= params.p else s


def sub_mod(a: int, b: int, params: FieldParams = BN254) -> int:
    d = a - b
    return d + params.p if d < 0 else d


# ---------------------------------------------------------------------------
# modular multiplication back ends


def mul_mod_naive(a: int, b: int, params: FieldParams = BN254) -> int:
    return (a * b) % params.p


def mul_mod_peasant(a: int, b: int, params: FieldParams = BN254, stats: dict | None = None) -> int:
    """Shift-and-add modular multiplication with exactly ``params.n`` iterations.

    Comparisons use ``>=`` so that an intermediate equal to ``p`` reduces to 0.
    If ``stats`` is given, ``stats["iterations"]`` is incremented once per loop pass.
    """
    p = params.p
    x1, x2, y = a, b, 0
    iterations = 0
    for _ in range(params.n):
        t = x1 if x2 & 1 else 0
        y += t
        if y >= p:
            y -= p
        u = x1 << 1
        x1 = u - p if u >= p else u
        x2 >>= 1
        iterations += 1
    if stats is not None:
        stats["iterations"] = stats.get("iterations", 0) + iterations
    return y


@dataclass(frozen=True)
class ChunkDecomposition:
    """``y`` split into W-bit chunks (LSB first) and ``x`` split at bit 127."""

    chunks: tuple[int, ...]
    halves: tuple[int, int]
    width: int

    def chunk_value(self) -> int:
        return sum(c << (self.width * i) for i, c in enumerate(self.chunks))

    def halves_value(self) -> int:
        return self.halves[0] + (self.halves[1] << HALF_SPLIT)


def chunk_count(width: int) -> int:
    return -(-255 // width)


def split_chunks(value: int, width: int = DEFAULT_CHUNK_WIDTH) -> tuple[int, ...]:
    mask = (1 << width) - 1
    return tuple((value >> (width * i)) & mask for i in range(chunk_count(width)))


def split_halves(value: int) -> tuple[int, int]:
    return value & ((1 << HALF_SPLIT) - 1), value >> HALF_SPLIT


def decompose(value: int, width: int = DEFAULT_CHUNK_WIDTH) -> ChunkDecomposition:
    """Both views of a single value, for inspection and reconstruction checks."""
    _check_width(width)
    if not 0 <= value < OPERAND_LIMIT:
        raise ValueError("operand must be < 2^255")
    return ChunkDecomposition(split_chunks(value, width), split_halves(value), width)


def addition_tree(terms: Sequence[int]) -> list[list[int]]:
    """Balanced pairwise reduction; returns every level, leaves first.

    Adjacent terms are summed lowest index first; an odd trailing term is
    carried to the next level unchanged.
    """
    if not terms:
        return [[0]]
    levels = [list(terms)]
    cur = levels[0]
    while len(cur) > 1:
        nxt = [cur[i] + cur[i + 1] for i in range(0, len(cur) - 1, 2)]
        if len(cur) % 2:
            nxt.append(cur[-1])
        levels.append(nxt)
        cur = nxt
    return levels


@dataclass(frozen=True)
class ChunkedProduct:
    """Every intermediate of one chunked wide multiplication.

    ``lo_partials[i] = x0 * y_i`` and ``hi_partials[i] = x1 * y_i`` (unshifted);
    the trees sum the partials after shifting by ``width * i``.
    """

    decomposition: ChunkDecomposition
    lo_partials: tuple[int, ...]
    hi_partials: tuple[int, ...]
    lo_tree: list[list[int]] = field(repr=False)
    hi_tree: list[list[int]] = field(repr=False)
    product: int

    @property
    def lo_sum(self) -> int:
        return self.lo_tree[-1][0]

    @property
    def hi_sum(self) -> int:
        return self.hi_tree[-1][0]


def _check_width(width: int) -> None:
    if width not in SUPPORTED_CHUNK_WIDTHS:
        raise ValueError(f"chunk width must be one of {SUPPORTED_CHUNK_WIDTHS}, got {width}")


def chunked_product(a: int, b: int, width: int = DEFAULT_CHUNK_WIDTH) -> ChunkedProduct:
    _check_width(width)
    if not (0 <= a < OPERAND_LIMIT and 0 <= b < OPERAND_LIMIT):
        raise ValueError("operands of the chunked multiplier must be < 2^255")
    chunks = split_chunks(b, width)
    x0, x1 = split_halves(a)
    lo = tuple(x0 * c for c in chunks)
    hi = tuple(x1 * c for c in chunks)
    lo_tree = addition_tree([v << (width * i) for i, v in enumerate(lo)])
    hi_tree = addition_tree([v << (width * i) for i, v in enumerate(hi)])
    product = lo_tree[-1][0] + (hi_tree[-1][0] << HALF_SPLIT)
    return ChunkedProduct(
        ChunkDecomposition(chunks, (x0, x1), width), lo, hi, lo_tree, hi_tree, product
    )


def mul_wide_chunked(a: int, b: int, width: int = DEFAULT_CHUNK_WIDTH) -> int:
    """Exact ``a * b`` through partial multiplication and the addition tree."""
    return chunked_product(a, b, width).product


def barrett_steps(a: int, b: int, params: FieldParams = BN254, wide_mul=mul_wide_chunked):
    """Run the Barrett datapath and return ``(w, t, u, candidate, result)``.

    ``candidate`` is the value before the two conditional subtractions; the
    subtraction ``w - u`` wraps modulo ``2**(n+1)`` like an (n+1)-bit register.
    """
    n, p = params.n, params.p
    mask = (1 << (n + 1)) - 1
    w = wide_mul(a, b)
    t = wide_mul(w >> (n - 1), params.z)
    u = wide_mul(t >> (n + 1), p)
    y = ((w & mask) - (u & mask)) & mask
    candidate = y
    if y >= p:
        y -= p
    if y >= p:
        y -= p
    return w, t, u, candidate, y


def mul_mod_barrett(a: int, b: int, params: FieldParams = BN254, width: int = DEFAULT_CHUNK_WIDTH) -> int:
    if width == DEFAULT_CHUNK_WIDTH:
        return barrett_steps(a, b, params)[4]
    return barrett_steps(a, b, params, wide_mul=lambda x, y: mul_wide_chunked(x, y, width))[4]


def mul_mod_barrett_flat(a: int, b: int, params: FieldParams = BN254) -> int:
    """Barrett with single-shot wide products (the synthesizer-inferred multiplier)."""
    return barrett_steps(a, b, params, wide_mul=lambda x, y: x * y)[4]


BACKENDS: dict[str, MulBackend] = {
    "naive": mul_mod_naive,
    "peasant": mul_mod_peasant,
    "barrett": mul_mod_barrett,
}


def get_backend(name: str) -> MulBackend:
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}") from None


# ---------------------------------------------------------------------------
# x^7


def pow7_chain4(x: int, mul: MulBackend = mul_mod_barrett, params: FieldParams = BN254) -> int:
    """x^7 with one multiplier: x^2, x^4, x^6, x^7."""
    t1 = mul(x, x, params)
    t2 = mul(t1, t1, params)
    t3 = mul(t2, t1, params)
    return mul(t3, x, params)


def pow7_chain3(x: int, mul: MulBackend = mul_mod_barrett, params: FieldParams = BN254) -> int:
    """x^7 in three steps of depth: x^2, then x^4 and x^3 side by side, then x^7."""
    t1 = mul(x, x, params)
    t2 = mul(t1, t1, params)
    t3 = mul(t1, x, params)
    return mul(t2, t3, params)


def is_probable_prime(n: int, rounds: int = 32, rng=None) -> bool:
    """Miller-Rabin."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    rng = rng or random.Random(n)
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
