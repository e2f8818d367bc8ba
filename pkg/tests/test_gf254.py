import random
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from mimc_accel.gf254 import (
    BN254,
    BN254_P,
    FieldElement,
    FieldParams,
    NotCanonicalError,
    add_mod,
    barrett_steps,
    chunk_count,
    chunked_product,
    decompose,
    derive_barrett_constant,
    from_bytes32,
    from_hex,
    is_probable_prime,
    mul_mod_barrett,
    mul_mod_naive,
    mul_mod_peasant,
    mul_wide_chunked,
    pow7_chain3,
    pow7_chain4,
    round_count,
    sub_mod,
    to_hex,
)

P = BN254_P
BOUNDARY = [0, 1, 2, P - 2, P - 1]
BACKENDS = [mul_mod_naive, mul_mod_peasant, mul_mod_barrett]

# floor(2^508 / p), from exact integer division
BN254_Z = 38284845454613504619394467267190322316714506535725634610690744705837986343205

elements = st.integers(min_value=0, max_value=P - 1)


def test_bn254_parameters():
    assert BN254.p == P
    assert BN254.n == 254
    assert BN254.z == BN254_Z
    assert BN254.d == 7 and BN254.r == 91
    assert gcd(7, P - 1) == 1
    assert is_probable_prime(P)


@pytest.mark.parametrize("p, n, z", [(7, 3, 9), (13, 4, 19), (BN254_P, 254, BN254_Z)])
def test_derive_barrett_constant(p, n, z):
    assert derive_barrett_constant(p) == (n, z)


def test_derive_barrett_constant_rejects_small():
    with pytest.raises(ValueError):
        derive_barrett_constant(2)


@pytest.mark.parametrize("p, d, r", [(BN254_P, 7, 91), (1009, 5, 5), (251, 7, 3)])
def test_round_count(p, d, r):
    assert round_count(p, d) == r


def test_params_invariants_enforced():
    with pytest.raises(ValueError):
        FieldParams(p=P, n=254, z=BN254_Z + 1, d=7, r=91)
    with pytest.raises(ValueError):
        FieldParams.from_prime(P, d=3)  # 3 divides p - 1
    with pytest.raises(ValueError):
        FieldParams(p=P, n=254, z=BN254_Z, d=7, r=92)
    with pytest.raises(ValueError):
        FieldParams.from_prime(17, d=3)  # p - 1 = 16 needs more than n = 4 bits


def test_params_diagnostic():
    diag = BN254.diagnostic()
    assert diag["n"] == "254" and diag["r"] == "91"
    assert int(diag["z_hex"], 16) == BN254_Z
    assert "0x" in BN254.describe()


# --- element type -----------------------------------------------------------


def test_field_element_canonical():
    assert FieldElement(P - 1) == P - 1
    with pytest.raises(NotCanonicalError):
        FieldElement(P)
    with pytest.raises(NotCanonicalError):
        FieldElement(-1)


@given(elements)
def test_hex_and_bytes_roundtrip(v):
    e = FieldElement(v)
    h = to_hex(e)
    assert len(h) == 64 and h == h.lower()
    assert from_hex(h) == v
    assert from_hex("0x" + h) == v
    assert from_bytes32(e.to_bytes32()) == v
    assert FieldElement.from_limbs(e.limbs) == v
    assert len(e.limbs) == 4


def test_from_hex_rejects():
    with pytest.raises(NotCanonicalError, match="not canonical"):
        from_hex(format(P, "x"))
    with pytest.raises(ValueError):
        from_hex("xyz")
    with pytest.raises(ValueError):
        from_hex("")


# --- add / sub --------------------------------------------------------------


def test_add_sub_examples():
    assert add_mod(P - 1, 1) == 0
    assert add_mod(0, 12345) == 12345
    assert sub_mod(77, 77) == 0
    assert sub_mod(0, 1) == P - 1


def test_add_sub_random_against_bigint():
    rng = random.Random(11)
    for _ in range(1000):
        a, b = rng.randrange(P), rng.randrange(P)
        assert add_mod(a, b) == (a + b) % P
        assert sub_mod(a, b) == (a - b) % P


@given(elements, elements)
def test_add_sub_roundtrip(a, b):
    assert sub_mod(add_mod(a, b), b) == a


# --- multiplication back ends -----------------------------------------------


@pytest.mark.parametrize("mul", BACKENDS)
def test_mul_trivial(mul):
    a = 0x1234567890ABCDEF
    assert mul(1, a, BN254) == a
    assert mul(0, a, BN254) == 0
    assert mul(P - 1, P - 1, BN254) == 1
    assert mul(2, (P + 1) // 2, BN254) == 1
    assert mul(1, 1, BN254) == 1


@pytest.mark.parametrize("a", BOUNDARY)
@pytest.mark.parametrize("b", BOUNDARY)
def test_backends_boundary(a, b):
    expect = mul_mod_naive(a, b, BN254)
    assert mul_mod_peasant(a, b, BN254) == expect
    assert mul_mod_barrett(a, b, BN254) == expect
    assert mul_mod_barrett(a, b, BN254, width=16) == expect


def test_backends_random_sweep():
    rng = random.Random(5)
    for _ in range(2000):
        a, b = rng.randrange(P), rng.randrange(P)
        expect = a * b % P
        assert mul_mod_naive(a, b, BN254) == expect
        assert mul_mod_peasant(a, b, BN254) == expect
        assert mul_mod_barrett(a, b, BN254) == expect


def test_peasant_fixed_iterations():
    rng = random.Random(9)
    for a, b in [(0, 0), (P - 1, P - 1), (1, 0)] + [(rng.randrange(P), rng.randrange(P)) for _ in range(50)]:
        stats = {}
        mul_mod_peasant(a, b, BN254, stats=stats)
        assert stats["iterations"] == BN254.n


@settings(max_examples=300)
@given(elements, elements)
def test_barrett_intermediate_bound(a, b):
    w, t, u, candidate, y = barrett_steps(a, b, BN254)
    assert w == a * b
    assert candidate < 3 * P
    assert y < P and y == a * b % P


def test_small_field_exhaustive():
    params = FieldParams.from_prime(251, d=7)
    assert (params.n, params.z) == (8, 65536 // 251)
    for a in range(251):
        for b in range(251):
            expect = a * b % 251
            assert mul_mod_peasant(a, b, params) == expect
            assert mul_mod_barrett(a, b, params) == expect
            assert barrett_steps(a, b, params)[3] < 3 * 251


# --- chunked multiplier -----------------------------------------------------


@pytest.mark.parametrize("width, nchunks", [(27, 10), (16, 16)])
def test_chunked_product_structure(width, nchunks):
    a, b = (1 << 254) - 12345, (1 << 253) + 999
    cp = chunked_product(a, b, width)
    assert len(cp.decomposition.chunks) == nchunks
    assert len(cp.lo_partials) == len(cp.hi_partials) == nchunks
    assert cp.product == a * b
    assert cp.lo_sum == (a & ((1 << 127) - 1)) * b
    assert cp.hi_sum == (a >> 127) * b
    # pairwise tree: every level halves (rounding up)
    for lower, upper in zip(cp.lo_tree, cp.lo_tree[1:]):
        assert len(upper) == (len(lower) + 1) // 2


@pytest.mark.parametrize("width", [27, 16])
def test_chunked_special_operands(width):
    all_ones = (1 << 255) - 1
    top_chunk_only = (((1 << width) - 1) << (width * (chunk_count(width) - 1))) & all_ones
    for a in [0, 1, P - 1, all_ones, (1 << 254)]:
        for b in [0, 1, all_ones, top_chunk_only, P - 1]:
            assert mul_wide_chunked(a, b, width) == a * b


def test_chunked_examples_and_errors():
    assert mul_wide_chunked(0, P - 1) == 0
    assert mul_wide_chunked(P - 1, 1) == P - 1
    with pytest.raises(ValueError):
        mul_wide_chunked(1 << 255, 1)
    with pytest.raises(ValueError):
        mul_wide_chunked(1, 1, width=20)


@settings(max_examples=500)
@given(st.integers(min_value=0, max_value=(1 << 255) - 1))
def test_decomposition_reconstructs(v):
    for width in (27, 16):
        d = decompose(v, width)
        assert d.chunk_value() == v
        assert d.halves_value() == v
        assert all(0 <= c < (1 << width) for c in d.chunks)


# --- x^7 --------------------------------------------------------------------


@pytest.mark.parametrize("chain", [pow7_chain4, pow7_chain3])
def test_pow7_examples(chain):
    assert chain(0, mul_mod_naive, BN254) == 0
    assert chain(1, mul_mod_naive, BN254) == 1
    assert chain(2, mul_mod_naive, BN254) == 128
    assert chain(3, mul_mod_barrett, BN254) == 2187
    assert chain(P - 1, mul_mod_peasant, BN254) == P - 1


def test_pow7_chains_agree_with_six_multiplications():
    rng = random.Random(77)
    for _ in range(300):
        x = rng.randrange(P)
        seq = x
        for _ in range(6):
            seq = seq * x % P
        assert pow7_chain4(x, mul_mod_barrett, BN254) == seq
        assert pow7_chain3(x, mul_mod_barrett, BN254) == seq


def test_pow7_chain3_matches_chain4_10k():
    rng = random.Random(78)
    for _ in range(10_000):
        x = rng.randrange(P)
        assert pow7_chain3(x, mul_mod_naive, BN254) == pow7_chain4(x, mul_mod_naive, BN254)
