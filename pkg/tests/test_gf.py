import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from v2vic.gf import (
    GF2,
    NoSolution,
    Subspace,
    field,
    gf2_rank_bits,
    pack_bits,
    rank,
    rref,
    solve,
    span_membership,
    unpack_bits,
)

ORDERS = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 49, 81, 121, 125, 128, 243, 256]


@pytest.mark.parametrize("q", ORDERS)
def test_every_nonzero_element_has_an_inverse(q):
    f = field(q)
    a = np.arange(1, q, dtype=np.uint8)
    assert np.all(f.mul(a, f.inv(a)) == 1)


@pytest.mark.parametrize("q", ORDERS)
def test_additive_inverse_and_identity(q):
    f = field(q)
    a = np.arange(q, dtype=np.uint8)
    assert np.all(f.add(a, f.neg(a)) == 0)
    assert np.all(f.add(a, 0) == a)
    assert np.all(f.mul(a, 1) == a)


@pytest.mark.parametrize("q", [4, 8, 9, 16, 27, 256])
def test_distributivity_and_associativity_sampled(q):
    f = field(q)
    rng = np.random.default_rng(q)
    a, b, c = (f.random(2000, rng) for _ in range(3))
    assert np.all(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)))
    assert np.all(f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c))
    assert np.all(f.add(a, f.add(b, c)) == f.add(f.add(a, b), c))


@pytest.mark.parametrize("q", [4, 8, 16, 256])
def test_multiplicative_group_is_cyclic(q):
    f = field(q)
    # some element generates all q-1 nonzero elements
    for g in range(2, q):
        seen, x = set(), 1
        for _ in range(q - 1):
            x = int(f.mul(x, g))
            seen.add(x)
        if len(seen) == q - 1:
            return
    pytest.fail("no generator found")


def test_gf256_modulus_is_the_usual_primitive_polynomial():
    f = field(256)
    # x^8 = x^4 + x^3 + x^2 + 1 in the 0x11D representation
    assert int(f.mul(0x80, 0x02)) == 0x1D


@pytest.mark.parametrize("q", [6, 10, 12, 257, 1, 0])
def test_rejects_non_prime_power_orders(q):
    with pytest.raises(ValueError):
        field(q)


def _rowspace_size(M, q):
    f = field(q)
    words = set()
    for coeffs in itertools.product(range(q), repeat=M.shape[0]):
        words.add(f.matmul(np.array(coeffs, dtype=np.uint8)[None, :], M)[0].tobytes())
    return len(words)


def test_rank_of_every_binary_4x4_matches_rowspace_size():
    # rank r <=> the row space has exactly 2^r words
    ranks = []
    for bits in range(1 << 16):
        M = np.array([(bits >> k) & 1 for k in range(16)], dtype=np.uint8).reshape(4, 4)
        ranks.append(rank(M, GF2))
    counts = np.bincount(ranks, minlength=5)
    # closed form: prod_k (2^4 - 2^k)^2 / (2^r - 2^k) over k < r
    expected = [1, 225, 7350, 37800, 20160]
    assert counts.tolist() == expected
    rng = np.random.default_rng(0)
    for _ in range(200):
        M = rng.integers(0, 2, (4, 4), dtype=np.uint8)
        assert 2 ** rank(M, GF2) == _rowspace_size(M, 2)


@pytest.mark.parametrize("q", [3, 4, 5])
def test_rank_matches_rowspace_size_small_fields(q):
    rng = np.random.default_rng(q)
    for _ in range(60):
        M = field(q).random((3, 3), rng)
        M[rng.random(M.shape) < 0.3] = 0
        assert q ** rank(M, q) == _rowspace_size(M, q)


def test_solve_agrees_with_exhaustive_search_6x6():
    rng = np.random.default_rng(1)
    xs = np.array(list(itertools.product(range(2), repeat=6)), dtype=np.uint8)
    for _ in range(8):
        A = rng.integers(0, 2, (6, 6), dtype=np.uint8)
        images = GF2.matmul(xs, A.T)  # row k = A @ xs[k]
        for y in xs:
            hits = np.all(images == y, axis=1)
            if hits.any():
                x = solve(A, y, GF2)
                assert np.array_equal(GF2.matmul(A, x), y)
            else:
                with pytest.raises(NoSolution):
                    solve(A, y, GF2)


def test_solve_sets_free_variables_to_zero():
    A = np.array([[1, 1, 0], [0, 0, 1]], dtype=np.uint8)
    x = solve(A, np.array([1, 1], dtype=np.uint8))
    assert x.tolist() == [1, 0, 1]


def test_solve_with_payload_columns_over_gf2_bytes():
    # GF(2) arithmetic acts bitwise on packed payload bytes
    A = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    X = np.array([[0xAB, 0x01], [0x0F, 0xF0]], dtype=np.uint8)
    Y = GF2.matmul(A, X)
    assert Y[1].tolist() == [0xAB ^ 0x0F, 0x01 ^ 0xF0]
    assert np.array_equal(solve(A, Y), X)


def test_rref_examples():
    M = np.array([[0, 1, 1], [1, 1, 0], [1, 0, 1]], dtype=np.uint8)
    assert rref(M).tolist() == [[1, 0, 1], [0, 1, 1], [0, 0, 0]]
    M3 = np.array([[2, 1], [1, 1]], dtype=np.uint8)
    assert rref(M3, 3).tolist() == [[1, 0], [0, 1]]


def test_span_membership_matches_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(40):
        B = rng.integers(0, 2, (3, 5), dtype=np.uint8)
        span = {GF2.matmul(np.array(c, dtype=np.uint8)[None, :], B)[0].tobytes()
                for c in itertools.product(range(2), repeat=3)}
        for v in itertools.product(range(2), repeat=5):
            v = np.array(v, dtype=np.uint8)
            assert span_membership(v, B, GF2) == (v.tobytes() in span)


def test_bit_packing_roundtrip():
    v = np.array([1, 0, 1, 1, 0, 0, 1], dtype=np.uint8)
    assert unpack_bits(pack_bits(v), 7).tolist() == v.tolist()
    assert gf2_rank_bits([0b011, 0b110, 0b101]) == 2


@pytest.mark.parametrize("q", [2, 3, 4, 7, 9, 256])
def test_subspace_tracks_rank_and_rref(q):
    f = field(q)
    rng = np.random.default_rng(q)
    for _ in range(40):
        M = f.random((int(rng.integers(1, 7)), 6), rng)
        M[rng.random(M.shape) < 0.4] = 0
        S = Subspace(6, f, M)
        assert S.dim == rank(M, f)
        R = rref(M, f)
        assert np.array_equal(S.basis(), R[np.any(R, axis=1)])
        assert all(S.contains(r) for r in M)
        assert Subspace(6, f, M[::-1]) == S


def test_subspace_add_reports_growth():
    S = Subspace(3, 2)
    assert S.add([1, 1, 0])
    assert not S.add([1, 1, 0])
    assert S.add([0, 1, 1])
    assert not S.add([1, 0, 1])
    assert S.support() == [0, 1, 2]


def test_lift_preserves_span_and_refuses_odd_fields():
    S = Subspace(4, 2, [[1, 1, 0, 0], [0, 0, 1, 1]])
    T = S.lift(256)
    assert T.dim == 2 and T.field.q == 256
    assert T.contains(field(256).add([1, 1, 0, 0], [0, 0, 1, 1]))
    assert not T.contains([1, 0, 0, 0])
    with pytest.raises(ValueError):
        S.lift(3)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 4, 5, 8, 256]), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_rank_is_transpose_invariant(q, r, c, seed):
    f = field(q)
    M = f.random((r, c), np.random.default_rng(seed))
    assert rank(M, f) == rank(M.T, f)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 4, 16, 256]), st.integers(0, 2**32 - 1))
def test_matmul_is_associative(q, seed):
    f = field(q)
    rng = np.random.default_rng(seed)
    A, B, C = f.random((3, 4), rng), f.random((4, 2), rng), f.random((2, 5), rng)
    assert np.array_equal(f.matmul(f.matmul(A, B), C), f.matmul(A, f.matmul(B, C)))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 7, 16, 256]), st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_solve_roundtrip_on_consistent_systems(q, n, seed):
    f = field(q)
    rng = np.random.default_rng(seed)
    A = f.random((n, n), rng)
    x = f.random(n, rng)
    y = f.matmul(A, x)
    assert np.array_equal(f.matmul(A, solve(A, y, f)), y)
