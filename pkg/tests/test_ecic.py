import itertools

import numpy as np
import pytest

from v2vic.cluster import ClusterConfig, build_encoder, encode_block, layout_side_information
from v2vic.ecic import (
    SIX_THREE_THREE,
    ClassicalCode,
    DecodingAmbiguity,
    EcicConfig,
    UnknownParameters,
    block_payloads,
    classical_code_for,
    correct_block,
    ecic_decode,
    ecic_decode_cluster,
    ecic_encode,
    ecic_encode_cluster,
    inject_errors,
    minimum_distance,
    optimal_length,
    shortest_binary_code,
)

L5_2 = ClusterConfig(4, 5, 2)


def test_six_three_three_generator_exact():
    code = classical_code_for(3, 1, 2)
    assert code.generator.tolist() == [[1, 0, 0, 1, 1, 0], [0, 1, 0, 1, 0, 1], [0, 0, 1, 0, 1, 1]]
    assert (code.N, code.k, code.d) == (6, 3, 3)


def test_six_three_three_weight_enumerator():
    words = [ClassicalCode(SIX_THREE_THREE).encode(m) for m in itertools.product(range(2), repeat=3)]
    weights = sorted(int(w.sum()) for w in words)
    assert weights == [0, 3, 3, 3, 3, 4, 4, 4]


@pytest.mark.parametrize("delta", [1, 2, 3])
def test_repetition_code_is_shortest_for_one_symbol(delta):
    code = classical_code_for(1, delta, 2)
    assert code.N == code.d == 2 * delta + 1
    assert shortest_binary_code(1, 2 * delta + 1) == 2 * delta + 1


def test_shortest_binary_code_search():
    assert shortest_binary_code(3, 3) == 6
    assert shortest_binary_code(2, 3) == 5
    assert shortest_binary_code(4, 3) == 7
    assert shortest_binary_code(3, 1) == 3


def test_identity_code_for_no_errors():
    code = classical_code_for(4, 0, 2)
    assert np.array_equal(code.generator, np.eye(4, dtype=np.uint8))
    assert code.d == 1


def test_unknown_parameters():
    with pytest.raises(UnknownParameters):
        classical_code_for(2, 1, 2)
    with pytest.raises(UnknownParameters):
        optimal_length(4, 5, 2)


def test_optimal_length_table():
    assert optimal_length(0, 3) == 0
    assert optimal_length(5, 1) == 5
    assert optimal_length(1, 7) == 7
    assert optimal_length(3, 3, 2) == 6


def test_classical_code_validates_generator():
    with pytest.raises(ValueError, match="dependent"):
        ClassicalCode(np.array([[1, 1, 0], [1, 1, 0]]))
    with pytest.raises(ValueError):
        ClassicalCode(np.array([[2, 0]]), q=2)
    assert minimum_distance(np.array([[1, 1, 1, 1]])) == 4


def test_generator_from_file(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# [6,3,3]\n1 0 0 1 1 0\n0 1 0 1 0 1\n\n0 0 1 0 1 1\n")
    code = ClassicalCode.from_file(path)
    assert np.array_equal(code.generator, SIX_THREE_THREE) and code.d == 3
    bad = tmp_path / "bad.txt"
    bad.write_text("1 0\n1\n")
    with pytest.raises(ValueError):
        ClassicalCode.from_file(bad)


def test_config_checks_dimension_and_distance():
    with pytest.raises(ValueError, match="dimension"):
        EcicConfig(5, 1, 1, classical_code_for(3, 1))
    with pytest.raises(ValueError, match="distance"):
        EcicConfig(5, 2, 2, classical_code_for(3, 1))


def test_cluster_total_is_24_for_the_l5_i2_example():
    cfg = EcicConfig.default(5, 2, 1)
    blocks = ecic_encode_cluster(cfg, L5_2, np.zeros((L5_2.n, 2), dtype=np.uint8))
    assert [b.shape[0] for b in blocks.values()] == [6, 6, 6, 6]
    assert sum(b.shape[0] for b in blocks.values()) == 24


def test_zero_delta_reduces_to_plain_encoding():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 256, (5, 4), dtype=np.uint8)
    cfg = EcicConfig.default(5, 2, 0)
    plain = encode_block(build_encoder(5, 2), x)
    coded = ecic_encode(cfg, x)
    assert np.array_equal(block_payloads(coded), block_payloads(plain))
    assert all(np.array_equal(a.coefficients, b.coefficients) for a, b in zip(coded, plain))


def test_composite_coefficients_describe_payloads():
    rng = np.random.default_rng(1)
    x = rng.integers(0, 256, (5, 3), dtype=np.uint8)
    cfg = EcicConfig.default(5, 2, 1)
    from v2vic.gf import GF2

    for t in ecic_encode(cfg, x):
        assert np.array_equal(t.payload, GF2.matmul(t.coefficients[None, :], x)[0])


def test_inject_errors_patterns():
    block = np.zeros((6, 2), dtype=np.uint8)
    assert np.array_equal(inject_errors(block, []), block)
    hit = inject_errors(block, [(3, None, 1)], delta=1)
    assert hit[3].tolist() == [1, 1] and hit.sum() == 2
    hit = inject_errors(block, [(3, 1, 0x80)], delta=1)
    assert hit[3].tolist() == [0, 0x80]
    with pytest.raises(ValueError, match="delta"):
        inject_errors(block, [(0, None, 1), (1, None, 1)], delta=1)
    # two entries on one transmission still count as one error position
    inject_errors(block, [(2, 0, 1), (2, 1, 1)], delta=1)


def test_single_flip_is_at_distance_one_per_symbol():
    code = classical_code_for(3, 1)
    word = code.encode([1, 0, 1])
    block = np.packbits(word[:, None], axis=1)
    flipped = inject_errors(block, [(3, None, 0x80)])
    diff = np.unpackbits(flipped, axis=1)[:, 0] ^ word
    assert diff.sum() == 1 and diff[3] == 1


@pytest.mark.parametrize("direction", ["right", "left"])
def test_neighbor_decode_with_any_single_error(direction):
    rng = np.random.default_rng(2)
    x = rng.integers(0, 256, (5, 6), dtype=np.uint8)
    cfg = EcicConfig.default(5, 2, 1)
    block = block_payloads(ecic_encode(cfg, x))
    side = x[:2] if direction == "right" else x[3:]
    assert np.array_equal(ecic_decode(cfg, direction, side, block), x)
    for pos in range(6):
        bad = inject_errors(block, [(pos, None, int(rng.integers(1, 256)))], delta=1)
        assert np.array_equal(ecic_decode(cfg, direction, side, bad), x)


def test_cluster_decoding_with_errors_in_every_block():
    rng = np.random.default_rng(3)
    packets = rng.integers(0, 256, (L5_2.n, 4), dtype=np.uint8)
    cfg = EcicConfig.default(5, 2, 1)
    blocks = ecic_encode_cluster(cfg, L5_2, packets)
    for m in blocks:
        blocks[m] = inject_errors(blocks[m], [(int(rng.integers(6)), None, 0xFF)], delta=1)
    decoded = ecic_decode_cluster(cfg, L5_2, layout_side_information(L5_2), blocks, packets)
    assert all(np.array_equal(decoded[v], packets) for v in range(4))


def test_two_errors_exceed_the_guarantee():
    # exhaustive over position pairs: documents behaviour, no correctness claim
    code = classical_code_for(3, 1)
    outcomes = {"ambiguous": 0, "wrong": 0, "right": 0}
    for msg in itertools.product(range(2), repeat=3):
        word = np.packbits(code.encode(msg)[:, None], axis=1)
        for a, b in itertools.combinations(range(6), 2):
            bad = inject_errors(word, [(a, None, 0x80), (b, None, 0x80)])
            try:
                got = np.unpackbits(correct_block(code, bad), axis=1)[:, 0]
            except DecodingAmbiguity:
                outcomes["ambiguous"] += 1
                continue
            outcomes["right" if got.tolist() == list(msg) else "wrong"] += 1
    assert outcomes["right"] == 0
    assert outcomes["ambiguous"] + outcomes["wrong"] == 8 * 15
    # both failure modes occur
    assert outcomes["ambiguous"] > 0 and outcomes["wrong"] > 0


def test_correct_block_over_odd_field():
    code = ClassicalCode(np.array([[1, 1, 1]], dtype=np.uint8), q=3)
    received = np.array([[2, 1], [2, 1], [0, 1]], dtype=np.uint8)
    assert correct_block(code, received).tolist() == [[2, 1]]
    with pytest.raises(ValueError):
        correct_block(code, received[:2])
