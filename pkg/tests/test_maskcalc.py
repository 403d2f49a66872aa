import itertools

import pytest
from hypothesis import given, strategies as st

from services.bitseq import BinaryWord, generate_prefix, SeqId, to_binary, word_runs
from services.errors import MaskError, OversizeError
from services.maskcalc import (
    MaskKind, MaskOp, OpSequence, all_masks, apply_mask, bfs_min_ops, compose_b_as_three_a,
    distance_table, mask_from_word, mask_word, min_ops_mixed, min_ops_type_a, min_ops_type_a_bfs,
    prefix_flip_sequence, run_delta,
)


def test_mask_words():
    assert str(mask_word(MaskOp.type_a(5, 2))) == '00111'
    assert str(mask_word(MaskOp.type_a(5, 5))) == '00000'
    assert str(mask_word(MaskOp.type_b(5, 1, 4))) == '11110'
    assert str(mask_word(MaskOp.type_b(5, 2, 2))) == '01101'
    assert MaskOp.type_b(5, 1, 4).as_int() == 30


@pytest.mark.parametrize('factory', [
    lambda: MaskOp.type_a(5, 6),
    lambda: MaskOp.type_a(5, -1),
    lambda: MaskOp.type_b(5, 0, 2),
    lambda: MaskOp.type_b(5, 1, 1),
    lambda: MaskOp.type_b(5, 3, 3),
    lambda: MaskOp(MaskKind.A, 5, 1, 2),
    lambda: MaskOp(MaskKind.B, 5, 1),
])
def test_invalid_masks(factory):
    with pytest.raises(MaskError):
        factory()


def test_apply_mask_length_mismatch():
    with pytest.raises(MaskError):
        apply_mask(MaskOp.type_a(5, 0), BinaryWord.from_str('101'))


def test_compose_b_as_three_a():
    parts = compose_b_as_three_a(MaskOp.type_b(5, 2, 2))
    assert [op.t for op in parts] == [1, 3, 4]
    assert parts.combined_mask() == 0b01101
    with pytest.raises(MaskError):
        compose_b_as_three_a(MaskOp.type_a(5, 1))


def test_compose_exhaustive_small_lengths():
    for L in range(3, 11):
        for op in all_masks(L, (MaskKind.B,)):
            assert compose_b_as_three_a(op).combined_mask() == op.as_int()


def test_mask_from_word():
    assert mask_from_word(5, 30) == MaskOp.type_b(5, 1, 4)
    assert mask_from_word(5, 0b01101) == MaskOp.type_b(5, 2, 2)
    assert mask_from_word(5, 0b00111) == MaskOp.type_a(5, 2)
    assert mask_from_word(5, 0) == MaskOp.type_a(5, 5)
    assert mask_from_word(5, 0b10101) is None
    assert mask_from_word(5, 0b11011) == MaskOp.type_b(5, 1, 2)
    assert mask_from_word(5, 0b10110) is None
    assert mask_from_word(3, 8) is None


def test_mask_from_word_inverts_mask_word():
    for L in range(1, 9):
        for op in all_masks(L):
            assert mask_from_word(L, op.as_int()) == op


def test_all_masks_order_and_count():
    masks = all_masks(4)
    kinds = [op.kind for op in masks]
    assert kinds == sorted(kinds, key=lambda k: k.value)
    # A(0..3) и B(t, s) с t >= 1, s >= 2, t + s <= 4
    assert len(masks) == 4 + 3
    assert MaskOp.type_a(4, 4) not in masks


def test_min_ops_type_a_equals_runs():
    count, ops = min_ops_type_a(BinaryWord.from_str('1011'))
    assert count == 3
    assert ops.apply(BinaryWord.from_str('1011')).is_zero()
    assert min_ops_type_a(BinaryWord.zeros(4))[0] == 0
    with pytest.raises(MaskError):
        min_ops_type_a(BinaryWord.from_str('0101'))


def test_prefix_flip_sequence():
    word = BinaryWord.from_str('1101')
    flips = prefix_flip_sequence(word)
    assert [op.t for op in flips] == [0, 2, 3]
    assert flips.combined_mask() == word.to_int()


def test_min_ops_type_a_against_search():
    for n in range(1, 1 << 10):
        word = to_binary(n)
        count, ops = min_ops_type_a(word)
        assert count == word_runs(word) == min_ops_type_a_bfs(word)
        assert ops.combined_mask() == n


def test_min_ops_mixed():
    count, ops = min_ops_mixed(BinaryWord.from_str('11110'))
    assert count == 1
    assert list(ops) == [MaskOp.type_b(5, 1, 4)]
    count, ops = min_ops_mixed(to_binary(1000))
    assert ops.combined_mask() == 1000
    assert count <= 4


def test_min_ops_mixed_oversize():
    with pytest.raises(OversizeError):
        min_ops_mixed(to_binary(100), max_len=5)


def test_distance_table_agrees_with_forward_search():
    L = 7
    dist = distance_table(L)
    masks = all_masks(L)
    for value in range(1 << L):
        assert dist[value] == bfs_min_ops(BinaryWord.of_value(value, L), masks)


def test_distance_table_a_only_is_run_count():
    L = 10
    dist = distance_table(L, (MaskKind.A,))
    runs = generate_prefix(SeqId.RUN_COUNT, (1 << L) - 1)
    for value in range(1 << (L - 1), 1 << L):
        assert dist[value] == runs[value - 1]


def test_mixed_minimum_lower_bound():
    for L in range(1, 11):
        dist = distance_table(L)
        for value in range(1 << (L - 1), 1 << L):
            assert dist[value] >= word_runs(to_binary(value)) // 3


def test_run_delta():
    assert run_delta(BinaryWord.from_str('1011'), MaskOp.type_a(4, 3)) == 1
    assert run_delta(BinaryWord.from_str('1000'), MaskOp.type_a(4, 0)) == 0
    assert run_delta(BinaryWord.from_str('1111'), MaskOp.type_a(4, 0)) == -1


def test_run_delta_of_b_masks_on_expansions():
    # слова со старшей единицей, L <= 12
    low, high = 0, 0
    for L in range(3, 13):
        masks = all_masks(L, (MaskKind.B,))
        for value in range(1 << (L - 1), 1 << L):
            word = BinaryWord.of_value(value, L)
            for op in masks:
                delta = run_delta(word, op)
                low, high = min(low, delta), max(high, delta)
    assert (low, high) == (-3, 3)


def test_run_delta_with_leading_zero_reaches_four():
    op = MaskOp.type_b(5, 2, 2)
    assert run_delta(BinaryWord.zeros(5), op) == 4
    assert run_delta(BinaryWord.from_str('01101'), op) == -4


def test_op_sequence_rejects_mixed_lengths():
    with pytest.raises(MaskError):
        OpSequence((MaskOp.type_a(4, 0), MaskOp.type_a(5, 0)), 4)


@st.composite
def word_and_masks(draw):
    L = draw(st.integers(min_value=3, max_value=16))
    masks = all_masks(L)
    first = draw(st.sampled_from(masks))
    second = draw(st.sampled_from(masks))
    value = draw(st.integers(min_value=0, max_value=(1 << L) - 1))
    return BinaryWord.of_value(value, L), first, second


@given(word_and_masks())
def test_masks_commute_and_are_involutions(case):
    word, first, second = case
    assert apply_mask(first, apply_mask(second, word)) == apply_mask(second, apply_mask(first, word))
    assert apply_mask(first, apply_mask(first, word)) == word


def test_masks_are_involutions_exhaustive():
    for L in range(1, 11):
        words = [BinaryWord.of_value(value, L) for value in range(1 << L)]
        for op in all_masks(L):
            for word in words:
                once = apply_mask(op, word)
                assert once.to_int() == word.to_int() ^ op.as_int()
                assert apply_mask(op, once) == word


def _sample_words(L):
    alternating = int('10' * L, 2) >> L
    return [BinaryWord.zeros(L), BinaryWord.of_value((1 << L) - 1, L), BinaryWord.of_value(alternating, L),
            BinaryWord.of_value(alternating ^ ((1 << L) - 1), L)]


def test_mask_triples_are_order_independent():
    for L in range(1, 9):
        masks = all_masks(L)
        samples = _sample_words(L)
        for triple in itertools.combinations_with_replacement(masks, 3):
            combined = triple[0].as_int() ^ triple[1].as_int() ^ triple[2].as_int()
            for order in set(itertools.permutations(triple)):
                ops = OpSequence(order, L)
                assert ops.combined_mask() == combined
                for word in samples:
                    assert ops.apply(word).to_int() == word.to_int() ^ combined


def test_mask_triples_on_all_short_words():
    for L in range(1, 6):
        masks = all_masks(L)
        words = [BinaryWord.of_value(value, L) for value in range(1 << L)]
        for triple in itertools.product(masks, repeat=3):
            expected = OpSequence(triple, L)
            reference = [expected.apply(word) for word in words]
            for order in itertools.permutations(triple):
                assert [OpSequence(order, L).apply(word) for word in words] == reference
