import numpy as np
import pytest

from services.bitseq import run_count
from services.errors import OversizeError, PalinrulerError
from services.levelang import (
    PL_B_MEMBERSHIP_CAP, Dfa, canonical, dfa_for_run_count, equivalent_up_to, is_isomorphic,
    learn_level_set_dfa, level_set, membership_oracle, minimize, parse_dfa, run_dfa_all, serialize,
    verify_dfa,
)
from services.pallen import pal_length_a, pal_length_b

BOUND = 1 << 12


@pytest.fixture(scope='module')
def pl_a_table():
    return pal_length_a(BOUND)


@pytest.mark.parametrize('m', range(1, 7))
def test_run_count_automata(m, pl_a_table):
    dfa = dfa_for_run_count(m)
    assert dfa.num_states == m + 2
    assert verify_dfa(dfa, level_set(pl_a_table, m, BOUND)) == []
    assert verify_dfa(minimize(dfa), level_set(run_count, m, BOUND)) == []


def test_level_sets_partition(pl_a_table):
    seen = np.zeros(BOUND + 1, dtype=int)
    for m in range(1, 14):
        seen += level_set(pl_a_table, m, BOUND).indicator()
    assert seen[1:].tolist() == [1] * BOUND


def test_level_set_examples():
    assert level_set(run_count, 1, 15).members == (1, 3, 7, 15)
    assert 1000 in level_set(run_count, 4, 1000)
    assert 17 in level_set(pal_length_b(32), 2, 32)
    with pytest.raises(PalinrulerError):
        level_set(run_count, 0, 10)
    with pytest.raises(PalinrulerError):
        level_set(pal_length_b(16), 1, 32)


def test_minimize():
    small = minimize(dfa_for_run_count(1))
    assert small.num_states == 3
    assert minimize(small) == small
    assert is_isomorphic(minimize(dfa_for_run_count(3)), dfa_for_run_count(3))


def test_minimize_merges_equivalent_states():
    # два одинаковых стока
    dfa = Dfa(4, 0, frozenset({1}), ((2, 1), (3, 1), (2, 2), (3, 3)))
    assert minimize(dfa).num_states == 3


def test_corrupted_automaton_is_detected():
    good = dfa_for_run_count(2)
    bad = good.with_transition(2, 1, 1)
    mismatches = verify_dfa(bad, level_set(run_count, 2, 64))
    assert mismatches[0] == {'i': 10, 'expected': False, 'accepted': True}
    assert equivalent_up_to(good, bad, 4) == (1, 0, 1, 0)
    assert equivalent_up_to(good, bad, 3) is None


def test_run_dfa_all_matches_single_runs():
    dfa = dfa_for_run_count(3)
    states = run_dfa_all(dfa, 500)
    for i in range(1, 501):
        bits = [int(ch) for ch in bin(i)[2:]]
        assert states[i] == dfa.run(bits)
        assert (states[i] in dfa.accepting) == dfa.accepts_index(i)


def test_learn_run_count_level():
    ok, message, learned = learn_level_set_dfa(membership_oracle('run-count', 2, 1024), 1024, 8)
    assert ok, message
    assert learned.num_states == 4
    assert is_isomorphic(learned, minimize(dfa_for_run_count(2)))
    assert verify_dfa(learned, level_set(run_count, 2, BOUND)) == []


def test_learn_fails_on_small_budget():
    ok, message, learned = learn_level_set_dfa(membership_oracle('run-count', 3, 1024), 1024, 2)
    assert not ok
    assert learned is None
    assert 'budget' in message


def test_learn_empty_language():
    ok, _, learned = learn_level_set_dfa(lambda i: False, 256, 4)
    assert ok
    assert learned.num_states == 1
    assert not learned.accepting
    with pytest.raises(PalinrulerError):
        learn_level_set_dfa(lambda i: False, 256, 0)


def test_serialize_round_trip():
    dfa = dfa_for_run_count(3)
    text = serialize(dfa)
    assert text.startswith('states 5 initial 0\n')
    assert text.endswith('accepting 3\n')
    assert parse_dfa(text) == dfa
    assert canonical(parse_dfa(text)) == canonical(dfa)


@pytest.mark.parametrize('text', [
    '',
    'states 2 start 0\n',
    'states x initial 0\n',
    'states 2 initial 0\n0 0 1\n0 1 1\n1 0 1\naccepting 1\n',
    'states 2 initial 0\n0 0 1\n0 1 1\n1 0 1\n1 1 x\naccepting 1\n',
    'states 2 initial 0\n0 0 1\n0 1 1\n1 0 1\n1 1 5\naccepting 1\n',
    'states 2 initial 0\n0 0 1\n0 2 1\n1 0 1\n1 1 1\naccepting 1\n',
])
def test_parse_errors(text):
    with pytest.raises(PalinrulerError):
        parse_dfa(text)


def test_membership_oracles():
    assert membership_oracle('run_count', 4, 10)(1000)
    assert membership_oracle('ruler', 3, 10)(8)
    assert not membership_oracle('period-doubling', 1, 10)(4)
    pl_b = membership_oracle('pl-b', 2, 32)
    assert pl_b(17)
    # запрос за пределами N достраивает таблицу
    assert pl_b(100) == (pal_length_b(100)[100] == 2)
    with pytest.raises(OversizeError):
        pl_b(PL_B_MEMBERSHIP_CAP + 1)
    with pytest.raises(PalinrulerError):
        membership_oracle('fibonacci', 1, 10)


def test_level_set_membership_set_is_built_once():
    ls = level_set(run_count, 2, 4096)
    first = ls._member_set
    assert 4 in ls and 5 not in ls
    assert ls._member_set is first
    assert first == frozenset(ls.members)
    assert ls == level_set(run_count, 2, 4096)
