"""
Регулярные языки множеств уровня S(eps) = { i : f(i) = eps }.

Слова читаются старшим битом вперёд. Сравнение языков ведётся только на
двоичных записях (без ведущих нулей): автомат может принимать слова с
ведущими нулями, verify_dfa такие слова не подаёт.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from services.bitseq import period_doubling, ruler, run_count
from services.errors import OversizeError, PalinrulerError
from services.pallen import pal_length_b

logger = logging.getLogger(__name__)

ALPHABET = (0, 1)


@dataclass(frozen=True)
class Dfa:
    """Полный ДКА над {0, 1}: состояния 0..K-1, delta[q] = (q по 0, q по 1)"""
    num_states: int
    initial: int
    accepting: FrozenSet[int]
    delta: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, 'accepting', frozenset(self.accepting))
        object.__setattr__(self, 'delta', tuple(tuple(row) for row in self.delta))
        K = self.num_states
        if K < 1 or len(self.delta) != K:
            raise PalinrulerError(f"dfa needs a transition row for each of {K} states")
        if not 0 <= self.initial < K:
            raise PalinrulerError(f"initial state {self.initial} out of range")
        for q, row in enumerate(self.delta):
            if len(row) != 2 or any(not 0 <= target < K for target in row):
                raise PalinrulerError(f"state {q}: transitions {row} are not total over {{0, 1}}")
        if any(not 0 <= q < K for q in self.accepting):
            raise PalinrulerError("accepting state out of range")

    @property
    def states(self) -> range:
        return range(self.num_states)

    def run(self, bits: Iterable[int], state: Optional[int] = None) -> int:
        q = self.initial if state is None else state
        for bit in bits:
            q = self.delta[q][bit]
        return q

    def accepts(self, bits: Iterable[int]) -> bool:
        return self.run(bits) in self.accepting

    def accepts_index(self, i: int) -> bool:
        """Принимает ли автомат двоичную запись i >= 1"""
        return self.accepts((i >> k) & 1 for k in range(i.bit_length() - 1, -1, -1))

    def reachable(self) -> List[int]:
        """Достижимые состояния в порядке обхода в ширину (0 раньше 1)"""
        order = [self.initial]
        seen = {self.initial}
        for q in order:
            for target in self.delta[q]:
                if target not in seen:
                    seen.add(target)
                    order.append(target)
        return order

    def with_transition(self, state: int, bit: int, target: int) -> 'Dfa':
        rows = [list(row) for row in self.delta]
        rows[state][bit] = target
        return Dfa(self.num_states, self.initial, self.accepting, tuple(tuple(r) for r in rows))

    def with_accepting(self, accepting: Iterable[int]) -> 'Dfa':
        return Dfa(self.num_states, self.initial, frozenset(accepting), self.delta)


@dataclass(frozen=True)
class LevelSet:
    epsilon: int
    bound: int
    members: Tuple[int, ...]

    def __contains__(self, i: int) -> bool:
        return i in self._member_set

    @cached_property
    def _member_set(self) -> FrozenSet[int]:
        return frozenset(self.members)

    def indicator(self) -> np.ndarray:
        """Булев массив длины bound+1: ячейка i - принадлежность i"""
        flags = np.zeros(self.bound + 1, dtype=bool)
        flags[list(self.members)] = True
        return flags


# ==================== АВТОМАТЫ ДЛЯ ЧИСЛА СЕРИЙ ====================

def dfa_for_run_count(m: int) -> Dfa:
    """
    Слова 1{1}*0{0}*1{1}*... из ровно m серий, первая серия из единиц.

    Состояния: 0 - начальное, 1..m - внутри серии с этим номером, m+1 - сток.
    """
    if m < 1:
        raise PalinrulerError(f"run count level must be >= 1, got {m}")
    sink = m + 1
    rows = [(sink, 1)]
    for block in range(1, m + 1):
        bit = block & 1
        stay = block
        nxt = block + 1 if block < m else sink
        rows.append((stay, nxt) if bit == 0 else (nxt, stay))
    rows.append((sink, sink))
    return Dfa(m + 2, 0, frozenset({m}), tuple(rows))


# ==================== МНОЖЕСТВА УРОВНЯ ====================

def level_set(source, epsilon: int, N: int) -> LevelSet:
    """Отсортированные i <= N с f(i) = epsilon; source - таблица или функция"""
    if epsilon < 1 or N < 1:
        raise PalinrulerError(f"level set needs epsilon >= 1 and N >= 1, got {epsilon}, {N}")
    if callable(source):
        members = tuple(i for i in range(1, N + 1) if source(i) == epsilon)
    else:
        if source.N < N:
            raise PalinrulerError(f"table covers {source.N} terms, level set up to {N} requested")
        values = np.asarray(source.values[1:N + 1])
        members = tuple(int(k + 1) for k in np.nonzero(values == epsilon)[0])
    return LevelSet(epsilon, N, members)


def run_dfa_all(dfa: Dfa, N: int) -> np.ndarray:
    """Конечные состояния автомата на записях 1..N (ячейка i); по уровням длины записи"""
    states = np.zeros(N + 1, dtype=np.int64)
    delta = np.array(dfa.delta, dtype=np.int64)
    if N >= 1:
        states[1] = delta[dfa.initial, 1]
    start = 2
    while start <= N:
        stop = min(2 * start, N + 1)
        idx = np.arange(start, stop, dtype=np.int64)
        states[idx] = delta[states[idx >> 1], idx & 1]
        start = stop
    return states


def verify_dfa(dfa: Dfa, ls: LevelSet) -> List[dict]:
    """Все i <= bound, где принятие записи i расходится с принадлежностью уровню"""
    if ls.bound < 1:
        return []
    states = run_dfa_all(dfa, ls.bound)
    accepting = np.zeros(dfa.num_states, dtype=bool)
    accepting[list(dfa.accepting)] = True
    accepted = accepting[states]
    expected = ls.indicator()
    bad = np.nonzero(accepted[1:] != expected[1:])[0] + 1
    return [{'i': int(i), 'expected': bool(expected[i]), 'accepted': bool(accepted[i])} for i in bad]


# ==================== МИНИМИЗАЦИЯ ====================

def minimize(dfa: Dfa) -> Dfa:
    """Удаление недостижимых состояний и уточнение разбиения (Мур), нумерация по обходу в ширину"""
    order = dfa.reachable()
    position = {q: k for k, q in enumerate(order)}
    block = {q: (1 if q in dfa.accepting else 0) for q in order}

    while True:
        signatures = {q: (block[q], block[dfa.delta[q][0]], block[dfa.delta[q][1]]) for q in order}
        numbering: Dict[tuple, int] = {}
        refined = {}
        for q in order:
            refined[q] = numbering.setdefault(signatures[q], len(numbering))
        stable = len(numbering) == len(set(block.values()))
        block = refined
        if stable:
            break

    representative = {}
    for q in sorted(order, key=position.get):
        representative.setdefault(block[q], q)
    rows = []
    for b in range(len(representative)):
        q = representative[b]
        rows.append((block[dfa.delta[q][0]], block[dfa.delta[q][1]]))
    accepting = frozenset(block[q] for q in order if q in dfa.accepting)
    return canonical(Dfa(len(rows), block[dfa.initial], accepting, tuple(rows)))


def canonical(dfa: Dfa) -> Dfa:
    """Достижимая часть с нумерацией состояний в порядке обхода в ширину"""
    order = dfa.reachable()
    rename = {q: k for k, q in enumerate(order)}
    rows = tuple((rename[dfa.delta[q][0]], rename[dfa.delta[q][1]]) for q in order)
    accepting = frozenset(rename[q] for q in order if q in dfa.accepting)
    return Dfa(len(order), 0, accepting, rows)


def is_isomorphic(first: Dfa, second: Dfa) -> bool:
    """Изоморфизм достижимых частей (для минимальных автоматов - равенство языков)"""
    return canonical(first) == canonical(second)


def equivalent_up_to(first: Dfa, second: Dfa, max_length: int) -> Optional[Tuple[int, ...]]:
    """Кратчайшее слово длины <= max_length, на котором автоматы расходятся (None - нет такого)"""
    for length in range(max_length + 1):
        for word in itertools.product(ALPHABET, repeat=length):
            if first.accepts(word) != second.accepts(word):
                return word
    return None


# ==================== ОБУЧЕНИЕ (ТАБЛИЦА НАБЛЮДЕНИЙ) ====================

Word = Tuple[int, ...]


class ObservationTable:
    """
    Таблица наблюдений: префиксы S, суффиксы E, строки для S и S*{0,1}.

    Слово принадлежит целевому языку, если это двоичная запись i >= 1
    (без ведущего нуля) и membership(i) истинно.
    """

    def __init__(self, membership: Callable[[int], bool]):
        self.membership = membership
        self.prefixes: List[Word] = [()]
        self.suffixes: List[Word] = [()]
        self.cache: Dict[Word, bool] = {}

    def query(self, word: Word) -> bool:
        if word not in self.cache:
            if not word or word[0] == 0:
                self.cache[word] = False
            else:
                value = 0
                for bit in word:
                    value = (value << 1) | bit
                self.cache[word] = bool(self.membership(value))
        return self.cache[word]

    def row(self, prefix: Word) -> Tuple[bool, ...]:
        return tuple(self.query(prefix + suffix) for suffix in self.suffixes)

    def unclosed(self) -> Optional[Word]:
        rows = {self.row(p) for p in self.prefixes}
        for prefix in self.prefixes:
            for bit in ALPHABET:
                extended = prefix + (bit,)
                if self.row(extended) not in rows:
                    return extended
        return None

    def inconsistency(self) -> Optional[Word]:
        """Новый суффикс bit+e, если два префикса с равными строками расходятся после bit"""
        for p, q in itertools.combinations(self.prefixes, 2):
            if self.row(p) != self.row(q):
                continue
            for bit in ALPHABET:
                for suffix in self.suffixes:
                    if self.query(p + (bit,) + suffix) != self.query(q + (bit,) + suffix):
                        return (bit,) + suffix
        return None

    def add_prefix(self, word: Word) -> None:
        if word not in self.prefixes:
            self.prefixes.append(word)

    def add_suffix(self, word: Word) -> None:
        if word not in self.suffixes:
            self.suffixes.append(word)

    def distinct_rows(self) -> int:
        return len({self.row(p) for p in self.prefixes})

    def hypothesis(self) -> Dfa:
        index: Dict[Tuple[bool, ...], int] = {}
        for prefix in self.prefixes:
            index.setdefault(self.row(prefix), len(index))
        rows = [None] * len(index)
        accepting = set()
        for prefix in self.prefixes:
            state = index[self.row(prefix)]
            if rows[state] is None:
                rows[state] = tuple(index[self.row(prefix + (bit,))] for bit in ALPHABET)
                if self.query(prefix):
                    accepting.add(state)
        return Dfa(len(rows), index[self.row(())], frozenset(accepting), tuple(rows))


def _counterexample(dfa: Dfa, table: ObservationTable, max_index: int) -> Optional[Word]:
    """Кратчайшее расхождение на всех словах длины <= длины записи max_index"""
    max_length = max_index.bit_length()
    for length in range(1, max_length + 1):
        for word in itertools.product(ALPHABET, repeat=length):
            if word[0] == 1:
                value = int(''.join(map(str, word)), 2)
                if value > max_index:
                    continue
            if dfa.accepts(word) != table.query(word):
                return word
    return None


def learn_level_set_dfa(membership: Callable[[int], bool], max_index: int,
                        max_states: int) -> Tuple[bool, str, Optional[Dfa]]:
    """
    Обучение автомата по запросам принадлежности (таблица наблюдений) с
    ограниченно-исчерпывающей проверкой эквивалентности: все слова до длины
    записи max_index (записи чисел > max_index пропускаются).

    Результат - гипотеза, проверенная до границы, а не теорема.
    """
    if max_states < 1:
        raise PalinrulerError(f"max_states must be >= 1, got {max_states}")
    table = ObservationTable(membership)
    rounds = 0

    while True:
        while True:
            if table.distinct_rows() > max_states:
                message = f"state budget {max_states} exhausted at bound {max_index} after {rounds} rounds"
                logger.info(f"Learner failed: {message}")
                return False, message, None
            missing = table.unclosed()
            if missing is not None:
                table.add_prefix(missing)
                continue
            suffix = table.inconsistency()
            if suffix is not None:
                table.add_suffix(suffix)
                continue
            break

        hypothesis = table.hypothesis()
        if hypothesis.num_states > max_states:
            return False, f"state budget {max_states} exhausted at bound {max_index}", None
        rounds += 1
        counter = _counterexample(hypothesis, table, max_index)
        if counter is None:
            learned = minimize(hypothesis)
            message = f"conjecture: {learned.num_states} states, consistent on all indices <= {max_index} ({rounds} rounds)"
            logger.info(f"Learner finished: {message}")
            return True, message, learned
        logger.debug(f"Round {rounds}: counterexample {''.join(map(str, counter))}")
        for k in range(1, len(counter) + 1):
            table.add_prefix(counter[:k])


# ==================== ТЕКСТОВЫЙ ФОРМАТ ====================

def serialize(dfa: Dfa) -> str:
    lines = [f"states {dfa.num_states} initial {dfa.initial}"]
    for q in dfa.states:
        for bit in ALPHABET:
            lines.append(f"{q} {bit} {dfa.delta[q][bit]}")
    lines.append(' '.join(['accepting'] + [str(q) for q in sorted(dfa.accepting)]))
    return '\n'.join(lines) + '\n'


def parse_dfa(text: str) -> Dfa:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise PalinrulerError("empty automaton text")
    header = lines[0].split()
    if len(header) != 4 or header[0] != 'states' or header[2] != 'initial':
        raise PalinrulerError(f"line 1: expected 'states K initial Q0', got {lines[0]!r}")
    try:
        K, initial = int(header[1]), int(header[3])
    except ValueError:
        raise PalinrulerError(f"line 1: non-integer header {lines[0]!r}") from None

    rows = [[None, None] for _ in range(K)]
    accepting: Sequence[int] = ()
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if parts[0] == 'accepting':
            try:
                accepting = [int(p) for p in parts[1:]]
            except ValueError:
                raise PalinrulerError(f"line {number}: non-integer accepting state in {line!r}") from None
            continue
        if len(parts) != 3:
            raise PalinrulerError(f"line {number}: expected 'q bit q2', got {line!r}")
        try:
            q, bit, target = (int(p) for p in parts)
        except ValueError:
            raise PalinrulerError(f"line {number}: non-integer transition {line!r}") from None
        if not 0 <= q < K or bit not in ALPHABET:
            raise PalinrulerError(f"line {number}: bad transition {line!r}")
        rows[q][bit] = target
    if any(target is None for row in rows for target in row):
        raise PalinrulerError("transition map is not total")
    return Dfa(K, initial, frozenset(accepting), tuple(tuple(r) for r in rows))


# ==================== ОРАКУЛЫ ПРИНАДЛЕЖНОСТИ ====================

# Верхняя граница индекса для оракула pl_b (таблица строится по запросу)
PL_B_MEMBERSHIP_CAP = 1 << 20


def membership_oracle(name: str, epsilon: int, N: int) -> Callable[[int], bool]:
    """
    Запрос принадлежности i -> (f(i) = epsilon) для обучения.

    Обучение спрашивает и об индексах больше N: для ruler, period-doubling,
    run-count и pl-a (pl_a = c) значения считаются напрямую, таблица pl-b
    достраивается по запросу до PL_B_MEMBERSHIP_CAP.
    """
    key = name.strip().lower().replace('_', '-')
    direct = {'ruler': ruler, 'period-doubling': period_doubling, 'run-count': run_count, 'pl-a': run_count}
    if key in direct:
        f = direct[key]
        return lambda i: f(i) == epsilon
    if key != 'pl-b':
        raise PalinrulerError(f"no membership oracle for {name!r}")

    cache = {'table': pal_length_b(N)}

    def member(i: int) -> bool:
        table = cache['table']
        if i > table.N:
            if i > PL_B_MEMBERSHIP_CAP:
                raise OversizeError(f"pl-b membership query {i} exceeds {PL_B_MEMBERSHIP_CAP}")
            table = cache['table'] = pal_length_b(min(max(i, 2 * table.N), PL_B_MEMBERSHIP_CAP))
        return table[i] == epsilon

    return member
