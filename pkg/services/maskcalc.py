"""
Маски типов A и B и операции с ними.

    A(t)    = 0^t 1^(L-t)                 (0 <= t <= L, A(L) - тождественная маска)
    B(t, s) = 0^(t-1) 1^s 0 1^(L-t-s)      (t >= 1, s >= 2, t + s <= L)

Применение маски - поразрядный XOR, поэтому порядок применения не важен,
а минимальное число масок до нулевого слова - расстояние в графе Кэли
группы {0,1}^L с порождающими словами масок.
"""

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import default_max_len
from services.bitseq import BinaryWord, run_encode, word_runs
from services.errors import MaskError, OversizeError

logger = logging.getLogger(__name__)


class MaskKind(str, Enum):
    A = 'A'
    B = 'B'


@dataclass(frozen=True)
class MaskOp:
    kind: MaskKind
    length: int
    t: int
    s: Optional[int] = None

    def __post_init__(self):
        L, t, s = self.length, self.t, self.s
        if L < 1:
            raise MaskError(f"mask length must be >= 1, got L={L}")
        if self.kind is MaskKind.A:
            if s is not None:
                raise MaskError(f"type A mask takes no s parameter (got s={s})")
            if not 0 <= t <= L:
                raise MaskError(f"type A mask needs 0 <= t <= L, got t={t}, L={L}")
        else:
            if s is None:
                raise MaskError("type B mask needs an s parameter")
            if t < 1 or s < 2 or t + s > L:
                raise MaskError(f"type B mask needs t >= 1, s >= 2, t + s <= L; got t={t}, s={s}, L={L}")

    @classmethod
    def type_a(cls, length: int, t: int) -> 'MaskOp':
        return cls(MaskKind.A, length, t)

    @classmethod
    def type_b(cls, length: int, t: int, s: int) -> 'MaskOp':
        return cls(MaskKind.B, length, t, s)

    @property
    def is_identity(self) -> bool:
        return self.kind is MaskKind.A and self.t == self.length

    def sort_key(self) -> Tuple[int, int, int]:
        """Порядок при равной длине решений: A раньше B, затем меньшее t, затем меньшее s"""
        return (0 if self.kind is MaskKind.A else 1, self.t, self.s or 0)

    def as_int(self) -> int:
        """Слово маски как целое (позиция 1 - старший разряд)"""
        L, t = self.length, self.t
        if self.kind is MaskKind.A:
            return (1 << (L - t)) - 1
        s = self.s
        tail = (1 << (L - t - s)) - 1
        block = ((1 << s) - 1) << (L - t - s + 1)
        return block | tail

    def __str__(self) -> str:
        if self.kind is MaskKind.A:
            return f"A(L={self.length},t={self.t})"
        return f"B(L={self.length},t={self.t},s={self.s})"

    def to_dict(self) -> dict:
        data = {'kind': self.kind.value, 'length': self.length, 't': self.t}
        if self.s is not None:
            data['s'] = self.s
        return data


@dataclass(frozen=True)
class OpSequence:
    """Упорядоченный список масок одной длины (может быть пустым)"""
    ops: Tuple[MaskOp, ...]
    length: int

    def __post_init__(self):
        object.__setattr__(self, 'ops', tuple(self.ops))
        for op in self.ops:
            if op.length != self.length:
                raise MaskError(f"mask {op} does not match sequence length {self.length}")

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def combined_mask(self) -> int:
        value = 0
        for op in self.ops:
            value ^= op.as_int()
        return value

    def apply(self, word: BinaryWord) -> BinaryWord:
        for op in self.ops:
            word = apply_mask(op, word)
        return word

    def to_list(self) -> List[dict]:
        return [op.to_dict() for op in self.ops]


# ==================== ОСНОВНЫЕ ОПЕРАЦИИ ====================

def mask_word(op: MaskOp) -> BinaryWord:
    return BinaryWord.of_value(op.as_int(), op.length)


def apply_mask(op: MaskOp, word: BinaryWord) -> BinaryWord:
    """Позиции с битом маски 1 инвертируются, остальные сохраняются"""
    if word.length != op.length:
        raise MaskError(f"word length {word.length} does not match mask {op}")
    return BinaryWord.of_value(word.to_int() ^ op.as_int(), op.length)


def compose_b_as_three_a(op: MaskOp) -> OpSequence:
    """B(t, s) = A(t-1) . A(t+s-1) . A(t+s)"""
    if op.kind is not MaskKind.B:
        raise MaskError(f"expected a type B mask, got {op}")
    L = op.length
    return OpSequence((
        MaskOp.type_a(L, op.t - 1),
        MaskOp.type_a(L, op.t + op.s - 1),
        MaskOp.type_a(L, op.t + op.s),
    ), L)


def mask_from_word(length: int, value: int) -> Optional[MaskOp]:
    """Распознаёт слово value длины length как маску A или B (None - не маска)"""
    if value < 0 or value >= (1 << length):
        return None
    # A(t): младшие L-t единиц
    if value & (value + 1) == 0:
        return MaskOp.type_a(length, length - value.bit_length())
    # B(t, s): убираем хвост из единиц, за ним ровно один ноль, затем блок единиц
    tail = (~value & (value + 1)).bit_length() - 1
    rest = value >> (tail + 1)
    if rest == 0 or rest & 1 == 0 or rest & (rest + 1) != 0:
        return None
    s = rest.bit_length()
    t = length - tail - s
    if t < 1 or s < 2:
        return None
    return MaskOp.type_b(length, t, s)


def all_masks(length: int, kinds: Iterable[MaskKind] = (MaskKind.A, MaskKind.B)) -> List[MaskOp]:
    """Все маски длины length без тождественной A(L), в порядке sort_key"""
    kinds = set(kinds)
    masks = []
    if MaskKind.A in kinds:
        masks.extend(MaskOp.type_a(length, t) for t in range(length))
    if MaskKind.B in kinds:
        masks.extend(
            MaskOp.type_b(length, t, s)
            for t in range(1, length + 1)
            for s in range(2, length - t + 1)
        )
    return sorted(masks, key=MaskOp.sort_key)


def run_delta(word: BinaryWord, op: MaskOp) -> int:
    """
    Изменение числа серий при применении маски (у нулевого слова 0 серий).

    Для слов со старшей единицей маска B меняет число серий на -3..+3. На словах
    с ведущим нулём возможно и +-4: B(L=5,t=2,s=2) переводит 00000 в 01101.
    """
    return word_runs(apply_mask(op, word)) - word_runs(word)


# ==================== ТИП A: ТОЧНЫЙ МИНИМУМ ====================

def _check_canonical(word: BinaryWord) -> None:
    if word.length == 0:
        raise MaskError("empty word")
    if word.bits[0] == 0 and not word.is_zero():
        raise MaskError(f"word {word} has a leading zero; binary expansions start with 1")


def min_ops_type_a(word: BinaryWord) -> Tuple[int, OpSequence]:
    """
    Минимум масок типа A до нулевого слова: равен числу серий.

    Каждый шаг инвертирует последнюю серию (она сливается с соседней),
    когда слово становится 1...1, применяется A(0).
    """
    _check_canonical(word)
    L = word.length
    ops = []
    current = word
    while not current.is_zero():
        lengths = run_encode(current).run_lengths
        t = 0 if len(lengths) == 1 else L - lengths[-1]
        op = MaskOp.type_a(L, t)
        ops.append(op)
        current = apply_mask(op, current)
    return len(ops), OpSequence(tuple(ops), L)


def prefix_flip_sequence(word: BinaryWord) -> OpSequence:
    """A(0), A(i_1), A(i_1+i_2), ... по длинам серий i_1, i_2, ... слова"""
    _check_canonical(word)
    L = word.length
    if word.is_zero():
        return OpSequence((), L)
    starts = (0,) + run_encode(word).boundaries()
    return OpSequence(tuple(MaskOp.type_a(L, t) for t in starts), L)


# ==================== ПОИСК В ШИРИНУ ПО ПРОСТРАНСТВУ СЛОВ ====================

@lru_cache(maxsize=8)
def _distance_table(length: int, kinds: Tuple[MaskKind, ...]) -> np.ndarray:
    masks = np.array([op.as_int() for op in all_masks(length, kinds)], dtype=np.int64)
    size = 1 << length
    dist = np.full(size, -1, dtype=np.int8)
    dist[0] = 0
    frontier = np.zeros(1, dtype=np.int64)
    level = 0

    while frontier.size:
        level += 1
        found = []
        for mask in masks:
            candidates = frontier ^ mask
            fresh = candidates[dist[candidates] < 0]
            if fresh.size:
                dist[fresh] = level
                found.append(fresh)
        frontier = np.unique(np.concatenate(found)) if found else np.zeros(0, dtype=np.int64)

    logger.debug(f"Distance table L={length} kinds={[k.value for k in kinds]}: depth {level - 1}")
    dist.flags.writeable = False
    return dist


def distance_table(length: int, kinds: Sequence[MaskKind] = (MaskKind.A, MaskKind.B)) -> np.ndarray:
    """
    Минимальное число масок для каждого из 2^L слов (индекс - значение слова).

    Таблица строится поиском в ширину от нулевого слова: маски - инволюции,
    а группа коммутативна, поэтому расстояние от w до 0 равно расстоянию от 0 до w.
    """
    if length < 1:
        raise MaskError(f"length must be >= 1, got {length}")
    key = tuple(sorted(set(kinds), key=lambda k: k.value))
    return _distance_table(length, key)


@lru_cache(maxsize=32)
def _mask_pairs(length: int, kinds: Tuple[MaskKind, ...]) -> Tuple[Tuple[MaskOp, int], ...]:
    return tuple((op, op.as_int()) for op in all_masks(length, kinds))


def _solve(word: BinaryWord, kinds: Tuple[MaskKind, ...], max_len: int) -> Tuple[int, OpSequence]:
    _check_canonical(word)
    L = word.length
    if L > max_len:
        raise OversizeError(f"word length {L} exceeds max_len={max_len}; raise max_len (or PALINRULER_MAX_LEN) to search")
    value = word.to_int()
    if value == 0:
        return 0, OpSequence((), L)

    dist = distance_table(L, kinds)
    pairs = _mask_pairs(L, kinds)
    ops = []
    while value:
        # Лексикографически наименьший ход, сохраняющий оптимальность
        target = dist[value] - 1
        for op, mask in pairs:
            if dist[value ^ mask] == target:
                ops.append(op)
                value ^= mask
                break
    return len(ops), OpSequence(tuple(ops), L)


def min_ops_mixed(word: BinaryWord, max_len: Optional[int] = None) -> Tuple[int, OpSequence]:
    """Точный минимум масок A или B, переводящих слово в 0...0"""
    bound = default_max_len() if max_len is None else max_len
    return _solve(word, (MaskKind.A, MaskKind.B), bound)


def min_ops_type_a_bfs(word: BinaryWord, max_len: Optional[int] = None) -> int:
    """Тот же поиск только по маскам A (оракул для min_ops_type_a)"""
    bound = default_max_len() if max_len is None else max_len
    count, _ = _solve(word, (MaskKind.A,), bound)
    return count


def bfs_min_ops(word: BinaryWord, masks: Sequence[MaskOp]) -> int:
    """Прямой поиск в ширину от слова к нулю с множеством посещённых слов"""
    start = word.to_int()
    mask_values = [op.as_int() for op in masks]
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        value, depth = queue.popleft()
        if value == 0:
            return depth
        for mask in mask_values:
            nxt = value ^ mask
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, depth + 1))
    return -1
