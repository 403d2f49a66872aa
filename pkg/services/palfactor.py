"""
Палиндромные факторы последовательностей a (ruler) и b (period-doubling).

Пусть в отрезке [i, j] максимум a достигается в (единственной) точке t = o*2^v1.

    a[i..j] - палиндром  <=>  i + j чётно и (j - i)/2 < 2^a[(i+j)/2]

    b[i..j] - палиндром  <=>  одна из форм:
        ACenter: i = o*2^v - x,              j = o*2^v + x,            0 <= x < 2^v
        BRight:  i = o*2^v1 - x,             j = o*2^v1 + 2^v2 + x
        BLeft:   i = o*2^v1 - 2^v2 - x,      j = o*2^v1 + x
    для форм B: v1 > v2 >= 0, v1 = v2 (mod 2), 0 <= x < 2^v2.

Условие чётности v1 - v2 обязательно: b[1,2] = 01 и b[3,7] = 00010 подходят
под формы без него, но палиндромами не являются.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from services.bitseq import SeqId, ruler
from services.errors import PalinrulerError
from services.maskcalc import MaskKind, MaskOp, mask_from_word

logger = logging.getLogger(__name__)


class FactorForm(str, Enum):
    SINGLETON = 'Singleton'
    A_CENTER = 'ACenter'
    B_RIGHT = 'BRight'
    B_LEFT = 'BLeft'


@dataclass(frozen=True)
class PalFactor:
    i: int
    j: int
    form: FactorForm
    o: int
    v1: int
    v2: Optional[int] = None
    x: int = 0

    def __post_init__(self):
        if not 1 <= self.i <= self.j:
            raise PalinrulerError(f"factor [{self.i}, {self.j}] needs 1 <= i <= j")

    @property
    def center(self) -> int:
        return self.o << self.v1

    def to_dict(self) -> dict:
        data = {'i': self.i, 'j': self.j, 'form': self.form.value, 'o': self.o, 'x': self.x}
        if self.v2 is None:
            data['v'] = self.v1
        else:
            data['v1'] = self.v1
            data['v2'] = self.v2
        return data


def _check_interval(i: int, j: int) -> None:
    if not 1 <= i <= j:
        raise PalinrulerError(f"interval [{i}, {j}] needs 1 <= i <= j")


def _peak(i: int, j: int) -> int:
    """Точка максимума a на [i, j]: кратное наибольшей степени двойки в отрезке"""
    h = ((i - 1) ^ j).bit_length() - 1
    return (j >> h) << h


# ==================== ЗАМКНУТЫЕ ФОРМЫ ====================

def is_pal_factor_a(i: int, j: int) -> bool:
    _check_interval(i, j)
    if (i + j) & 1:
        return False
    m = (i + j) >> 1
    return (j - i) >> 1 < (1 << ruler(m))


def classify_pal_factor_b(i: int, j: int) -> Optional[PalFactor]:
    """Форма и параметры палиндрома b[i..j]; None, если это не палиндром"""
    _check_interval(i, j)
    t = _peak(i, j)
    v1 = ruler(t)
    o = t >> v1
    left, right = t - i, j - t

    if left == right:
        form = FactorForm.SINGLETON if i == j else FactorForm.A_CENTER
        return PalFactor(i, j, form, o, v1, None, left)

    d = abs(right - left)
    if d & (d - 1):
        return None
    v2 = d.bit_length() - 1
    x = min(left, right)
    if v2 >= v1 or (v1 - v2) & 1 or x >= (1 << v2):
        return None
    form = FactorForm.B_RIGHT if right > left else FactorForm.B_LEFT
    return PalFactor(i, j, form, o, v1, v2, x)


def is_pal_factor_b(i: int, j: int) -> bool:
    return classify_pal_factor_b(i, j) is not None


def pal_starts_mask_a(j: int, starts: np.ndarray) -> np.ndarray:
    """Векторный вариант is_pal_factor_a(i, j) для массива начал i <= j"""
    starts = np.asarray(starts, dtype=np.int64)
    total = starts + j
    m = total >> 1
    low = m & -m
    half = (j - starts) >> 1
    return ((total & 1) == 0) & (half < low)


def pal_starts_mask_b(j: int, starts: np.ndarray) -> np.ndarray:
    """Векторный вариант is_pal_factor_b(i, j) для массива начал i <= j"""
    starts = np.asarray(starts, dtype=np.int64)
    h = np.frexp(((starts - 1) ^ j).astype(np.float64))[1] - 1
    t = (j >> h) << h
    v1 = np.frexp((t & -t).astype(np.float64))[1] - 1
    left = t - starts
    right = j - t
    d = np.abs(right - left)
    x = np.minimum(left, right)
    v2 = np.frexp(np.maximum(d, 1).astype(np.float64))[1] - 1
    power = (d & (d - 1)) == 0
    b_form = (d > 0) & power & (v2 < v1) & (((v1 - v2) & 1) == 0) & (x < (np.int64(1) << v2))
    return (d == 0) | b_form


# ==================== ПАЛИНДРОМНЫЕ СУФФИКСЫ ====================

def _set_bits(n: int):
    rest = n
    while rest:
        low = rest & -rest
        yield low.bit_length() - 1
        rest ^= low


def pal_suffixes_a(n: int) -> List[int]:
    """
    Начала n' палиндромов a[n'..n].

    Для каждого единичного бита v числа n двоичная запись n'-1 получается
    инверсией разрядов v..0 записи n (маска A(k-v-1) при k = длина записи).
    """
    if n < 1:
        raise PalinrulerError(f"n must be >= 1, got {n}")
    return sorted(1 + (n ^ ((2 << v) - 1)) for v in _set_bits(n))


def pal_suffixes_b(n: int) -> List[PalFactor]:
    """Все палиндромные суффиксы b[1..n], по одному на начало, по возрастанию начала"""
    if n < 1:
        raise PalinrulerError(f"n must be >= 1, got {n}")
    found: Dict[int, PalFactor] = {}

    for v1 in _set_bits(n):
        x = n & ((1 << v1) - 1)
        base = n - x
        o = base >> v1

        start = base - x
        if start not in found:
            form = FactorForm.SINGLETON if start == n else FactorForm.A_CENTER
            found[start] = PalFactor(start, n, form, o, v1, None, x)

        # BRight: n = o*2^v1 + 2^v2 + x', старший бит остатка - v2
        if x:
            v2 = x.bit_length() - 1
            if (v1 - v2) & 1 == 0:
                inner = x - (1 << v2)
                start = base - inner
                found.setdefault(start, PalFactor(start, n, FactorForm.B_RIGHT, o, v1, v2, inner))

        # BLeft: n = o*2^v1 + x, x < 2^v2
        for v2 in range(v1 - 2, x.bit_length() - 1, -2):
            start = base - (1 << v2) - x
            found.setdefault(start, PalFactor(start, n, FactorForm.B_LEFT, o, v1, v2, x))

    return [found[start] for start in sorted(found)]


def suffix_to_mask(n: int, factor: PalFactor) -> MaskOp:
    """Маска m, для которой bin(i-1) = m XOR bin(n) (слова длины bin(n))"""
    if factor.i < 1:
        raise PalinrulerError(f"factor start must be >= 1, got {factor.i}")
    if factor.j != n:
        raise PalinrulerError(f"factor [{factor.i}, {factor.j}] is not a suffix ending at {n}")
    length = n.bit_length()
    op = mask_from_word(length, n ^ (factor.i - 1))
    if op is None:
        raise PalinrulerError(f"bin({factor.i - 1}) XOR bin({n}) is not a mask word")

    expected = MaskKind.B if factor.form in (FactorForm.B_RIGHT, FactorForm.B_LEFT) else MaskKind.A
    if op.kind is not expected or (op.as_int() ^ n) != factor.i - 1:
        raise PalinrulerError(f"factor {factor.to_dict()} maps to {op}, expected a type {expected.value} mask")
    return op


# ==================== ОРАКУЛЫ ====================

def brute_pal_check(word: Sequence[int], i: int, j: int) -> bool:
    """Прямое сравнение фактора с его обращением (индексы с 1)"""
    if not 1 <= i <= j <= len(word):
        raise PalinrulerError(f"interval [{i}, {j}] outside word of length {len(word)}")
    factor = list(word[i - 1:j])
    return factor == factor[::-1]


def brute_pal_intervals(word: Sequence[int]) -> Set[Tuple[int, int]]:
    """Все палиндромные отрезки (i, j) слова, расширением от каждого центра"""
    letters = [int(v) for v in word]
    size = len(letters)
    intervals = set()
    for center in range(2 * size - 1):
        lo, hi = center // 2, (center + 1) // 2
        while lo >= 0 and hi < size and letters[lo] == letters[hi]:
            intervals.add((lo + 1, hi + 1))
            lo -= 1
            hi += 1
    return intervals


def enumerate_pal_factors(seq_id, N: int) -> List[PalFactor]:
    """Все палиндромные факторы [i, j], j <= N, из замкнутых форм; порядок (j, i)"""
    if N < 1:
        raise PalinrulerError(f"N must be >= 1, got {N}")
    seq = seq_id if isinstance(seq_id, SeqId) else SeqId.parse(seq_id)
    factors = []
    for n in range(1, N + 1):
        if seq is SeqId.RULER:
            for start in pal_suffixes_a(n):
                factors.append(_a_factor(start, n))
        elif seq is SeqId.PERIOD_DOUBLING:
            factors.extend(pal_suffixes_b(n))
        else:
            raise PalinrulerError(f"palindromic factors are characterized for ruler and period_doubling only, not {seq.value}")
    return factors


def _a_factor(i: int, j: int) -> PalFactor:
    m = (i + j) >> 1
    v = ruler(m)
    form = FactorForm.SINGLETON if i == j else FactorForm.A_CENTER
    return PalFactor(i, j, form, m >> v, v, None, (j - i) >> 1)
