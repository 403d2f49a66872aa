"""
Целочисленные последовательности и двоичные слова.

    a[n] - ruler sequence (2-адическая оценка n), A007814
    b[n] = a[n] mod 2 - period-doubling sequence, A096268
    c[n] - число серий в двоичной записи n, A005811

Индексация везде с 1: массив generate_prefix(seq, N) хранит seq(i) в ячейке i-1.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Tuple

import numpy as np

from services.errors import PalinrulerError

logger = logging.getLogger(__name__)


class SeqId(str, Enum):
    RULER = 'ruler'
    PERIOD_DOUBLING = 'period_doubling'
    RUN_COUNT = 'run_count'

    @classmethod
    def parse(cls, name: str) -> 'SeqId':
        """Имя последовательности (допускаются дефисы: period-doubling)"""
        key = name.strip().lower().replace('-', '_')
        aliases = {'a': cls.RULER, 'b': cls.PERIOD_DOUBLING, 'c': cls.RUN_COUNT}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise PalinrulerError(f"unknown sequence {name!r}") from None


@dataclass(frozen=True)
class BinaryWord:
    """Двоичное слово фиксированной длины, старший бит первым"""
    bits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'bits', tuple(int(b) for b in self.bits))
        for position, bit in enumerate(self.bits, start=1):
            if bit not in (0, 1):
                raise PalinrulerError(f"digit {bit!r} at position {position} is not binary")

    @classmethod
    def from_str(cls, text: str) -> 'BinaryWord':
        return cls(tuple(int(ch) for ch in text.strip()))

    @classmethod
    def of_value(cls, value: int, length: int) -> 'BinaryWord':
        """Запись value ровно в length разрядов (с ведущими нулями)"""
        if value < 0 or value >= (1 << length):
            raise PalinrulerError(f"value {value} does not fit in {length} bits")
        return cls(tuple((value >> (length - k)) & 1 for k in range(1, length + 1)))

    @classmethod
    def zeros(cls, length: int) -> 'BinaryWord':
        return cls((0,) * length)

    @property
    def length(self) -> int:
        return len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, index):
        return self.bits[index]

    def __str__(self) -> str:
        return ''.join(str(b) for b in self.bits)

    def to_int(self) -> int:
        value = 0
        for bit in self.bits:
            value = (value << 1) | bit
        return value

    def is_zero(self) -> bool:
        return not any(self.bits)


@dataclass(frozen=True)
class RunEncoding:
    """Кодирование сериями: первый бит и длины серий (i_1, i_2, ..., i_r)"""
    first_bit: int
    run_lengths: Tuple[int, ...]

    @property
    def runs(self) -> int:
        return len(self.run_lengths)

    def boundaries(self) -> Tuple[int, ...]:
        """Частичные суммы i_1, i_1+i_2, ... без последней (позиции стыков серий)"""
        return tuple(itertools.accumulate(self.run_lengths))[:-1]


def _require_positive(n: int, what: str) -> None:
    if n < 1:
        raise PalinrulerError(f"{what} is defined for n >= 1, got {n}")


def ruler(n: int) -> int:
    """a[n]: наибольшее e, при котором 2^e делит n"""
    _require_positive(n, 'ruler')
    return (n & -n).bit_length() - 1


def period_doubling(n: int) -> int:
    """b[n] = a[n] mod 2"""
    _require_positive(n, 'period_doubling')
    return ruler(n) & 1


def run_count(n: int) -> int:
    """c[n]: число максимальных блоков одинаковых цифр в двоичной записи n"""
    _require_positive(n, 'run_count')
    # n ^ (n >> 1) отмечает старший бит и каждый стык серий
    return bin(n ^ (n >> 1)).count('1')


def popcount(n: int) -> int:
    return bin(n).count('1')


def to_binary(n: int) -> BinaryWord:
    _require_positive(n, 'to_binary')
    return BinaryWord.of_value(n, n.bit_length())


def from_binary(word: BinaryWord) -> int:
    return word.to_int()


def run_encode(word: BinaryWord) -> RunEncoding:
    if word.length == 0:
        raise PalinrulerError("run_encode needs a nonempty word")
    lengths = tuple(len(list(group)) for _, group in itertools.groupby(word.bits))
    return RunEncoding(first_bit=word.bits[0], run_lengths=lengths)


def word_runs(word: BinaryWord) -> int:
    """Число серий слова; для нулевого слова (и пустого) считается 0"""
    if word.is_zero():
        return 0
    return run_encode(word).runs


# ==================== ПРЕФИКСЫ ПОСЛЕДОВАТЕЛЬНОСТЕЙ ====================

def _index_range(N: int) -> np.ndarray:
    if N < 1:
        raise PalinrulerError(f"prefix bound must be >= 1, got {N}")
    try:
        return np.arange(1, N + 1, dtype=np.int64)
    except MemoryError:
        raise PalinrulerError(f"cannot allocate a prefix of {N} terms") from None


def _ruler_array(idx: np.ndarray) -> np.ndarray:
    low = idx & -idx
    # frexp даёт показатель точно: low = 0.5 * 2^e
    return (np.frexp(low.astype(np.float64))[1] - 1).astype(np.int64)


def _popcount_array(values: np.ndarray) -> np.ndarray:
    counts = np.zeros(values.shape, dtype=np.int64)
    rest = values.copy()
    while rest.any():
        counts += rest & 1
        rest >>= 1
    return counts


def generate_prefix(seq_id, N: int) -> np.ndarray:
    """Массив seq(1..N) (только для чтения); seq(i) лежит в ячейке i-1"""
    seq = seq_id if isinstance(seq_id, SeqId) else SeqId.parse(seq_id)
    idx = _index_range(N)

    if seq is SeqId.RULER:
        values = _ruler_array(idx)
    elif seq is SeqId.PERIOD_DOUBLING:
        values = _ruler_array(idx) & 1
    else:
        values = _popcount_array(idx ^ (idx >> 1))

    values.flags.writeable = False
    return values


def period_doubling_morphic(N: int) -> np.ndarray:
    """Префикс неподвижной точки подстановки 0 -> 01, 1 -> 00 (начиная с 0)"""
    if N < 1:
        raise PalinrulerError(f"prefix bound must be >= 1, got {N}")
    word = np.zeros(1, dtype=np.int64)
    while len(word) < N:
        image = np.empty(2 * len(word), dtype=np.int64)
        image[0::2] = 0
        image[1::2] = 1 - word
        word = image
    result = word[:N].copy()
    result.flags.writeable = False
    return result
