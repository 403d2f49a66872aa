"""
Таблицы палиндромной длины pl[n] = |x[1..n]|_pal.

    pl[0] = 0,  pl[n] = 1 + min { pl[i] : x[i+1..n] - палиндром }

Переборные оракулы (суффиксный проход и палиндромное дерево) работают для
любого слова; быстрые пути - замкнутая форма для a (pl_a = c) и проход по
палиндромным суффиксам b из palfactor.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import default_max_len, oracle_bound
from services.bitseq import SeqId, generate_prefix, run_count, to_binary
from services.errors import OversizeError, PalinrulerError
from services.maskcalc import OpSequence, min_ops_mixed

logger = logging.getLogger(__name__)

# Значения pl не превосходят длины двоичной записи n
_TABLE_DTYPE = np.uint16


@dataclass(frozen=True)
class PalLengthTable:
    seq_id: str
    N: int
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.N + 1:
            raise PalinrulerError(f"table for N={self.N} needs {self.N + 1} slots, got {len(self.values)}")
        if self.values[0] != 0:
            raise PalinrulerError("slot 0 (empty prefix) must hold 0")
        self.values.flags.writeable = False

    def __getitem__(self, n: int) -> int:
        return int(self.values[n])

    def prefix_values(self) -> np.ndarray:
        """Значения для n = 1..N"""
        return self.values[1:]

    def to_rows(self) -> List[Tuple[int, int]]:
        return [(n, int(v)) for n, v in enumerate(self.values[1:], start=1)]


@dataclass
class BoundsReport:
    N: int
    max_value: int
    argmax: List[int]
    violations: List[dict]
    histogram: Dict[int, int]
    ceil_violations: List[int] = field(default_factory=list)
    growth: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            'N': self.N,
            'max_value': self.max_value,
            'argmax': self.argmax,
            'violations': self.violations,
            'histogram': {str(k): v for k, v in sorted(self.histogram.items())},
            'ceil_lower_bound_violations': self.ceil_violations,
            'growth': self.growth,
        }


def _make_table(seq_id: str, values: np.ndarray) -> PalLengthTable:
    if values.max(initial=0) > np.iinfo(_TABLE_DTYPE).max:
        raise OversizeError(f"palindromic length {int(values.max())} overflows 16-bit storage")
    stored = np.asarray(values, dtype=_TABLE_DTYPE)
    return PalLengthTable(seq_id, len(stored) - 1, stored)


def _check_oracle_size(word: Sequence[int], bound: Optional[int]) -> int:
    limit = oracle_bound() if bound is None else bound
    if len(word) > limit:
        raise OversizeError(f"word length {len(word)} exceeds oracle bound {limit}; raise PALINRULER_ORACLE_BOUND")
    if len(word) == 0:
        raise PalinrulerError("oracle needs a nonempty word")
    return limit


# ==================== ПЕРЕБОРНЫЕ ОРАКУЛЫ ====================

def pal_length_bruteforce(word: Sequence[int], seq_id: str = 'word', bound: Optional[int] = None) -> PalLengthTable:
    """
    DP по палиндромным суффиксам с прямой проверкой букв.

    Начала палиндромных суффиксов x[..n] получаются из начал для n-1:
    i-1 для каждого начала i, если x[i-1] = x[n], плюс n-1 и n.
    """
    _check_oracle_size(word, bound)
    letters = [int(v) for v in word]
    size = len(letters)
    pl = [0] * (size + 1)
    starts: List[int] = []

    for n in range(1, size + 1):
        letter = letters[n - 1]
        grown = [i - 1 for i in starts if i > 1 and letters[i - 2] == letter]
        if n > 1 and letters[n - 2] == letter:
            grown.append(n - 1)
        grown.append(n)
        starts = grown
        pl[n] = 1 + min(pl[i - 1] for i in starts)

    return _make_table(seq_id, np.array(pl))


class _Eertree:
    """Палиндромное дерево: узлы - различные палиндромы, ссылки - на наибольший собственный суффикс"""

    def __init__(self, letters: List[int]):
        self.letters = letters
        # узел 0 - корень длины -1, узел 1 - пустой палиндром
        self.length = [-1, 0]
        self.link = [0, 0]
        self.edges: List[Dict[int, int]] = [{}, {}]
        self.last = 1

    def _extendable(self, node: int, pos: int) -> bool:
        size = self.length[node]
        return pos - size - 1 >= 0 and self.letters[pos - size - 1] == self.letters[pos]

    def add(self, pos: int) -> int:
        """Добавляет букву pos (с 0), возвращает узел наибольшего палиндромного суффикса"""
        letter = self.letters[pos]
        node = self.last
        while not self._extendable(node, pos):
            node = self.link[node]
        if letter in self.edges[node]:
            self.last = self.edges[node][letter]
            return self.last

        new = len(self.length)
        self.length.append(self.length[node] + 2)
        self.edges.append({})
        if self.length[new] == 1:
            self.link.append(1)
        else:
            cursor = self.link[node]
            while not self._extendable(cursor, pos):
                cursor = self.link[cursor]
            self.link.append(self.edges[cursor][letter])
        self.edges[node][letter] = new
        self.last = new
        return new


def pal_length_eertree(word: Sequence[int], seq_id: str = 'word', bound: Optional[int] = None) -> PalLengthTable:
    """Тот же DP, палиндромные суффиксы - цепочка суффиксных ссылок палиндромного дерева"""
    _check_oracle_size(word, bound)
    letters = [int(v) for v in word]
    tree = _Eertree(letters)
    pl = [0] * (len(letters) + 1)

    for pos in range(len(letters)):
        n = pos + 1
        node = tree.add(pos)
        best = n
        while tree.length[node] > 0:
            best = min(best, pl[n - tree.length[node]])
            node = tree.link[node]
        pl[n] = best + 1

    return _make_table(seq_id, np.array(pl))


# ==================== БЫСТРЫЕ ПУТИ ====================

def pal_length_a(N: int) -> PalLengthTable:
    """pl_a[n] = c[n]"""
    if N < 1:
        raise PalinrulerError(f"N must be >= 1, got {N}")
    values = np.zeros(N + 1, dtype=np.int64)
    values[1:] = generate_prefix(SeqId.RUN_COUNT, N)
    return _make_table('pl-a', values)


def pal_length_b(N: int) -> PalLengthTable:
    """
    pl_b[n] = 1 + min pl_b[n'-1] по палиндромным суффиксам b[n'..n].

    Суффиксы перечисляются так же, как в palfactor.pal_suffixes_b, но без
    построения объектов: для каждого единичного бита v1 числа n
    кандидаты ACenter, BRight и BLeft дают индексы n'-1.
    """
    if N < 1:
        raise PalinrulerError(f"N must be >= 1, got {N}")
    pl = [0] * (N + 1)

    for n in range(1, N + 1):
        best = pl[n - 1]
        rest = n
        while rest:
            low = rest & -rest
            rest ^= low
            v1 = low.bit_length() - 1
            x = n & (low - 1)
            base = n - x

            prev = pl[base - x - 1]
            if prev < best:
                best = prev

            width = x.bit_length()
            if x and (v1 - width + 1) & 1 == 0:
                prev = pl[n - (x << 1) + (1 << (width - 1)) - 1]
                if prev < best:
                    best = prev

            for v2 in range(v1 - 2, width - 1, -2):
                prev = pl[base - (1 << v2) - x - 1]
                if prev < best:
                    best = prev

        pl[n] = best + 1

    logger.debug(f"pl_b table built up to N={N}")
    return _make_table('pl-b', np.array(pl))


def table_for(seq_name: str, N: int) -> PalLengthTable:
    """Таблица по имени: pl-a, pl-b или исходная последовательность (ruler, ...)"""
    key = seq_name.strip().lower().replace('_', '-')
    if key == 'pl-a':
        return pal_length_a(N)
    if key == 'pl-b':
        return pal_length_b(N)
    seq = SeqId.parse(seq_name)
    values = np.zeros(N + 1, dtype=np.int64)
    values[1:] = generate_prefix(seq, N)
    return PalLengthTable(seq.value, N, values)


# ==================== ПРОВЕРКИ ГРАНИЦ ====================

def growth_curve(table: PalLengthTable) -> List[dict]:
    """Точки n, в которых max_{m<=n} pl[m] растёт, вместе с log2 n"""
    records = []
    running = 0
    for n in range(1, table.N + 1):
        value = table[n]
        if value > running:
            running = value
            records.append({'n': n, 'max': running, 'log2_n': round(math.log2(n), 6)})
    return records


def check_bounds_b(N: int, table: Optional[PalLengthTable] = None) -> BoundsReport:
    """floor(c[n]/3) <= pl_b[n] <= c[n] для всех n <= N"""
    table = table if table is not None else pal_length_b(N)
    if table.N < N:
        raise PalinrulerError(f"table covers {table.N} terms, {N} requested")
    runs = generate_prefix(SeqId.RUN_COUNT, N)
    values = table.values[1:N + 1].astype(np.int64)

    lower = runs // 3
    bad = np.nonzero((values < lower) | (values > runs))[0]
    violations = [
        {'n': int(k + 1), 'pl_b': int(values[k]), 'runs': int(runs[k])}
        for k in bad
    ]
    ceil_bad = np.nonzero(values < -(-runs // 3))[0]

    max_value = int(values.max())
    argmax = [int(k + 1) for k in np.nonzero(values == max_value)[0]]
    histogram = {int(v): int(c) for v, c in Counter(values.tolist()).items()}

    if violations:
        logger.warning(f"Bounds check up to {N}: {len(violations)} violations")
    return BoundsReport(
        N=N,
        max_value=max_value,
        argmax=argmax,
        violations=violations,
        histogram=histogram,
        ceil_violations=[int(k + 1) for k in ceil_bad],
        growth=growth_curve(PalLengthTable(table.seq_id, N, table.values[:N + 1].copy())),
    )


def _replays_to_zero(value: int, ops: OpSequence) -> bool:
    return (value ^ ops.combined_mask()) == 0


def compare_mixed_min(N: int, max_len: Optional[int] = None, table: Optional[PalLengthTable] = None,
                      progress: Optional[Callable[[int, int], None]] = None) -> dict:
    """
    pl_b[n] против минимума масок A/B для bin(n).

    Равенство не предполагается: отчёт описательный, несовпадения перечисляются.
    """
    max_len = default_max_len() if max_len is None else max_len
    if N >= (1 << max_len):
        raise OversizeError(f"N={N} needs words longer than max_len={max_len}")
    table = table if table is not None else pal_length_b(N)

    rows = []
    mismatches = []
    replay_failures = []
    for n in range(1, N + 1):
        count, ops = min_ops_mixed(to_binary(n), max_len)
        if not _replays_to_zero(n, ops):
            replay_failures.append(n)
        pl = table[n]
        rows.append((n, pl, count))
        if pl != count:
            mismatches.append({'n': n, 'pl_b': pl, 'mixed_min': count, 'masks': [str(op) for op in ops]})
        if progress and n % 1024 == 0:
            progress(n, N)

    below = sum(1 for _, pl, count in rows if count < pl)
    above = sum(1 for _, pl, count in rows if count > pl)
    return {
        'N': N,
        'max_len': max_len,
        'equal': N - len(mismatches),
        'mixed_below_pl': below,
        'mixed_above_pl': above,
        'mismatches': mismatches,
        'replay_failures': replay_failures,
        'rows': rows,
    }


def check_prop3(N: int) -> dict:
    """c[n] <= floor(log2 n) + 1, свидетели равенства и нарушения буквальной границы floor(log2 n)"""
    if N < 1:
        raise PalinrulerError(f"N must be >= 1, got {N}")
    runs = generate_prefix(SeqId.RUN_COUNT, N)
    idx = np.arange(1, N + 1, dtype=np.int64)
    bits = np.frexp(idx.astype(np.float64))[1]

    corrected = np.nonzero(runs > bits)[0]
    literal = np.nonzero(runs > bits - 1)[0]
    witnesses = [int(k + 1) for k in np.nonzero(runs == bits)[0]]

    # n = sum_{i=0..k} 4^i
    claimed = []
    n, k = 1, 0
    while n <= N:
        claimed.append({'k': k, 'n': n, 'runs': run_count(n), 'claimed': 2 * k})
        k += 1
        n += 4 ** k

    return {
        'N': N,
        'corrected_violations': [int(k + 1) for k in corrected],
        'literal_violations_count': int(len(literal)),
        'literal_violations_first': [int(k + 1) for k in literal[:16]],
        'literal_fails_at_1': bool(len(literal) and literal[0] == 0),
        'witnesses': witnesses,
        'alternating_sums': claimed,
    }


# ==================== ДАННЫЕ О 2-ЯДРЕ ====================

def kernel_rank_profile(table: PalLengthTable, depth: int, window: int) -> List[dict]:
    """
    Ранги матриц 2-ядра: строки n -> pl[2^e n + r] (e <= глубины, 0 <= r < 2^e),
    обрезанные до window членов. Ограниченный рост ранга согласуется с
    2-регулярностью; это данные, а не доказательство.
    """
    if depth < 0 or window < 1:
        raise PalinrulerError("depth must be >= 0 and window >= 1")
    need = (1 << depth) * window + (1 << depth)
    if table.N < need:
        raise PalinrulerError(f"table covers {table.N} terms, kernel of depth {depth} needs {need}")

    profile = []
    rows = []
    positions = np.arange(1, window + 1, dtype=np.int64)
    for e in range(depth + 1):
        for r in range(1 << e):
            rows.append(table.values[(positions << e) + r].astype(np.float64))
        rank = int(np.linalg.matrix_rank(np.vstack(rows)))
        profile.append({'depth': e, 'subsequences': len(rows), 'rank': rank})
    return profile

