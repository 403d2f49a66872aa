"""
b-файлы OEIS: строки `индекс значение`, комментарии `#` и пустые строки пропускаются.

Наш индекс n = индекс b-файла + offset. Документированные сдвиги:

    A007814 (ruler)            0   a(1) = 0 - первая запись
    A096268 (period-doubling) +1   a(0) = b[1]
    A005811 (run-count)        0   a(0) = 0 - приписанный спереди ноль, вне области n >= 1
"""

import logging
import os
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

from services.bitseq import SeqId, generate_prefix
from services.errors import BFileParseError, PalinrulerError

logger = logging.getLogger(__name__)

DOCUMENTED_OFFSETS: Dict[str, Tuple[str, int]] = {
    'A007814': (SeqId.RULER.value, 0),
    'A096268': (SeqId.PERIOD_DOUBLING.value, 1),
    'A005811': (SeqId.RUN_COUNT.value, 0),
}


@dataclass(frozen=True)
class BFile:
    entries: Tuple[Tuple[int, int], ...]
    offset: int = 0
    source: str = ''

    def __len__(self) -> int:
        return len(self.entries)

    def in_domain(self) -> List[Tuple[int, int]]:
        """Записи с n >= 1 (область определения последовательностей)"""
        return [(n, v) for n, v in self.entries if n >= 1]


def parse_bfile(text: str, offset: int = 0, source: str = '') -> BFile:
    entries = []
    previous: Optional[int] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise BFileParseError(f"expected 'index value', got {raw!r}", number)
        try:
            index, value = int(parts[0]), int(parts[1])
        except ValueError:
            raise BFileParseError(f"non-integer field in {raw!r}", number) from None
        if value < 0:
            raise BFileParseError(f"negative value {value}", number)
        n = index + offset
        if previous is not None and n <= previous:
            raise BFileParseError(f"index {index} is not strictly increasing", number)
        previous = n
        entries.append((n, value))
    return BFile(tuple(entries), offset, source)


def load_bfile(path: str, offset: int = 0) -> BFile:
    if not os.path.isfile(path):
        raise PalinrulerError(f"b-file not found: {path}")
    with open(path, encoding='utf-8') as handle:
        bfile = parse_bfile(handle.read(), offset, source=path)
    logger.debug(f"Loaded {len(bfile)} entries from {path} (offset {offset})")
    return bfile


def compare(bfile: BFile, seq: Union[str, SeqId, Callable[[int], int]]) -> List[dict]:
    """Расхождения на пересечении областей: [{'n', 'bfile', 'computed'}]"""
    entries = bfile.in_domain()
    if not entries:
        return []

    if callable(seq) and not isinstance(seq, (str, SeqId)):
        computed = {n: int(seq(n)) for n, _ in entries}
        lookup = computed.__getitem__
    else:
        top = entries[-1][0]
        prefix = generate_prefix(seq, top)
        lookup = lambda n: int(prefix[n - 1])

    return [
        {'n': n, 'bfile': value, 'computed': lookup(n)}
        for n, value in entries
        if lookup(n) != value
    ]


class BFileService:
    """Сверка последовательностей с локальными b-файлами"""

    @staticmethod
    def check(path: str, seq: str, offset: int) -> Tuple[bool, str, dict]:
        try:
            bfile = load_bfile(path, offset)
        except BFileParseError as e:
            logger.error(f"b-file {path}: {e}")
            return False, str(e), {'path': path, 'line': e.line, 'status': 'error'}

        mismatches = compare(bfile, seq)
        overlap = len(bfile.in_domain())
        payload = {
            'path': path,
            'sequence': SeqId.parse(seq).value,
            'offset': offset,
            'entries': len(bfile),
            'overlap': overlap,
            'mismatches': mismatches[:100],
            'mismatch_count': len(mismatches),
        }
        if mismatches:
            logger.warning(f"b-file {path}: {len(mismatches)} mismatches over {overlap} terms")
            return False, f"{len(mismatches)} mismatches over {overlap} terms", payload
        logger.info(f"b-file {path}: {overlap} terms agree")
        return True, f"{overlap} terms agree", payload

    @staticmethod
    def bundled(directory: str) -> List[Tuple[str, str, int]]:
        """(путь, последовательность, сдвиг) для файлов bNNNNNN.txt из каталога"""
        found = []
        for a_number, (seq, offset) in sorted(DOCUMENTED_OFFSETS.items()):
            path = os.path.join(directory, f"b{a_number[1:]}.txt")
            if os.path.isfile(path):
                found.append((path, seq, offset))
        return found
