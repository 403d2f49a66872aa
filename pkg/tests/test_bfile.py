import os

import pytest

from services.bfile import DOCUMENTED_OFFSETS, BFileService, compare, load_bfile, parse_bfile
from services.bitseq import run_count
from services.errors import BFileParseError, PalinrulerError

SAMPLE = """# A007814 sample

1 0
2 1
3 0
4 2
"""


def test_parse_skips_comments_and_blanks():
    bfile = parse_bfile(SAMPLE, source='sample')
    assert len(bfile) == 4
    assert bfile.entries[-1] == (4, 2)
    assert compare(bfile, 'ruler') == []


def test_offset_shifts_indices():
    bfile = parse_bfile("0 0\n1 1\n2 0\n", offset=1)
    assert bfile.entries == ((1, 0), (2, 1), (3, 0))
    assert compare(bfile, 'period-doubling') == []


def test_zero_index_is_outside_domain():
    bfile = parse_bfile("0 0\n1 1\n2 2\n")
    assert bfile.in_domain() == [(1, 1), (2, 2)]
    assert compare(bfile, run_count) == []


def test_compare_reports_mismatches():
    bfile = parse_bfile("1 0\n2 1\n3 1\n")
    assert compare(bfile, 'ruler') == [{'n': 3, 'bfile': 1, 'computed': 0}]


@pytest.mark.parametrize('text, line', [
    ("1 0\n2\n", 2),
    ("1 0\n2 x\n", 2),
    ("# header\n1 -1\n", 2),
    ("1 0\n3 0\n2 1\n", 3),
    ("1 0\n1 0\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(BFileParseError) as excinfo:
        parse_bfile(text)
    assert excinfo.value.line == line
    assert f"line {line}" in str(excinfo.value)


def test_bundled_files_agree(bfile_dir):
    bundled = BFileService.bundled(bfile_dir)
    assert [os.path.basename(path) for path, _, _ in bundled] == ['b005811.txt', 'b007814.txt', 'b096268.txt']
    for path, seq, offset in bundled:
        ok, message, payload = BFileService.check(path, seq, offset)
        assert ok, message
        assert payload['mismatch_count'] == 0
        assert payload['overlap'] == 10000


# Первые члены из раздела DATA записей OEIS, выписанные вручную
PUBLISHED_DATA = {
    'b007814.txt': (1, [0, 1, 0, 2, 0, 1, 0, 3, 0, 1, 0, 2, 0, 1, 0, 4, 0, 1, 0, 2, 0, 1, 0, 3, 0, 1, 0, 2, 0, 1, 0, 5]),
    'b096268.txt': (0, [0, 1, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0, 1]),
    'b005811.txt': (0, [0, 1, 2, 1, 2, 3, 2, 1, 2, 3, 4, 3, 2, 3, 2, 1, 2, 3, 4, 3, 4, 5, 4, 3, 2, 3, 4, 3, 2, 3, 2, 1]),
}


@pytest.mark.parametrize('name', sorted(PUBLISHED_DATA))
def test_bundled_files_start_with_published_terms(bfile_dir, name):
    first_index, terms = PUBLISHED_DATA[name]
    bfile = load_bfile(os.path.join(bfile_dir, name))
    expected = [(first_index + k, value) for k, value in enumerate(terms)]
    assert list(bfile.entries[:len(terms)]) == expected


def test_run_count_file_keeps_leading_zero_entry(bfile_dir):
    bfile = load_bfile(os.path.join(bfile_dir, 'b005811.txt'), DOCUMENTED_OFFSETS['A005811'][1])
    assert len(bfile) == 10001
    assert bfile.entries[0] == (0, 0)
    assert dict(bfile.entries)[1000] == 4


def test_wrong_offset_is_detected(bfile_dir):
    path = os.path.join(bfile_dir, 'b096268.txt')
    ok, message, payload = BFileService.check(path, 'period_doubling', 0)
    assert not ok
    assert payload['mismatch_count'] > 0
    assert len(payload['mismatches']) <= 100


def test_truncated_file_checks_overlap_only(tmp_path):
    path = tmp_path / 'b007814.txt'
    path.write_text("1 0\n2 1\n3 0\n")
    ok, _, payload = BFileService.check(str(path), 'a', 0)
    assert ok
    assert payload['overlap'] == 3
    assert payload['sequence'] == 'ruler'


def test_parse_error_payload(tmp_path):
    path = tmp_path / 'broken.txt'
    path.write_text("1 0\n2 1\nthree 0\n")
    ok, message, payload = BFileService.check(str(path), 'ruler', 0)
    assert not ok
    assert payload == {'path': str(path), 'line': 3, 'status': 'error'}
    assert 'line 3' in message


def test_missing_file(tmp_path):
    with pytest.raises(PalinrulerError):
        load_bfile(str(tmp_path / 'absent.txt'))
    assert BFileService.bundled(str(tmp_path)) == []
