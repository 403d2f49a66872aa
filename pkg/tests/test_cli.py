import io
import json
import os

import pytest

import cli


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def report_of(text):
    data = json.loads(text)
    data.pop('timing')
    return data


# ==================== gen / factors ====================

def test_gen_ruler_csv():
    code, text = run('gen', 'ruler', '8')
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == 'n,value'
    assert lines[-1] == '8,3'
    assert len(lines) == 9


def test_gen_pl_b():
    code, text = run('gen', 'pl-b', '17')
    assert code == 0
    assert '17,2' in text.splitlines()


def test_gen_single_term():
    assert run('gen', 'run-count', '1') == (0, 'n,value\n1,1\n')


def test_gen_json():
    code, text = run('gen', 'period_doubling', '4', '--format', 'json')
    assert code == 0
    document = json.loads(text)
    assert document['sequence'] == 'period-doubling'
    assert [row['value'] for row in document['rows']] == [0, 1, 0, 0]


@pytest.mark.parametrize('argv', [
    ('gen', 'fibonacci', '5'),
    ('gen', 'ruler', '0'),
    ('gen', 'ruler', 'x'),
    ('factors', 'c', '5'),
    ('verify', 'theorem9'),
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as excinfo:
        run(*argv)
    assert excinfo.value.code == 2


def test_factors_csv():
    code, text = run('factors', 'b', '17')
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == 'i,j,form,o,v1,v2,x'
    assert '16,17,BRight,1,4,0,0' in lines
    assert '5,5,Singleton,5,0,,0' in lines


def test_factors_json():
    code, text = run('factors', 'ruler', '6', '--format', 'json')
    assert code == 0
    document = json.loads(text)
    assert [(f['i'], f['j']) for f in document['factors'] if f['j'] == 6] == [(2, 6), (6, 6)]


# ==================== verify ====================

@pytest.mark.parametrize('suite, bound', [('lemma1', '12'), ('prop1', '8'), ('theorem1', '256')])
def test_verify_passes(suite, bound):
    code, text = run('verify', suite, bound, '--jobs', '1')
    assert code == 0
    data = json.loads(text)
    assert data['status'] == 'pass'
    assert data['command'] == ['verify', suite, bound]
    assert data['result']['violation_count'] == 0


def test_verify_is_deterministic_apart_from_timing():
    _, first = run('verify', 'theorem2-bounds', '300', '--jobs', '1')
    _, second = run('verify', 'theorem2-bounds', '300', '--jobs', '1')
    assert report_of(first) == report_of(second)


def test_verify_precondition_exit_2(capsys):
    code, text = run('verify', 'prop1', '8', '--max-len', '4')
    assert code == 2
    assert json.loads(text)['status'] == 'error'
    assert 'max_len' in capsys.readouterr().err


def test_verify_output_file(tmp_path):
    path = tmp_path / 'reports' / 'lemma1.json'
    code, text = run('verify', 'lemma1', '5', '--output', str(path))
    assert code == 0
    assert path.read_text(encoding='utf-8') == text


def test_verify_save(flask_app):
    from services.report_service import ReportService

    code, _ = run('verify', 'cor1', '6', '--save')
    assert code == 0
    with flask_app.app_context():
        saved = ReportService.list_reports(command='verify')
        assert any(r.subject == 'cor1' and r.bound == 6 and r.status == 'pass' for r in saved)


# ==================== oeis-check ====================

@pytest.mark.parametrize('name', ['b007814.txt', 'b096268.txt', 'b005811.txt'])
def test_oeis_check_bundled(bfile_dir, name):
    code, text = run('oeis-check', os.path.join(bfile_dir, name))
    assert code == 0
    assert json.loads(text)['result']['mismatch_count'] == 0


def test_oeis_check_wrong_offset(bfile_dir):
    code, text = run('oeis-check', os.path.join(bfile_dir, 'b096268.txt'), '--offset', '0')
    assert code == 1
    assert json.loads(text)['status'] == 'fail'


def test_oeis_check_broken_file(tmp_path, capsys):
    path = tmp_path / 'b007814.txt'
    path.write_text("1 0\n2 1\n3 zero\n")
    code, text = run('oeis-check', str(path))
    assert code == 2
    assert json.loads(text)['result']['line'] == 3
    assert 'line 3' in capsys.readouterr().err


def test_oeis_check_needs_sequence(tmp_path):
    path = tmp_path / 'values.txt'
    path.write_text("1 0\n")
    assert run('oeis-check', str(path))[0] == 2
    assert run('oeis-check', str(path), 'ruler')[0] == 0


# ==================== levelset ====================

def test_levelset_members():
    code, text = run('levelset', 'run-count', '1', '15')
    assert code == 0
    assert json.loads(text)['result']['members'] == [1, 3, 7, 15]


def test_levelset_examples():
    code, text = run('levelset', 'pl-b', '2', '17')
    assert code == 0
    assert 17 in json.loads(text)['result']['members']
    code, text = run('levelset', 'run-count', '4', '1001')
    assert code == 0
    assert 1000 in json.loads(text)['result']['members']


def test_levelset_learn_and_verify_round_trip(tmp_path):
    path = tmp_path / 'c2.dfa'
    code, text = run('levelset', 'run-count', '2', '1024', '--learn', '8', '--write-dfa', str(path))
    assert code == 0
    learned = json.loads(text)['result']['learned']
    assert learned['ok'] and learned['conjecture']
    assert learned['states'] == 4
    assert learned['training_mismatches'] == 0
    assert path.read_text(encoding='utf-8') == learned['dfa']

    code, text = run('levelset', 'pl-a', '2', '4096', '--dfa', str(path))
    assert code == 0
    assert json.loads(text)['result']['dfa_check']['mismatch_count'] == 0


def test_levelset_wrong_automaton_fails(tmp_path):
    path = tmp_path / 'c2.dfa'
    run('levelset', 'run-count', '2', '1024', '--learn', '8', '--write-dfa', str(path))
    code, text = run('levelset', 'run-count', '3', '256', '--dfa', str(path))
    assert code == 1
    assert json.loads(text)['result']['dfa_check']['mismatch_count'] > 0


def test_levelset_learn_budget_exhausted():
    code, text = run('levelset', 'run-count', '3', '1024', '--learn', '2')
    assert code == 1
    learned = json.loads(text)['result']['learned']
    assert not learned['ok']
    assert 'dfa' not in learned


def test_levelset_bad_automaton_file(tmp_path):
    path = tmp_path / 'broken.dfa'
    path.write_text("states 2 initial 0\n0 0 1\n")
    assert run('levelset', 'run-count', '1', '16', '--dfa', str(path))[0] == 2
    assert run('levelset', 'run-count', '1', '16', '--dfa', str(tmp_path / 'absent.dfa'))[0] == 2


# ==================== masks ====================

def test_masks():
    code, text = run('masks', '30')
    assert code == 0
    result = json.loads(text)['result']
    assert result['word'] == '11110'
    assert result['runs'] == {'first_bit': 1, 'lengths': [4, 1]}
    assert result['type_a']['count'] == 2
    assert result['mixed'] == {'count': 1, 'masks': ['B(L=5,t=1,s=4)']}
    assert 'pl_b' in result


def test_masks_oversize_mixed_search():
    code, text = run('masks', '1000', '--max-len', '6')
    assert code == 0
    result = json.loads(text)['result']
    assert 'error' in result['mixed']
    assert result['type_a']['count'] == 4
