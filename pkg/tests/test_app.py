import time

import pytest


def test_health(client):
    response = client.get('/health')
    assert response.status_code == 200
    assert response.get_json()['status'] == 'ok'


def test_sequence_values(client):
    response = client.get('/api/sequences/ruler?n=8')
    assert response.status_code == 200
    data = response.get_json()
    assert data['sequence'] == 'ruler'
    assert data['rows'][-1] == {'n': 8, 'value': 3}

    data = client.get('/api/sequences/pl_b?n=17').get_json()
    assert data['rows'][16] == {'n': 17, 'value': 2}


@pytest.mark.parametrize('url', [
    '/api/sequences/ruler',
    '/api/sequences/ruler?n=0',
    '/api/sequences/ruler?n=abc',
    '/api/sequences/fibonacci?n=5',
    '/api/sequences/ruler?n=100000000',
    '/api/levelset/run-count?n=15',
])
def test_bad_parameters(client, url):
    response = client.get(url)
    assert response.status_code == 400
    assert 'error' in response.get_json()


def test_levelset(client):
    data = client.get('/api/levelset/run-count?epsilon=1&n=15').get_json()
    assert data['members'] == [1, 3, 7, 15]


def test_suites(client):
    names = [suite['name'] for suite in client.get('/api/suites').get_json()]
    assert 'theorem1' in names and 'prop6' in names


def test_unknown_routes(client):
    assert client.post('/api/verify/theorem9').status_code == 404
    assert client.get('/api/tasks/nothing').status_code == 404
    assert client.get('/api/reports/999999').status_code == 404
    assert client.get('/api/nowhere').status_code == 404


def _wait_for_task(client, task_id, timeout=60.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        task = client.get(f'/api/tasks/{task_id}').get_json()
        if task['status'] in ('completed', 'error'):
            return task
        time.sleep(0.05)
    pytest.fail(f"task {task_id} did not finish in {timeout}s")


def test_verify_task_flow(client):
    response = client.post('/api/verify/lemma1', json={'bound': 5})
    assert response.status_code == 202
    task_id = response.get_json()['task_id']

    task = _wait_for_task(client, task_id)
    assert task['status'] == 'completed'
    assert task['result'] == 'pass'
    assert task['report_id'] is not None

    report = client.get(f"/api/reports/{task['report_id']}").get_json()
    assert report['subject'] == 'lemma1'
    assert report['status'] == 'pass'
    assert report['payload']['result']['violation_count'] == 0

    listed = client.get('/api/reports?command=verify').get_json()
    assert task['report_id'] in [r['id'] for r in listed]
    assert 'payload' not in listed[0]


def test_automata_list(client, flask_app):
    from services.levelang import dfa_for_run_count, serialize
    from services.report_service import ReportService

    with flask_app.app_context():
        saved, _, record = ReportService.save_automaton('run-count', 2, 1024, serialize(dfa_for_run_count(2)), 4)
        assert saved
    automata = client.get('/api/automata').get_json()
    assert any(a['sequence'] == 'run-count' and a['conjecture'] for a in automata)


def test_wsgi_entry_point(flask_app):
    from wsgi import application
    assert application is flask_app


def test_scheduled_sweep(monkeypatch, flask_app):
    import scheduled_sweep
    from services.report_service import ReportService

    monkeypatch.setattr(scheduled_sweep, 'SWEEP_SUITES', ('theorem1', 'lemma1'))
    totals = scheduled_sweep.run_sweep(bound=128)
    assert totals == {'pass': 5, 'fail': 0, 'error': 0, 'not_saved': 0}
    with flask_app.app_context():
        subjects = {r.subject for r in ReportService.list_reports(limit=500)}
    assert {'theorem1', 'lemma1', 'ruler', 'period_doubling', 'run_count'} <= subjects


def test_finished_tasks_are_pruned(flask_app):
    import app as app_module

    app_module.task_status.clear()
    app_module.task_progress.clear()
    for k in range(12):
        app_module.task_status[f'done_{k}'] = {'status': 'completed', 'progress': 100}
        app_module.task_progress[f'done_{k}'] = {'done': 1, 'total': 1}
    app_module.task_status['failed'] = {'status': 'error', 'progress': 0}
    app_module.task_status['running'] = {'status': 'running', 'progress': 40}

    assert app_module.prune_finished_tasks(keep=5) == 8
    assert 'running' in app_module.task_status
    assert 'failed' in app_module.task_status
    assert 'done_0' not in app_module.task_status and 'done_0' not in app_module.task_progress
    assert 'done_11' in app_module.task_status
    finished = [t for t, info in app_module.task_status.items() if info['status'] in ('completed', 'error')]
    assert len(finished) == 5
    assert not hasattr(app_module, 'task_threads')
