from flask import Flask, request, jsonify
from models import db, VerificationReport, LearnedAutomaton
from services.bitseq import SeqId
from services.errors import PalinrulerError
from services.levelang import level_set
from services.pallen import table_for
from services.report_service import ReportService
from services.verify_service import SUITES, VerifyService
from config import LOG_FORMAT, database_url, engine_options
import os
import logging
import time
import threading
from functools import wraps
from sqlalchemy import text
from sqlalchemy.exc import OperationalError, DisconnectionError

# Настройка логирования
logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
logger = logging.getLogger(__name__)

app = Flask(__name__)
app.config['SECRET_KEY'] = os.environ.get('SECRET_KEY', 'dev-secret-key-change-in-production')

# Настройка базы данных
app.config['SQLALCHEMY_DATABASE_URI'] = database_url()
app.config['SQLALCHEMY_TRACK_MODIFICATIONS'] = False
app.config['SQLALCHEMY_ENGINE_OPTIONS'] = engine_options(app.config['SQLALCHEMY_DATABASE_URI'])

db.init_app(app)

# Создание таблиц
with app.app_context():
    db.create_all()

# Хранилище статусов фоновых задач
task_status = {}
task_progress = {}

# Сколько завершённых задач хранится в памяти (отчёты остаются в БД)
MAX_FINISHED_TASKS = 100
FINISHED_STATES = ('completed', 'error')

# Предельное число членов в ответе /api/sequences и /api/levelset
MAX_API_TERMS = 1 << 16

GEN_SEQUENCES = ('ruler', 'period-doubling', 'run-count', 'pl-a', 'pl-b')


# ==================== ДЕКОРАТОР ДЛЯ ОБРАБОТКИ ОШИБОК БД ====================

def db_retry(max_retries=5, delay=1):
    """Декоратор для повторных попыток при ошибках БД"""
    def decorator(f):
        @wraps(f)
        def decorated_function(*args, **kwargs):
            for attempt in range(max_retries):
                try:
                    return f(*args, **kwargs)
                except (OperationalError, DisconnectionError) as e:
                    error_str = str(e).lower()
                    if any(err in error_str for err in [
                        'ssl syscall error', 'eof detected', 'connection',
                        'network', 'timeout', 'closed', 'reset'
                    ]):
                        if attempt < max_retries - 1:
                            db.session.rollback()
                            logger.warning(f"DB error in {f.__name__}, retry {attempt+1}/{max_retries}: {e}")
                            time.sleep(delay * (2 ** attempt))
                            continue
                        logger.error(f"DB error in {f.__name__} after {max_retries} retries: {e}")
                        return jsonify({'error': 'database unavailable'}), 503
                    raise
            return jsonify({'error': 'database unavailable'}), 503
        return decorated_function
    return decorator


def _int_arg(name: str, default=None, minimum: int = 1, maximum: int = None) -> int:
    """Целый параметр запроса (query, form или JSON); PalinrulerError -> 400"""
    raw = request.values.get(name)
    if raw is None and request.is_json:
        raw = (request.get_json(silent=True) or {}).get(name)
    if raw is None:
        if default is None:
            raise PalinrulerError(f"parameter {name!r} is required")
        return default
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise PalinrulerError(f"parameter {name!r} must be an integer, got {raw!r}") from None
    if value < minimum or (maximum is not None and value > maximum):
        raise PalinrulerError(f"parameter {name!r} out of range: {value}")
    return value


def _source_name(seq: str) -> str:
    key = seq.strip().lower().replace('_', '-')
    if key not in GEN_SEQUENCES:
        raise PalinrulerError(f"unknown sequence {seq!r}; expected one of {', '.join(GEN_SEQUENCES)}")
    return key


# ==================== ФОНОВАЯ ЗАДАЧА ====================

def run_verify_task(suite: str, bound: int, task_id: str):
    """Фоновая проверка с прогрессом; отчёт сохраняется в БД"""
    with app.app_context():
        try:
            task_status[task_id] = {'status': 'running', 'message': f'Suite {suite} started', 'progress': 0}
            task_progress[task_id] = {'done': 0, 'total': 0}

            def update_progress(done, total):
                task_progress[task_id] = {'done': done, 'total': total}
                task_status[task_id]['progress'] = int(100 * done / total) if total else 0

            report = ReportService.run_timed(
                ['verify', suite, str(bound)], {'suite': suite, 'bound': bound},
                VerifyService.run, suite, bound, 1, update_progress,
            )
            saved, save_message, record = ReportService.save(report, suite, bound)

            task_status[task_id] = {
                'status': 'completed' if report.status != 'error' else 'error',
                'result': report.status,
                'message': report.message,
                'progress': 100,
                'report_id': record.id if saved else None,
                'elapsed': round(report.elapsed, 3),
            }
            if not saved:
                task_status[task_id]['save_error'] = save_message
        except Exception as e:
            logger.error(f"Error in verify task {task_id}: {e}")
            db.session.rollback()
            task_status[task_id] = {'status': 'error', 'message': str(e), 'progress': 0}


def prune_finished_tasks(keep: int = MAX_FINISHED_TASKS) -> int:
    """Удаляет самые старые завершённые задачи сверх keep; возвращает число удалённых"""
    finished = [task_id for task_id, info in list(task_status.items()) if info.get('status') in FINISHED_STATES]
    stale = finished[:max(0, len(finished) - keep)]
    for task_id in stale:
        task_status.pop(task_id, None)
        task_progress.pop(task_id, None)
    if stale:
        logger.info(f"Pruned {len(stale)} finished tasks")
    return len(stale)


# ==================== ПОСЛЕДОВАТЕЛЬНОСТИ ====================

@app.route('/api/sequences/<seq>')
def sequence_values(seq):
    """Члены последовательности 1..n: [{'n', 'value'}]"""
    name = _source_name(seq)
    n = _int_arg('n', maximum=MAX_API_TERMS)
    table = table_for(name, n)
    return jsonify({
        'sequence': name,
        'n': n,
        'rows': [{'n': i, 'value': value} for i, value in table.to_rows()],
    })


@app.route('/api/levelset/<seq>')
def levelset_members(seq):
    """Множество уровня {i <= n : f(i) = epsilon}"""
    name = _source_name(seq)
    epsilon = _int_arg('epsilon')
    n = _int_arg('n', maximum=MAX_API_TERMS)
    ls = level_set(table_for(name, n), epsilon, n)
    return jsonify({'sequence': name, 'epsilon': epsilon, 'n': n, 'members': list(ls.members)})


# ==================== ПРОВЕРКИ ====================

@app.route('/api/suites')
def suites_list():
    return jsonify([
        {'name': s.name, 'default_bound': s.default_bound, 'bound_kind': s.bound_kind, 'description': s.description}
        for s in SUITES.values()
    ])


@app.route('/api/verify/<suite>', methods=['POST'])
def start_verify(suite):
    """Запуск проверки в фоновом режиме"""
    if suite not in SUITES:
        return jsonify({'error': f'unknown suite {suite!r}'}), 404
    bound = _int_arg('bound', default=SUITES[suite].default_bound)

    task_id = f"verify_{suite}_{int(time.time() * 1000)}"
    prune_finished_tasks()
    task_status[task_id] = {'status': 'queued', 'message': 'Queued', 'progress': 0}

    thread = threading.Thread(target=run_verify_task, args=(suite, bound, task_id))
    thread.daemon = True
    thread.start()

    logger.info(f"Verify task {task_id} started: {suite} bound={bound}")
    return jsonify({'task_id': task_id, 'suite': suite, 'bound': bound}), 202


@app.route('/api/tasks/<task_id>')
def task_info(task_id):
    """Статус фоновой задачи"""
    if task_id not in task_status:
        return jsonify({'error': 'task not found'}), 404
    return jsonify({
        **task_status[task_id],
        'progress_detail': task_progress.get(task_id, {}),
    })


# ==================== ОТЧЁТЫ ====================

@app.route('/api/reports')
@db_retry()
def reports_list():
    limit = _int_arg('limit', default=50, maximum=500)
    command = request.args.get('command')
    reports = ReportService.list_reports(limit=limit, command=command)
    return jsonify([r.to_dict(with_payload=False) for r in reports])


@app.route('/api/reports/<int:report_id>')
@db_retry()
def report_detail(report_id):
    report = ReportService.get_report(report_id)
    if report is None:
        return jsonify({'error': 'report not found'}), 404
    return jsonify(report.to_dict())


@app.route('/api/automata')
@db_retry()
def automata_list():
    """Автоматы, полученные обучением (гипотезы)"""
    automata = LearnedAutomaton.query.order_by(LearnedAutomaton.id.desc()).limit(100).all()
    return jsonify([a.to_dict() for a in automata])


# ==================== HEALTH CHECK ====================

@app.route('/health')
def health():
    """Health check для Render"""
    try:
        db.session.execute(text('SELECT 1'))
        return jsonify({'status': 'ok', 'reports': VerificationReport.query.count()}), 200
    except Exception as e:
        logger.error(f"Health check failed: {e}")
        try:
            db.session.rollback()
            db.session.execute(text('SELECT 1'))
            return jsonify({'status': 'ok (recovered)'}), 200
        except Exception:
            return jsonify({'status': 'db error'}), 500


# ==================== ОБРАБОТЧИКИ ОШИБОК ====================

@app.errorhandler(PalinrulerError)
def bad_parameters(error):
    """Нарушенное предусловие - ошибка запроса"""
    return jsonify({'error': str(error)}), 400


@app.errorhandler(404)
def not_found(error):
    return jsonify({'error': 'not found'}), 404


@app.errorhandler(500)
def internal_error(error):
    """Внутренняя ошибка сервера"""
    db.session.rollback()
    logger.error(f"Internal server error: {error}")
    return jsonify({'error': 'internal server error'}), 500


@app.errorhandler(OperationalError)
def handle_db_error(error):
    """Обработчик ошибок базы данных"""
    db.session.rollback()
    logger.error(f"Database error: {error}")
    return jsonify({'error': 'database unavailable'}), 503


# ==================== ЗАПУСК ====================

if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5000))
    app.run(host='0.0.0.0', port=port, debug=True)
