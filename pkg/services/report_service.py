"""
Отчёты команд: сборка, детерминированная сериализация, сохранение в БД.

Поле timing - единственная часть отчёта, зависящая от времени запуска;
остальное при одинаковых входных данных сериализуется побайтно одинаково.
"""

import json
import logging
import os
import time
from dataclasses import dataclass, field
from datetime import datetime
from typing import List, Optional, Tuple

import numpy as np
import pytz
from sqlalchemy.exc import DisconnectionError, OperationalError

from config import timezone_name
from models import LearnedAutomaton, VerificationReport, db

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 'v1'

EXIT_CODES = {'pass': 0, 'fail': 1, 'error': 2}


def _to_builtin(value):
    """Скаляры numpy и множества для json.dumps"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def now() -> datetime:
    """Текущее время в часовом поясе TIMEZONE"""
    try:
        tz = pytz.timezone(timezone_name())
    except pytz.UnknownTimeZoneError:
        logger.warning(f"Unknown TIMEZONE {timezone_name()!r}, using UTC")
        tz = pytz.utc
    return datetime.now(tz)


@dataclass
class Report:
    command: List[str]
    params: dict
    status: str
    message: str
    payload: dict
    started_at: datetime = field(default_factory=now)
    elapsed: float = 0.0

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.status, 2)

    @property
    def ok(self) -> bool:
        return self.status == 'pass'

    def to_dict(self) -> dict:
        return {
            'schema_version': SCHEMA_VERSION,
            'command': list(self.command),
            'params': self.params,
            'status': self.status,
            'message': self.message,
            'result': self.payload,
            'timing': {
                'started_at': self.started_at.isoformat(),
                'elapsed_seconds': round(self.elapsed, 3),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False, default=_to_builtin) + '\n'


class ReportService:
    """Сборка и хранение отчётов"""

    @staticmethod
    def _execute_with_retry(func, retries=5, delay=1):
        """Выполняет функцию с повторными попытками при ошибках соединения с БД"""
        for attempt in range(retries):
            try:
                return func()
            except (OperationalError, DisconnectionError) as e:
                error_str = str(e).lower()
                if any(err in error_str for err in [
                    'ssl syscall error', 'eof detected', 'connection',
                    'network', 'timeout', 'closed', 'reset', 'locked'
                ]):
                    logger.warning(f"Database connection error (attempt {attempt+1}/{retries}): {e}")
                    if attempt < retries - 1:
                        db.session.rollback()
                        # Экспоненциальная задержка: 1, 2, 4, 8 секунд
                        time.sleep(delay * (2 ** attempt))
                        continue
                    logger.error(f"Database connection error after {retries} attempts: {e}")
                    raise
                raise

    @staticmethod
    def build(command: List[str], params: dict, result: Tuple[bool, str, dict],
              started_at: datetime, elapsed: float) -> Report:
        """Отчёт из результата сервиса (ok, сообщение, payload)"""
        ok, message, payload = result
        status = payload.get('status') or ('pass' if ok else 'fail')
        body = {k: v for k, v in payload.items() if k != 'status'}
        return Report(list(command), dict(params), status, message, body, started_at, elapsed)

    @staticmethod
    def run_timed(command: List[str], params: dict, func, *args, **kwargs) -> Report:
        """Вызов сервиса с замером времени; результат - отчёт"""
        started_at = now()
        started = time.perf_counter()
        result = func(*args, **kwargs)
        return ReportService.build(command, params, result, started_at, time.perf_counter() - started)

    @staticmethod
    def write(report: Report, path: str) -> Tuple[bool, str]:
        try:
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write(report.to_json())
            logger.info(f"Report written to {path}")
            return True, f"Report written to {path}"
        except OSError as e:
            logger.error(f"Cannot write report to {path}: {e}")
            return False, f"Cannot write report to {path}: {e}"

    @staticmethod
    def save(report: Report, subject: str, bound: Optional[int] = None) -> Tuple[bool, str, Optional[VerificationReport]]:
        """Сохранение отчёта в БД (нужен контекст приложения)"""
        try:
            record = VerificationReport(
                command=report.command[0] if report.command else 'unknown',
                subject=subject,
                bound=bound,
                status=report.status,
                message=report.message,
                violations=int(report.payload.get('violation_count', report.payload.get('mismatch_count', 0)) or 0),
                payload=json.loads(report.to_json()),
                elapsed=round(report.elapsed, 3),
            )

            def save_record():
                db.session.add(record)
                db.session.commit()

            ReportService._execute_with_retry(save_record)
            logger.info(f"Report saved: id={record.id} {record.command} {subject} {record.status}")
            return True, f"Report saved (ID: {record.id})", record
        except Exception as e:
            db.session.rollback()
            logger.error(f"Error saving report: {e}")
            return False, f"Error saving report: {e}", None

    @staticmethod
    def save_automaton(sequence: str, epsilon: int, bound: int, dfa_text: str, num_states: int,
                       report_id: Optional[int] = None) -> Tuple[bool, str, Optional[LearnedAutomaton]]:
        try:
            record = LearnedAutomaton(
                sequence=sequence,
                epsilon=epsilon,
                bound=bound,
                num_states=num_states,
                dfa_text=dfa_text,
                report_id=report_id,
            )

            def save_record():
                db.session.add(record)
                db.session.commit()

            ReportService._execute_with_retry(save_record)
            return True, f"Automaton saved (ID: {record.id})", record
        except Exception as e:
            db.session.rollback()
            logger.error(f"Error saving automaton: {e}")
            return False, f"Error saving automaton: {e}", None

    @staticmethod
    def list_reports(limit: int = 50, command: Optional[str] = None) -> List[VerificationReport]:
        def query():
            q = VerificationReport.query
            if command:
                q = q.filter_by(command=command)
            return q.order_by(VerificationReport.created_at.desc(), VerificationReport.id.desc()).limit(limit).all()

        return ReportService._execute_with_retry(query)

    @staticmethod
    def get_report(report_id: int) -> Optional[VerificationReport]:
        return ReportService._execute_with_retry(lambda: db.session.get(VerificationReport, report_id))
