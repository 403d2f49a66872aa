#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Плановый прогон проверок и сверки с b-файлами.
Запускается cron-задачей; все отчёты сохраняются в БД.
"""

import os
import sys
import logging

from config import LOG_FORMAT, sweep_bound

# Настройка логирования
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT
)
logger = logging.getLogger(__name__)

# Добавляем текущую директорию в path для импорта модулей
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from app import app
from services.bfile import BFileService
from services.report_service import ReportService, now
from services.verify_service import SUITES, VerifyService

BFILE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'bfiles')

# Проверки по индексу N получают SWEEP_BOUND, по длине слова - значение по умолчанию
SWEEP_SUITES = ('theorem1', 'theorem2-bounds', 'prop2-oracle', 'prop6', 'prop3', 'morphic',
                'lemma1', 'prop1', 'cor1', 'lemma3-oracle')


def _bound_for(name: str, bound: int) -> int:
    suite = SUITES[name]
    if suite.bound_kind == 'L':
        return suite.default_bound
    return min(bound, suite.default_bound)


def run_sweep(bound: int = None) -> dict:
    """Основная функция прогона; возвращает итоги по статусам"""
    task_name = os.environ.get('TASK_NAME', 'palinruler_sweep')
    bound = bound or sweep_bound()
    current_time = now()

    logger.info("=" * 60)
    logger.info(f"Запуск задачи: {task_name}")
    logger.info(f"Время запуска: {current_time.strftime('%Y-%m-%d %H:%M:%S %Z')}")
    logger.info(f"Граница N: {bound}")
    logger.info("=" * 60)

    totals = {'pass': 0, 'fail': 0, 'error': 0, 'not_saved': 0}

    with app.app_context():
        for name in SWEEP_SUITES:
            suite_bound = _bound_for(name, bound)
            report = ReportService.run_timed(
                ['verify', name, str(suite_bound)], {'suite': name, 'bound': suite_bound},
                VerifyService.run, name, suite_bound,
            )
            totals[report.status] = totals.get(report.status, 0) + 1
            saved, message, _ = ReportService.save(report, name, suite_bound)
            if not saved:
                totals['not_saved'] += 1
            logger.info(f"  - {name}: {report.status} ({report.elapsed:.1f}s) {report.message}")

        for path, seq, offset in BFileService.bundled(BFILE_DIR):
            report = ReportService.run_timed(
                ['oeis-check', path, seq, f'--offset={offset}'], {'path': path, 'sequence': seq, 'offset': offset},
                BFileService.check, path, seq, offset,
            )
            totals[report.status] = totals.get(report.status, 0) + 1
            saved, message, _ = ReportService.save(report, seq)
            if not saved:
                totals['not_saved'] += 1
            logger.info(f"  - {os.path.basename(path)}: {report.status} {report.message}")

    logger.info("=" * 60)
    logger.info(f"Итог: {totals['pass']} pass, {totals['fail']} fail, {totals['error']} error, "
                f"не сохранено: {totals['not_saved']}")
    logger.info("=" * 60)
    return totals


if __name__ == '__main__':
    result = run_sweep()
    sys.exit(0 if result['fail'] == 0 and result['error'] == 0 else 1)
