import os
import logging

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _int_env(name: str, default: int) -> int:
    """Целое значение из окружения; при ошибке - значение по умолчанию"""
    raw = os.environ.get(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Invalid integer in {name}={raw!r}, using default {default}")
        return default


def oracle_bound() -> int:
    """Предельная длина слова для переборного оракула"""
    return _int_env('PALINRULER_ORACLE_BOUND', 2 ** 17)


def default_max_len() -> int:
    """Предельная длина слова для поиска по маскам A/B"""
    return _int_env('PALINRULER_MAX_LEN', 22)


def default_jobs() -> int:
    return max(1, _int_env('PALINRULER_JOBS', 1))


def sweep_bound() -> int:
    return _int_env('SWEEP_BOUND', 2 ** 14)


def timezone_name() -> str:
    return os.environ.get('TIMEZONE', 'UTC')


def database_url() -> str:
    """URL базы отчётов (postgres:// приводится к postgresql://)"""
    url = os.environ.get('DATABASE_URL')
    if not url:
        return 'sqlite:///palinruler.db'

    if url.startswith('postgres://'):
        url = url.replace('postgres://', 'postgresql://', 1)

    if url.startswith('postgresql://'):
        # Параметры для стабильности соединения
        params = 'sslmode=require&connect_timeout=10&keepalives_idle=60&keepalives_interval=10&keepalives_count=5'
        url += ('&' if '?' in url else '?') + params

    return url


def engine_options(url: str) -> dict:
    """Настройки пула соединений (для sqlite пул не настраивается)"""
    if url.startswith('sqlite'):
        return {'pool_pre_ping': True}
    return {
        'pool_pre_ping': True,
        'pool_recycle': 280,
        'pool_timeout': 30,
        'max_overflow': 10,
        'pool_size': 5,
        'pool_reset_on_return': 'rollback',
    }
