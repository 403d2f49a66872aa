import os
import sys

# База отчётов в памяти: задаётся до импорта app
os.environ['DATABASE_URL'] = 'sqlite://'
os.environ.setdefault('SECRET_KEY', 'test-secret')

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from services.bitseq import SeqId, generate_prefix

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
BFILE_DIR = os.path.join(ROOT, 'data', 'bfiles')


@pytest.fixture(scope='session')
def ruler_prefix():
    return generate_prefix(SeqId.RULER, 4096)


@pytest.fixture(scope='session')
def pd_prefix():
    return generate_prefix(SeqId.PERIOD_DOUBLING, 4096)


@pytest.fixture(scope='session')
def runs_prefix():
    return generate_prefix(SeqId.RUN_COUNT, 4096)


@pytest.fixture(scope='session')
def bfile_dir():
    return BFILE_DIR


@pytest.fixture
def flask_app():
    from app import app
    app.config['TESTING'] = True
    return app


@pytest.fixture
def client(flask_app):
    return flask_app.test_client()
