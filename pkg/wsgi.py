"""
Точка входа WSGI для gunicorn: gunicorn wsgi:application
"""

import os

from app import app as application

if __name__ == "__main__":
    port = int(os.environ.get('PORT', 5000))
    application.run(host='0.0.0.0', port=port)
