"""
Django settings for the jensenlab project.

The project has no web surface: it hosts the ``core`` app, whose library
modules compute Jensen functional bounds and whose management commands are
the command-line front end.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Required by Django even though nothing here is signed or served.
SECRET_KEY = 'jensenlab-local-only-no-web-surface'

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'core',
]

MIDDLEWARE = []

# No persistence: reports are written to stdout, instances are read from files.
DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Django REST framework is used only for serializers and the JSON renderer.
REST_FRAMEWORK = {
    'COMPACT_JSON': False,
    'UNICODE_JSON': True,
    'STRICT_JSON': True,
}


# Jensen toolkit configuration; see core/conf.py for the fallbacks.
JENSEN = {
    'VERSION': '1.0.0',
    'TOLERANCE': {'ATOL': 1e-10, 'RTOL': 1e-9},
    'WEIGHT_SUM_TOL': 1e-9,
    'PREFIX_TOL': 1e-12,
    'CERT_GRID': {'X': 64, 'Y': 64, 'T': 17},
    'FUZZ': {
        'SEED': 20240522,
        'TRIALS': 10000,
        'N_MIN': 2,
        'N_MAX': 8,
        'Q_FLOOR': 0.05,
        'WORKERS': 4,
    },
}

JENSEN_LOG_LEVEL = 'INFO'

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '[{asctime}] {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'core': {
            'handlers': ['console'],
            'level': JENSEN_LOG_LEVEL,
            'propagate': False,
        },
    },
}
