"""
Django settings for the auto-vocabulary point-cloud segmentation project.

The project has no web surface: Django hosts the management commands that form
the command line, the LOGGING configuration, and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os

# Load .env when available (helps local development)
try:
    from dotenv import load_dotenv
    load_dotenv(os.path.join(Path(__file__).resolve().parent.parent, '.env'))
except Exception:
    # dotenv not installed or .env missing; rely on environment variables
    pass

try:
    from decouple import config as _decouple_config

    def config(key, default='', cast=None):
        if cast is None:
            return _decouple_config(key, default=default)
        return _decouple_config(key, default=default, cast=cast)
except Exception:
    def config(key, default='', cast=None):
        value = os.getenv(key, default)
        return cast(value) if cast is not None and value is not None else value

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('DJANGO_SECRET_KEY', default='autovocab-offline-pipeline-no-http-surface')

DEBUG = config('DJANGO_DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'autovocab',
]

# No database: every artefact lives in plain files described by the scene manifest.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# DRF is used for serializers (document validation) and JSON rendering only
REST_FRAMEWORK = {
    'UNICODE_JSON': True,
    'COMPACT_JSON': False,
    'STRICT_JSON': True,
}


def _bool(value):
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ('1', 'true', 'yes', 'on')


# Pipeline defaults. Command flags override these.
AVS = {
    'EMBED_DIM': config('AVS_EMBED_DIM', default=64, cast=int),
    'SEED': config('AVS_SEED', default=0, cast=int),
    'NOISE_SIGMA': config('AVS_NOISE_SIGMA', default=0.0, cast=float),
    'SECTORS': config('AVS_SECTORS', default=12, cast=int),
    'PILLAR_SIDE': config('AVS_PILLAR_SIDE', default=0.5, cast=float),
    'K_DECODE': config('AVS_K_DECODE', default=3, cast=int),
    'TPSS_SCALE': config('AVS_TPSS_SCALE', default=1.0, cast=float),
    'PE_HIDDEN': config('AVS_PE_HIDDEN', default=32, cast=int),
    'HEADS': config('AVS_HEADS', default=4, cast=int),
    'LEARNING_RATE': config('AVS_LEARNING_RATE', default=1e-5, cast=float),
    'EPOCHS': config('AVS_EPOCHS', default=20, cast=int),
    'POLY_POWER': config('AVS_POLY_POWER', default=0.9, cast=float),
    'ALLOW_COMPOUND': config('AVS_ALLOW_COMPOUND', default=True, cast=_bool),
    'ASSIGN_CHUNK': config('AVS_ASSIGN_CHUNK', default=65536, cast=int),
    'MAX_POINTS': config('AVS_MAX_POINTS', default=2 ** 28, cast=int),
    'LEXICON_PATH': config('AVS_LEXICON_PATH', default=str(BASE_DIR / 'autovocab' / 'data' / 'lexicon.tsv')),
}

# Logging - diagnostics go to the console (standard error); results never do
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'autovocab': {
            'handlers': ['console'],
            'level': config('AVS_LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
        # per-epoch progress only when AVS_TRAIN_LOG_LEVEL asks for it
        'autovocab.services.training_service': {
            'handlers': ['console'],
            'level': config('AVS_TRAIN_LOG_LEVEL', default='WARNING'),
            'propagate': False,
        },
    },
}
