"""
Django settings for the krylovlab project.

Generated by 'django-admin startproject' using Django 5.2.3 and trimmed down to
what the experiment runner needs: no database, no HTTP surface, just the
regularization app, its templates and its management commands.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv, find_dotenv

# Load environment definition file before reading anything from os.environ
ENV_FILE = find_dotenv(usecwd=True)
if ENV_FILE:
    load_dotenv(ENV_FILE)

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals (signing); nothing here is served.
SECRET_KEY = os.environ.get('SECRET_KEY', 'krylovlab-local-only-not-a-secret')

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "rest_framework",
    "regularization",
]

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [],
        },
    },
]

# Experiments write files, never rows; no database is configured.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Experiment runner settings

# Output directory override; takes precedence over a config's output_dir
KRR_OUT = os.environ.get("KRR_OUT") or None

# Grid points run on this many threads; CSV order never depends on it
KRR_WORKERS = int(os.environ.get("KRR_WORKERS", "1"))

KRR_DEFAULT_ETA = float(os.environ.get("KRR_DEFAULT_ETA", "1.01"))
KRR_DEFAULT_MAX_ITER = int(os.environ.get("KRR_DEFAULT_MAX_ITER", "100"))

KRR_LOG_LEVEL = os.environ.get("KRR_LOG_LEVEL", "INFO").upper()


# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
    },
    "loggers": {
        "regularization": {
            "handlers": ["console"],
            "level": KRR_LOG_LEVEL,
            "propagate": False,
        },
    },
}
