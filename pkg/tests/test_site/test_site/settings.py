"""
Django settings of the test site of the Toda laboratory.

The site has no database and no URL configuration; it hosts the
laboratory applications for their management commands and tests.
"""
import os
from pathlib import Path
from secrets import token_urlsafe

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = token_urlsafe(48)

DEBUG = True

ALLOWED_HOSTS = ["testserver"]

INSTALLED_APPS = [
    "lab_core.apps.LabCoreConfig",
    "toda.apps.TodaConfig",
]

DATABASES = {}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "{levelname} {name}: {message}",
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
        "toda": {
            "handlers": ["console"],
            "level": os.environ.get("TODA_LOG_LEVEL", "WARNING"),
        },
    },
}

TODA_LAB = {
    "OUTPUT_DIR": str(BASE_DIR / "toda-output"),
    "WORKERS": 2,
}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True
