from pathlib import Path

import environ

# We go up 3 levels: config/settings/base.py -> config/settings -> config -> root
BASE_DIR = Path(__file__).resolve().parent.parent.parent

env = environ.Env()

DEBUG = True

LAB_VERSION = "1.0.0"

# Application definition

INSTALLED_APPS = [
    "django.contrib.auth",
    "django.contrib.contenttypes",
    # Third-party apps
    "rest_framework",
    # Local apps
    "core",
    "spectral",
    "extension",
    "variational",
    "experiments",
]

# Database
# Use generic dummy config here, we override it in local.py
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# DRF is only used for (de)serialization of configs, fields and reports
REST_FRAMEWORK = {
    "UNAUTHENTICATED_USER": None,
    "COERCE_DECIMAL_TO_STRING": False,
}

# --- NUMERICS ---
# Where experiment artifacts go when neither the config nor --out says otherwise
LAB_OUTPUT_ROOT = env.path("LAB_OUTPUT_ROOT", default=str(BASE_DIR / "runs"))
LAB_DEFAULT_SEED = env.int("LAB_DEFAULT_SEED", default=20240601)

LAB_DEFAULTS = {
    # conormal extrapolation
    "probes": (1e-3, 5e-4, 2.5e-4),
    "probe_tol": 1e-2,
    # refine (damped Newton + GMRES)
    "cerami_tol": 1e-6,
    "max_iterations": 60,
    "trivial_floor": 1e-8,
    "gmres_rtol": 1e-10,
    "gmres_restart": 60,
    "gmres_maxiter": 200,
    # linking mesh
    "mesh_radial": 40,
    "mesh_angular": 40,
    "mesh_grading": 3.0,
    "max_sweeps": 150,
    "level_tol": 1e-9,
    # sampling for hypothesis / geometry checks
    "samples": 1000,
    "t_max": 100.0,
    "epsilons": (0.5, 0.25, 0.125),
    "amplitudes": (1.0, 2.0, 5.0),
    "deltas": (0.1, 1.0, 10.0),
    # (F*) fits are cheap to keep around between runs
    "bound_cache_timeout": 60 * 60 * 24,
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {module} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        "django": {
            "handlers": ["console"],
            "level": "INFO",
            "propagate": False,
        },
        **{
            app: {"handlers": ["console"], "level": env("LOG_LEVEL", default="INFO"), "propagate": False}
            for app in ("core", "spectral", "extension", "variational", "experiments")
        },
    },
}
