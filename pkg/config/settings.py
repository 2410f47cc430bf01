"""
Django settings for the oneshot project.

The project has no database and no HTTP surface: Django provides settings,
logging and the management-command CLI; the numerical work lives in the
local apps below.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""
from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config("SECRET_KEY", default="oneshot-development-only-key")

DEBUG = config("DEBUG", default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

THIRD_PARTY_APPS = [
    'rest_framework',
]

LOCAL_APPS = [
    'channel_app.apps.ChannelAppConfig',
    'solver_app.apps.SolverAppConfig',
    'coding_app.apps.CodingAppConfig',
    'cli_app.apps.CliAppConfig',
]

INSTALLED_APPS = THIRD_PARTY_APPS + LOCAL_APPS

# No models anywhere; tests run on SimpleTestCase.
DATABASES = {}

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


"""
ONESHOT:
- Numerical tolerances shared by validation, the simplex engine and the verifiers.
- Size caps that guard every exponential construction (tightness outputs,
  tensor powers, subset enumeration). The CLI surfaces them as flags.
- CLI defaults for seeds and Monte-Carlo trials.
"""
ONESHOT = {
    # Rows within this distance of 1 are renormalised, others rejected
    'ROW_SUM_TOLERANCE': config('ONESHOT_ROW_SUM_TOLERANCE', default=1e-9, cast=float),
    # n = k * t for the tightness family
    'TIGHTNESS_SIZE_CAP': config('ONESHOT_TIGHTNESS_SIZE_CAP', default=16, cast=int),
    # |X|^n * |Y|^n for tensor powers
    'TENSOR_SIZE_CAP': config('ONESHOT_TENSOR_SIZE_CAP', default=1_000_000, cast=int),
    # Number of subsets exact search may visit
    'ENUMERATION_CAP': config('ONESHOT_ENUMERATION_CAP', default=10_000_000, cast=int),
    'PIVOT_TOLERANCE': config('ONESHOT_PIVOT_TOLERANCE', default=1e-9, cast=float),
    'FEASIBILITY_TOLERANCE': config('ONESHOT_FEASIBILITY_TOLERANCE', default=1e-7, cast=float),
    'MAX_PIVOTS': config('ONESHOT_MAX_PIVOTS', default=50_000, cast=int),
    'VERIFY_TOLERANCE': config('ONESHOT_VERIFY_TOLERANCE', default=1e-7, cast=float),
    'DEFAULT_SEED': config('ONESHOT_DEFAULT_SEED', default=0, cast=int),
    'DEFAULT_TRIALS': config('ONESHOT_DEFAULT_TRIALS', default=10_000, cast=int),
    # Random input distributions sampled by the hypothesis-testing verifier
    'MIN_MAX_SAMPLES': config('ONESHOT_MIN_MAX_SAMPLES', default=20, cast=int),
}


"""
LOGGING:
- Everything goes to standard error; standard output is reserved for payloads.
- One logger per local app, level controlled by LOG_LEVEL.
"""
LOG_LEVEL = config('LOG_LEVEL', default='WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in ('channel_app', 'solver_app', 'coding_app', 'cli_app')
    },
}
