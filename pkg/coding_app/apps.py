from django.apps import AppConfig


class CodingAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'coding_app'
    verbose_name = 'Codes, bounds and verifiers'
