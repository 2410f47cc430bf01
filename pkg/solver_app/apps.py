from django.apps import AppConfig


class SolverAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'solver_app'
    verbose_name = 'Linear programming'
