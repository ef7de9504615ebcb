from django.apps import AppConfig


class RegularizationConfig(AppConfig):
    name = 'regularization'
    verbose_name = 'Krylov regularization experiments'
