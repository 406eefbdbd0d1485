from django.apps import AppConfig


class AutovocabConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'autovocab'
    verbose_name = 'Auto-vocabulary point-cloud segmentation'
