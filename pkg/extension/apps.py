from django.apps import AppConfig


class ExtensionConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "extension"
    verbose_name = "Half-cylinder extension"
