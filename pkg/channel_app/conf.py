from django.conf import settings


def oneshot_setting(name, override=None):
    """
    Returns `override` when given, otherwise settings.ONESHOT[name].
    """
    if override is not None:
        return override
    return settings.ONESHOT[name]
