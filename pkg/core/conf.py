from django.conf import settings

DEFAULTS = {
    'VERSION': '1.0.0',
    'TOLERANCE': {'ATOL': 1e-10, 'RTOL': 1e-9},
    'WEIGHT_SUM_TOL': 1e-9,
    'PREFIX_TOL': 1e-12,
    'CERT_GRID': {'X': 64, 'Y': 64, 'T': 17},
    'FUZZ': {
        'SEED': 20240522,
        'TRIALS': 10000,
        'N_MIN': 2,
        'N_MAX': 8,
        'Q_FLOOR': 0.05,
        'WORKERS': 4,
    },
}


def jensen_setting(name):
    """Read one key of settings.JENSEN, falling back to DEFAULTS."""
    configured = getattr(settings, 'JENSEN', {}) if settings.configured else {}
    default = DEFAULTS[name]
    value = configured.get(name, default)
    if isinstance(default, dict):
        return {**default, **value}
    return value
