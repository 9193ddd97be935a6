"""Process-wide numerical tolerance and enumeration bound.

One tolerance is shared by every module so that projection equality,
commutation tests and trace thresholds agree with each other.
"""
from contextlib import contextmanager

DEFAULT_EPSILON = 1e-9
DEFAULT_MAX_ENUM = 20

_settings = {"epsilon": DEFAULT_EPSILON, "max_enum": DEFAULT_MAX_ENUM}


def eps():
    return _settings["epsilon"]


def max_enum():
    return _settings["max_enum"]


def configure(epsilon=None, max_enum=None):
    if epsilon is not None:
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        _settings["epsilon"] = float(epsilon)
    if max_enum is not None:
        if int(max_enum) < 1:
            raise ValueError("max_enum must be >= 1")
        _settings["max_enum"] = int(max_enum)


@contextmanager
def settings(epsilon=None, max_enum=None):
    saved = dict(_settings)
    configure(epsilon, max_enum)
    try:
        yield
    finally:
        _settings.update(saved)
