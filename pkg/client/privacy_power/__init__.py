import os

from .version import __version__

PRIVACY_POWER_ROOT = os.path.dirname(os.path.abspath(__file__))


__all__ = (
    "__version__",

    "PRIVACY_POWER_ROOT",
)
