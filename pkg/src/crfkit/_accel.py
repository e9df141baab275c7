"""Numba availability and backend selection for the hot numeric kernels.

The inner loops in :mod:`crfkit._kernels` ship twice: plain numpy and numba
``@njit``. The active set is picked once, at import time, from the
``CRFKIT_NUMBA`` environment variable; setting it to ``0``/``false``/``off``/
``no`` forces the pure-numpy path. When numba is not importable the numpy
path is used regardless of the flag.
"""
from __future__ import annotations

import os

_OFF_VALUES = {"0", "false", "off", "no"}


def numba_requested(env_value: str | None) -> bool:
    """True unless the env value spells one of the documented off switches."""
    if env_value is None:
        return True
    return env_value.strip().lower() not in _OFF_VALUES


try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    NUMBA_AVAILABLE = False

NUMBA_ENABLED = NUMBA_AVAILABLE and numba_requested(os.environ.get("CRFKIT_NUMBA"))
