"""Kernel backend selection.

The compiled extension is preferred. Set ``FASTRON_BACKEND=python`` to force
the pure-Python kernels, or ``FASTRON_BACKEND=compiled`` to make a missing
extension an import error instead of a silent fallback.
"""

import importlib
import logging
import os

logger = logging.getLogger(__name__)

_CHOICES = ("compiled", "python")


def load(name):
    """Return the kernel module for ``name`` ("compiled" or "python")."""
    if name == "compiled":
        return importlib.import_module("fastron._core")
    if name == "python":
        return importlib.import_module("fastron._pycore")
    raise ValueError(f"unknown backend {name!r}; expected one of {_CHOICES}")


def available():
    """Names of the backends importable in this environment."""
    names = []
    for name in _CHOICES:
        try:
            load(name)
        except ImportError:
            continue
        names.append(name)
    return names


def _select():
    requested = os.environ.get("FASTRON_BACKEND", "").strip().lower()
    if requested:
        return load(requested)
    try:
        return load("compiled")
    except ImportError:
        logger.info("compiled core unavailable; using pure-Python kernels")
        return load("python")


core = _select()
