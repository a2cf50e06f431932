"""Exact and classical state-space moment models of the deficient-length
LMS adaptive filter.

The compiled extension normally lives next to this file as ``lmsexact._core``.
During development the build tree is not installed; set ``LMS_CORE_DIR`` to
the directory containing the built ``_core`` extension and this package will
load it from there instead.
"""

import importlib
import os
import sys


def _load_core():
    override = os.environ.get("LMS_CORE_DIR")
    if override:
        sys.path.insert(0, override)
        try:
            return importlib.import_module("_core")
        finally:
            sys.path.remove(override)
    return importlib.import_module("._core", __name__)


_core = _load_core()

__all__ = []
for _name in dir(_core):
    if not _name.startswith("_"):
        globals()[_name] = getattr(_core, _name)
        __all__.append(_name)

__doc__ = _core.__doc__
del _core, _load_core, _name, importlib, os, sys
